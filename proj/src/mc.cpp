#include "divopt/mc.hpp"

#include "divopt/rng.hpp"

#include <algorithm>
#include <cmath>

namespace divopt {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

} // namespace

void PathRng::refill()
{
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t c2 = path_lo_;
    std::uint32_t c3 = path_hi_;
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    buf_[0] = c0;
    buf_[1] = c1;
    buf_[2] = c2;
    buf_[3] = c3;
    have_ = 4;
    ++block_;
}

double normal_icdf(double p)
{
    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double u = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5])
             / ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    if (p > 1.0 - plow) {
        const double u = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5])
             / ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    const double u = p - 0.5;
    const double r = u * u;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u
         / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double PathRng::normal()
{
    return normal_icdf(uniform());
}

namespace {

struct MeanAccumulator {
    double sum = 0.0;
    double sumsq = 0.0;
    long n = 0;
    void add(double v)
    {
        sum += v;
        sumsq += v * v;
        ++n;
    }
    double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
    double stderr_() const
    {
        if (n < 2)
            return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sumsq - static_cast<double>(n) * m * m)
                                             / static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

// Long steps: crossing any critical level inside a block is kept below
// ~exp(-kGuard^2/2) per block.
constexpr double kGuard = 6.0;
constexpr double kMaxStep = 4.0;

double safe_step(double dist, double sigma, double dt)
{
    const double h = dist / (kGuard * sigma);
    return std::clamp(h * h, dt, kMaxStep);
}

struct PerfSpec {
    const ModelParams* p;
    const StrategySpec* strategy;
    bool time_varying;    // TimeBarrier: no acceleration
    double fixed_barrier; // Barrier level, or -1 if none
};

double dividend_rate(const ModelParams& p, const StrategySpec& st, double s, double x)
{
    if (const auto* cr = std::get_if<ConstantRate>(&st))
        return cr->c;
    if (const auto* ba = std::get_if<Barrier>(&st))
        return x > ba->q ? p.xi : 0.0;
    const auto& tb = std::get<TimeBarrier>(st);
    return x > tb.level(s) ? p.xi : 0.0;
}

} // namespace

McEstimate simulate_performance(const ModelParams& p, const StrategySpec& strategy,
                                double t, double x, const SimConfig& sim)
{
    if (t < 0.0 || x < 0.0)
        throw validation_error("simulate_performance requires t, x >= 0");
    if (const auto* cr = std::get_if<ConstantRate>(&strategy))
        if (cr->c < 0.0 || cr->c > p.xi)
            throw validation_error("constant rate outside [0, xi]");

    McEstimate est;
    est.n_paths = sim.n_paths;
    est.seed = sim.seed;
    est.dt = sim.dt;

    const double payout_scale = p.xi / p.delta;
    const double T = sim.horizon > 0.0
        ? sim.horizon
        : std::log(payout_scale / 1e-6) / p.delta; // xi/delta e^{-dT} < 1e-6
    const double tail = payout_scale * std::exp(-p.delta * (t + T));
    est.bias_budget = (1.0 - std::exp(-p.gamma * tail)) / p.gamma // horizon cut
                    + p.xi * sim.dt                               // in-step accrual at ruin
                    + 1e-6;                                       // long-step guard

    if (x == 0.0)
        return est; // ruin is immediate: U(0) = 0 with zero variance

    const bool time_varying = std::holds_alternative<TimeBarrier>(strategy);
    double barrier_level = -1.0;
    if (const auto* ba = std::get_if<Barrier>(&strategy))
        barrier_level = ba->q;

    MeanAccumulator acc;
    for (long path = 0; path < sim.n_paths; ++path) {
        PathRng rng(sim.seed, static_cast<std::uint64_t>(path));
        double s = t;
        double X = x;
        double disc = std::exp(-p.delta * t);
        double paid = 0.0; // int e^{-delta u} C_u du so far
        const double s_end = t + T;
        while (s < s_end) {
            const double c = dividend_rate(p, strategy, s, X);
            const double drift = p.mu - c;

            double h = sim.dt;
            if (sim.accelerate && !time_varying) {
                double dist = X;
                if (barrier_level > 0.0)
                    dist = std::min(dist, std::abs(X - barrier_level));
                h = safe_step(dist, p.sigma, sim.dt);
            }
            h = std::min(h, s_end - s);

            const double Xn = X + drift * h + p.sigma * std::sqrt(h) * rng.normal();
            const double decay = std::exp(-p.delta * h);
            paid += c * disc * (1.0 - decay) / p.delta;
            disc *= decay;
            s += h;
            if (Xn <= 0.0)
                break;
            if (sim.bridge_correction) {
                const double pc = std::exp(-2.0 * X * Xn / (p.sigma * p.sigma * h));
                if (rng.uniform() < pc)
                    break;
            }
            X = Xn;
        }
        acc.add(-std::expm1(-p.gamma * paid) / p.gamma);
    }
    est.mean = acc.mean();
    est.stderr_ = acc.stderr_();
    return est;
}

std::vector<McEstimate> estimate_moments(const ModelParams& p, double q, int n_max,
                                         const SimConfig& sim)
{
    if (n_max < 1)
        throw validation_error("n_max must be >= 1");
    const double payout_scale = p.xi / p.delta;
    const double T = sim.horizon > 0.0 ? sim.horizon
                                       : std::log(payout_scale / 1e-6) / p.delta;

    std::vector<MeanAccumulator> acc(n_max);
    for (long path = 0; path < sim.n_paths; ++path) {
        PathRng rng(sim.seed, static_cast<std::uint64_t>(path));
        double s = 0.0;
        double X = q;
        double disc = 1.0;
        double paid = 0.0;
        while (s < T && X > 0.0) {
            const double c = X > q ? p.xi : 0.0;
            const double drift = p.mu - c;
            double h = sim.dt;
            if (sim.accelerate) {
                const double dist = std::min(X, std::abs(X - q));
                h = safe_step(dist, p.sigma, sim.dt);
            }
            h = std::min(h, T - s);
            const double Xn = X + drift * h + p.sigma * std::sqrt(h) * rng.normal();
            const double decay = std::exp(-p.delta * h);
            paid += c * disc * (1.0 - decay) / p.delta;
            disc *= decay;
            s += h;
            if (Xn <= 0.0)
                break;
            if (sim.bridge_correction) {
                const double pc = std::exp(-2.0 * X * Xn / (p.sigma * p.sigma * h));
                if (rng.uniform() < pc)
                    break;
            }
            X = Xn;
        }
        const double v = p.capital_delta - p.gamma * paid;
        double pw = 1.0;
        for (int n = 0; n < n_max; ++n) {
            pw *= v;
            acc[n].add(pw);
        }
    }

    std::vector<McEstimate> out(n_max);
    for (int n = 0; n < n_max; ++n) {
        out[n].mean = acc[n].mean();
        out[n].stderr_ = acc[n].stderr_();
        out[n].n_paths = sim.n_paths;
        out[n].seed = sim.seed;
        out[n].dt = sim.dt;
        out[n].bias_budget = p.gamma * payout_scale * std::exp(-p.delta * T)
                                 * static_cast<double>(n + 1)
                                 * std::pow(p.capital_delta, n)
                           + p.gamma * p.xi * sim.dt;
    }
    return out;
}

double OccDrift::operator()(const DriftBand& band, double s, double x) const
{
    switch (kind) {
    case Kind::constant:
        return std::clamp(u, band.a, band.b);
    case Kind::bang_bang:
        return x > level ? band.a : band.b;
    case Kind::time_sine: {
        const double mid = 0.5 * (band.a + band.b);
        const double half = 0.5 * (band.b - band.a);
        return mid + half * std::sin(2.0 * M_PI * s / period);
    }
    }
    return band.a;
}

namespace {

// Shared engine: accumulates int e^{-disc s} 1{lo <= X <= hi} ds until ruin/horizon.
McEstimate occupation_engine(const DriftBand& band, const OccDrift& drift,
                             double lo, double hi, double x, const SimConfig& sim)
{
    if (x < 0.0)
        throw validation_error("occupation estimate requires x >= 0");
    if (!(band.discount > 0.0) && !(sim.horizon > 0.0))
        throw validation_error("zero discount requires an explicit horizon");

    const double T = sim.horizon > 0.0
        ? sim.horizon
        : std::log(1.0 / (band.discount * 1e-8)) / band.discount;

    McEstimate est;
    est.n_paths = sim.n_paths;
    est.seed = sim.seed;
    est.dt = sim.dt;
    est.bias_budget = band.discount > 0.0
        ? std::exp(-band.discount * T) / band.discount
        : 0.0;
    if (x == 0.0)
        return est;

    MeanAccumulator acc;
    for (long path = 0; path < sim.n_paths; ++path) {
        PathRng rng(sim.seed, static_cast<std::uint64_t>(path));
        double s = 0.0;
        double X = x;
        double disc = 1.0;
        double occ = 0.0;
        while (s < T) {
            const double u = drift(band, s, X);
            double h = sim.dt;
            if (sim.accelerate && drift.kind != OccDrift::Kind::time_sine) {
                const double dist =
                    std::min({X, std::abs(X - lo), std::abs(X - hi),
                              drift.kind == OccDrift::Kind::bang_bang
                                  ? std::abs(X - drift.level)
                                  : X});
                h = safe_step(dist, band.sigma, sim.dt);
            }
            h = std::min(h, T - s);
            if (X >= lo && X <= hi)
                occ += disc * (band.discount > 0.0
                                   ? -std::expm1(-band.discount * h) / band.discount
                                   : h);
            const double Xn = X + u * h + band.sigma * std::sqrt(h) * rng.normal();
            disc *= std::exp(-band.discount * h);
            s += h;
            if (Xn <= 0.0)
                break;
            if (sim.bridge_correction) {
                const double pc = std::exp(-2.0 * X * Xn / (band.sigma * band.sigma * h));
                if (rng.uniform() < pc)
                    break;
            }
            X = Xn;
        }
        acc.add(occ);
    }
    est.mean = acc.mean();
    est.stderr_ = acc.stderr_();
    return est;
}

} // namespace

McEstimate estimate_discounted_local_time(const DriftBand& band, const OccDrift& drift,
                                          double y, double eps, double x,
                                          const SimConfig& sim)
{
    if (!(y > 0.0) || !(eps > 0.0))
        throw validation_error("local time proxy requires y > 0, eps > 0");
    McEstimate est = occupation_engine(band, drift, y - eps, y + eps, x, sim);
    const double scale = band.sigma * band.sigma / (2.0 * eps);
    est.mean *= scale;
    est.stderr_ *= scale;
    est.bias_budget *= scale;
    return est;
}

McEstimate estimate_discounted_occupation(const DriftBand& band, const OccDrift& drift,
                                          double lo, double hi, double x,
                                          const SimConfig& sim)
{
    if (!(hi > lo))
        throw validation_error("occupation band requires lo < hi");
    return occupation_engine(band, drift, lo, hi, x, sim);
}

} // namespace divopt
