#include "divopt/occupation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace divopt {

namespace {

// Positive root of  (sigma^2/2) r^2 - m r - delta' = 0, i.e. (m + sqrt(m^2 + c)) / sigma^2
// with c = 2 delta' sigma^2, computed without cancellation for either sign of m.
double stable_plus(double m, double c, double sigma2)
{
    const double disc = std::sqrt(m * m + c);
    if (m >= 0.0)
        return (m + disc) / sigma2;
    return c == 0.0 ? 0.0 : c / ((disc - m) * sigma2);
}

} // namespace

OccupationKernel make_kernel(const DriftBand& band)
{
    if (!(band.sigma > 0.0))
        throw validation_error("sigma must be positive");
    if (band.a > band.b)
        throw validation_error("drift band requires a <= b");
    if (band.discount < 0.0)
        throw validation_error("discount must be >= 0");

    const double sigma2 = band.sigma * band.sigma;
    const double c = 2.0 * band.discount * sigma2;
    const double alpha = stable_plus(band.a, c, sigma2);
    const double beta_plus = stable_plus(-band.b, c, sigma2);
    // beta_+ beta_- = -c / sigma^4 (Vieta); fall back to the direct form when beta_+ = 0.
    const double beta_minus = beta_plus == 0.0
        ? (band.b > 0.0 ? -2.0 * band.b / sigma2 : 0.0)
        : -c / (sigma2 * sigma2 * beta_plus);
    return OccupationKernel{alpha, beta_plus, beta_minus, band};
}

double kernel_f(const OccupationKernel& k, double x, double y)
{
    if (x < 0.0 || y < 0.0)
        throw validation_error("kernel_f requires x, y >= 0");
    const double sigma2 = k.band.sigma * k.band.sigma;
    const double bp = k.beta_plus, bm = k.beta_minus, al = k.alpha;

    // Everything scaled by e^{-y beta_+} so no exponent is large and positive.
    const double denom = sigma2 * ((bp + al) - (bm + al) * std::exp((bm - bp) * y));
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw numeric_error("kernel singular");

    double num;
    if (y <= x)
        num = 2.0 * (1.0 - std::exp((bm - bp) * y)) * std::exp(-al * (x - y));
    else
        num = 2.0 * (std::exp(bp * (x - y)) - std::exp(bm * x - bp * y));
    return num / denom;
}

double kernel_f(const DriftBand& band, double x, double y)
{
    return kernel_f(make_kernel(band), x, y);
}

double kernel_f_n(const ModelParams& p, int n, double x, double y)
{
    if (x < 0.0 || y < 0.0)
        throw validation_error("kernel_f_n requires x, y >= 0");
    const RootSet r = roots(p, n);
    const double sigma2 = p.sigma * p.sigma;

    const double denom =
        sigma2 * ((r.theta - r.eta) - (r.zeta - r.eta) * std::exp((r.zeta - r.theta) * y));
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw numeric_error("kernel singular");

    double num;
    if (y <= x)
        num = 2.0 * (1.0 - std::exp((r.zeta - r.theta) * y)) * std::exp(r.eta * (x - y));
    else
        num = 2.0 * (std::exp(r.theta * (x - y)) - std::exp(r.zeta * x - r.theta * y));
    return num / denom;
}

double kernel_f_unbounded(double b, double sigma, double discount, double x, double y)
{
    if (x < 0.0 || y < 0.0)
        throw validation_error("kernel_f_unbounded requires x, y >= 0");
    const double sigma2 = sigma * sigma;
    const double c = 2.0 * discount * sigma2;
    const double bp = stable_plus(-b, c, sigma2);
    const double bm = bp == 0.0 ? (b > 0.0 ? -2.0 * b / sigma2 : 0.0)
                                : -c / (sigma2 * sigma2 * bp);

    const double denom = sigma2 * (bp - bm * std::exp((bm - bp) * y));
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw numeric_error("kernel singular");

    double num;
    if (y <= x)
        num = 2.0 * (1.0 - std::exp((bm - bp) * y));
    else
        num = 2.0 * (std::exp(bp * (x - y)) - std::exp(bm * x - bp * y));
    return num / denom;
}

IntegralResult integrate_bound(const OccupationKernel& k, const ExpSum& g,
                               double x, double lo, double hi)
{
    if (g.is_zero())
        return {0.0, 0.0};
    const double sigma2 = k.band.sigma * k.band.sigma;
    const double bp = k.beta_plus, bm = k.beta_minus, al = k.alpha;

    double tail_bound = 0.0;
    double hi_eff = hi;
    if (!std::isfinite(hi)) {
        const double r_max = g.max_rate();
        if (!(bp > r_max))
            throw numeric_error("integrand not integrable on [lo, inf)");
        // Beyond Y1 the denominator is at least half its leading term, giving the
        // majorant f(x,y) <= Cf e^{-beta_+ y}.
        double y1 = 0.0;
        if (bm + al != 0.0 && bp > bm)
            y1 = std::max(0.0, std::log(2.0 * std::abs(bm + al) / (bp + al)) / (bp - bm));
        const double cf = 4.0 * (std::exp(bp * x) - std::exp(bm * x)) / (sigma2 * (bp + al));
        double cut = std::max({y1, x, lo, 1.0});
        cut += (40.0 + std::log1p(g.abs_coef_sum() * std::max(cf, 1.0))) / (bp - r_max);
        for (const auto& t : g.terms)
            tail_bound += std::abs(t.coef) * cf * std::exp((t.rate - bp) * cut) / (bp - t.rate);
        hi_eff = cut;
    }
    if (!(hi_eff > lo))
        return {0.0, tail_bound};

    const auto regions = positive_regions(g, lo, hi_eff);
    double value = 0.0;
    double err = tail_bound;
    const auto integrand = [&](double y) { return g(y) * kernel_f(k, x, y); };
    for (auto [u, v] : regions) {
        // split at x: kernel_f has a kink there
        std::vector<std::pair<double, double>> pieces;
        if (u < x && x < v) {
            pieces.emplace_back(u, x);
            pieces.emplace_back(x, v);
        } else {
            pieces.emplace_back(u, v);
        }
        for (auto [a, b] : pieces) {
            double e = 0.0;
            value += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                integrand, a, b, 12, 1e-11, &e);
            err += e;
        }
    }
    return {value, err};
}

} // namespace divopt
