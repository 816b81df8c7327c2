#include "divopt/barrier.hpp"

#include "divopt/expsum.hpp"
#include "divopt/occupation.hpp"

#include <cmath>
#include <limits>

namespace divopt {

double default_barrier(const ModelParams& p)
{
    if (!(p.mu > 0.0))
        throw numeric_error("default_barrier inapplicable: requires mu > 0");
    const RootSet r1 = roots(p, 1);
    const double num = (-r1.zeta) * (r1.eta - r1.zeta);
    const double den = r1.theta * (r1.theta - r1.eta);
    if (!(num > 0.0) || !(den > 0.0))
        throw numeric_error("default_barrier inapplicable: degenerate roots");
    const double q = std::log(num / den) / (r1.theta - r1.zeta);
    return q > 0.0 ? q : 0.0;
}

CoefficientTable build_coefficients(const ModelParams& p, const BarrierConfig& cfg)
{
    if (cfg.N < 1)
        throw validation_error("N must be >= 1");
    if (!(cfg.q >= 0.0))
        throw validation_error("q must be >= 0");
    const int N = cfg.N;
    const double q = cfg.q;
    const double D = p.capital_delta;

    CoefficientTable tab;
    tab.q = q;
    tab.N = N;
    tab.eta.assign(N + 1, 0.0);
    tab.theta.assign(N + 2, 0.0);
    tab.zeta.assign(N + 2, 0.0);
    for (int k = 1; k <= N; ++k)
        tab.eta[k] = roots(p, k).eta;
    for (int n = 1; n <= N + 1; ++n) {
        const RootSet r = roots(p, n);
        tab.theta[n] = r.theta;
        tab.zeta[n] = r.zeta;
    }

    // fac[m] = (-Delta)^m / m!
    std::vector<double> fac(N + 1);
    fac[0] = 1.0;
    for (int m = 1; m <= N; ++m)
        fac[m] = fac[m - 1] * (-D) / static_cast<double>(m);

    tab.A.assign(N + 1, {});
    tab.D.assign(N + 1, 0.0);
    tab.nu.assign(N + 1, 0.0);
    for (int n = 1; n <= N; ++n) {
        auto& An = tab.A[n];
        An.assign(n + 1, 0.0);
        An[0] = -fac[n] / p.gamma;
        for (int k = 1; k < n; ++k)
            An[k] = fac[n - k] * tab.A[k][k];

        double sum_rest = 0.0;
        if (q == 0.0) {
            // nu -> +inf limit of the smooth-fit ratio
            tab.nu[n] = std::numeric_limits<double>::infinity();
            for (int k = 0; k < n; ++k)
                sum_rest += An[k];
            An[n] = -sum_rest;
        } else {
            const double et = std::exp(tab.theta[n] * q);
            const double ez = std::exp(tab.zeta[n] * q);
            const double nu = (tab.theta[n] * et - tab.zeta[n] * ez) / (et - ez);
            tab.nu[n] = nu;
            double num = 0.0;
            for (int k = 0; k < n; ++k)
                num += (nu - tab.eta[k]) * An[k];
            An[n] = num / (tab.eta[n] - nu);
        }
        for (int k = 0; k <= n; ++k) {
            if (!std::isfinite(An[k]))
                throw numeric_error("coefficient overflow in barrier table");
            tab.D[n] += An[k];
        }
    }
    return tab;
}

namespace {

// (e^{theta x} - e^{zeta x}) / (e^{theta q} - e^{zeta q}) and its x-derivative
double ratio_G(const CoefficientTable& tab, int n, double x)
{
    const double dq = std::exp(tab.theta[n] * tab.q) - std::exp(tab.zeta[n] * tab.q);
    return (std::exp(tab.theta[n] * x) - std::exp(tab.zeta[n] * x)) / dq;
}

double ratio_G_x(const CoefficientTable& tab, int n, double x)
{
    const double dq = std::exp(tab.theta[n] * tab.q) - std::exp(tab.zeta[n] * tab.q);
    return (tab.theta[n] * std::exp(tab.theta[n] * x)
            - tab.zeta[n] * std::exp(tab.zeta[n] * x)) / dq;
}

} // namespace

double barrier_F(const ModelParams& p, const CoefficientTable& tab, double t, double x)
{
    const double s = std::exp(-p.delta * t);
    double sn = 1.0;
    double total = 0.0;
    for (int n = 1; n <= tab.N; ++n) {
        sn *= s;
        double inner = 0.0;
        for (int k = 0; k <= n; ++k)
            inner += tab.A[n][k] * std::exp(tab.eta[k] * (x - tab.q));
        total += sn * inner;
    }
    return total;
}

double barrier_F_x(const ModelParams& p, const CoefficientTable& tab, double t, double x)
{
    const double s = std::exp(-p.delta * t);
    double sn = 1.0;
    double total = 0.0;
    for (int n = 1; n <= tab.N; ++n) {
        sn *= s;
        double inner = 0.0;
        for (int k = 1; k <= n; ++k)
            inner += tab.A[n][k] * tab.eta[k] * std::exp(tab.eta[k] * (x - tab.q));
        total += sn * inner;
    }
    return total;
}

double barrier_G(const ModelParams& p, const CoefficientTable& tab, double t, double x)
{
    if (tab.q == 0.0)
        return 0.0;
    const double s = std::exp(-p.delta * t);
    double sn = 1.0;
    double total = 0.0;
    for (int n = 1; n <= tab.N; ++n) {
        sn *= s;
        total += sn * tab.D[n] * ratio_G(tab, n, x);
    }
    return total;
}

double barrier_G_x(const ModelParams& p, const CoefficientTable& tab, double t, double x)
{
    if (tab.q == 0.0)
        return 0.0;
    const double s = std::exp(-p.delta * t);
    double sn = 1.0;
    double total = 0.0;
    for (int n = 1; n <= tab.N; ++n) {
        sn *= s;
        total += sn * tab.D[n] * ratio_G_x(tab, n, x);
    }
    return total;
}

double v_approx(const ModelParams& p, const CoefficientTable& tab, double t, double x)
{
    return x >= tab.q ? barrier_F(p, tab, t, x) : barrier_G(p, tab, t, x);
}

double psi_N(const ModelParams& p, const CoefficientTable& tab, double t, double x)
{
    const double s = std::exp(-p.delta * t);
    if (x >= tab.q)
        return -barrier_F_x(p, tab, t, x) + s * (1.0 - p.gamma * barrier_F(p, tab, t, x));
    return -barrier_G_x(p, tab, t, x) + s * (1.0 - p.gamma * barrier_G(p, tab, t, x));
}

ResidualPair residual_lemma_check(const ModelParams& p, const CoefficientTable& tab,
                                  double t, double x)
{
    const double ht = 1e-5 * (1.0 + std::abs(t));
    const double hx = 1e-5 * (1.0 + std::abs(x));
    const double s = std::exp(-p.delta * t);
    const double half_s2 = 0.5 * p.sigma * p.sigma;

    const auto d_t = [&](auto&& f) { return (f(t + ht, x) - f(t - ht, x)) / (2.0 * ht); };
    const auto d_x = [&](auto&& f) { return (f(t, x + hx) - f(t, x - hx)) / (2.0 * hx); };
    const auto d_xx = [&](auto&& f) {
        return (f(t, x + hx) - 2.0 * f(t, x) + f(t, x - hx)) / (hx * hx);
    };

    const auto G = [&](double tt, double xx) { return barrier_G(p, tab, tt, xx); };
    const auto F = [&](double tt, double xx) { return barrier_F(p, tab, tt, xx); };

    const double below = d_t(G) + p.mu * d_x(G) + half_s2 * d_xx(G);

    const double psiF = -barrier_F_x(p, tab, t, x)
                      + s * (1.0 - p.gamma * barrier_F(p, tab, t, x));
    double err_term = 0.0;
    for (int k = 0; k <= tab.N; ++k)
        err_term += tab.A[tab.N][k] * std::exp(tab.eta[k] * (x - tab.q));
    err_term *= -std::pow(s, tab.N + 1) * p.xi * p.gamma;

    const double above =
        d_t(F) + p.mu * d_x(F) + half_s2 * d_xx(F) + p.xi * psiF - err_term;
    return {below, above};
}

BarrierBound goodness_barrier(const ModelParams& p, const CoefficientTable& tab,
                              double t, double x)
{
    BarrierBound out;
    if (x == 0.0)
        return out;
    // q = 0 in the optimal regime: the strategy is the constant payout, which
    // is the value function itself; only the approximation error remains.
    if (tab.q == 0.0) {
        const OptimalityCheck oc = is_constant_strategy_optimal(p);
        if (oc.applicable && oc.optimal) {
            out.approx = approx_error(p, tab, t, x);
            return out;
        }
    }
    const double s = std::exp(-p.delta * t);
    const int N = tab.N;

    double sn = 1.0;
    for (int n = 1; n <= N + 1; ++n) {
        sn *= s;
        const OccupationKernel kn =
            make_kernel({p.mu - p.xi, p.mu, p.sigma, p.delta * static_cast<double>(n)});

        // error for paying above the barrier: coefficient of s^n in -psi^N (F branch),
        // term-wise positive part
        ExpSum above;
        if (n <= N)
            for (int k = 0; k <= n; ++k)
                above.add_shifted(tab.eta[k] * tab.A[n][k], tab.eta[k], tab.q);
        if (n >= 2)
            for (int k = 0; k <= n - 1; ++k)
                above.add_shifted(p.gamma * tab.A[n - 1][k], tab.eta[k], tab.q);
        if (n == 1)
            above.terms.push_back({-1.0, 0.0});
        const IntegralResult ia = integrate_bound(kn, above, x, tab.q, INFINITY);
        out.above += p.xi * sn * ia.value;
        out.quadrature_error += p.xi * sn * ia.error;

        // error for withholding below the barrier: coefficient of s^n in +psi^N (G branch)
        if (tab.q > 0.0) {
            ExpSum below;
            if (n <= N) {
                const double dq = std::exp(tab.theta[n] * tab.q) - std::exp(tab.zeta[n] * tab.q);
                below.terms.push_back({-tab.D[n] * tab.theta[n] / dq, tab.theta[n]});
                below.terms.push_back({tab.D[n] * tab.zeta[n] / dq, tab.zeta[n]});
            }
            if (n == 1)
                below.terms.push_back({1.0, 0.0});
            if (n >= 2) {
                const int m = n - 1;
                const double dq = std::exp(tab.theta[m] * tab.q) - std::exp(tab.zeta[m] * tab.q);
                below.terms.push_back({-p.gamma * tab.D[m] / dq, tab.theta[m]});
                below.terms.push_back({p.gamma * tab.D[m] / dq, tab.zeta[m]});
            }
            const IntegralResult ib = integrate_bound(kn, below, x, 0.0, tab.q);
            out.below += p.xi * sn * ib.value;
            out.quadrature_error += p.xi * sn * ib.error;
        }
    }

    out.approx = approx_error(p, tab, t, x);
    return out;
}

double approx_error(const ModelParams& p, const CoefficientTable& tab, double t, double x)
{
    if (x == 0.0)
        return 0.0;
    const double s = std::exp(-p.delta * t);
    ExpSum g;
    for (int k = 0; k <= tab.N; ++k)
        g.add_shifted(std::abs(tab.A[tab.N][k]), tab.eta[k], tab.q);
    const OccupationKernel k =
        make_kernel({p.mu - p.xi, p.mu, p.sigma, p.delta * static_cast<double>(tab.N + 1)});
    const IntegralResult r = integrate_bound(k, g, x, tab.q, INFINITY);
    return std::pow(s, tab.N + 1) * p.xi * p.gamma * (r.value + r.error);
}

} // namespace divopt
