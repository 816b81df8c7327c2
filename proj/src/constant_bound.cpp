#include "divopt/constant_bound.hpp"

#include "divopt/occupation.hpp"

#include <cmath>

namespace divopt {

GoodnessBound goodness_constant(const ModelParams& p, const TruncationConfig& tc,
                                double t, double x)
{
    GoodnessBound out;
    if (x == 0.0)
        return out; // f_n(0, y) = 0 for every n

    const double s = std::exp(-p.delta * t);
    const double D = p.capital_delta;
    const double pref = p.xi * s * std::exp(-D * s);

    // Crude per-term majorant: the integral of term n is at most c_1 * K(x) where
    // K(x) = int f_1(x,y) dy and c_n = |eta_n| xi / (delta n) <= c_1 (|eta_n|/n decreases).
    const double c1 = -roots(p, 1).eta * p.xi / p.delta;
    if (c1 <= 1.0)
        return out; // c_n <= c_1 <= 1: every positive part vanishes, the bound is 0
    const OccupationKernel k1 = make_kernel({p.mu - p.xi, p.mu, p.sigma, p.delta});
    ExpSum one;
    one.terms.push_back({1.0, 0.0});
    const IntegralResult kx = integrate_bound(k1, one, x, 0.0, INFINITY);
    const double term_cap = c1 * (kx.value + kx.error);

    double coef = 1.0; // s^n D^n / n!
    double fact = 1.0; // D^n / n!
    for (int n = 0;; ++n) {
        if (n > 0) {
            coef *= D * s / static_cast<double>(n);
            fact *= D / static_cast<double>(n);
        }

        // remaining-tail majorant: sum_{m>n} D^m/m! <= D^{n+1}/(n+1)! e^D
        double tail = pref * term_cap * fact * D / static_cast<double>(n + 1) * std::exp(D);
        if (tail < tc.tail_tol || n >= tc.n_max) {
            if (n >= tc.n_max && tail >= tc.tail_tol)
                throw numeric_error("truncation failure: tail tolerance unreachable within n_max");
            out.tail_bound = tail;
            out.terms_used = n;
            break;
        }

        const RootSet rn1 = roots(p, n + 1);
        const double c = -rn1.eta * p.xi / (p.delta * static_cast<double>(n + 1));
        if (c <= 1.0)
            continue; // integrand has no positive part

        const double eta_n = n == 0 ? 0.0 : roots(p, n).eta;
        const double y_star = std::log(c) / (eta_n - rn1.eta);

        ExpSum g;
        g.terms.push_back({c, rn1.eta});
        g.terms.push_back({-1.0, eta_n});
        const OccupationKernel kn =
            make_kernel({p.mu - p.xi, p.mu, p.sigma, p.delta * static_cast<double>(n + 1)});
        const IntegralResult in = integrate_bound(kn, g, x, 0.0, y_star);
        out.value += pref * coef * in.value;
        out.quadrature_error += pref * coef * in.error;
    }
    return out;
}

} // namespace divopt
