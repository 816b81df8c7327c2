#include "divopt/series.hpp"

#include <cmath>
#include <vector>

namespace divopt {

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v)
    {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// Smallest N <= n_max with (Delta^{N+1}/(N+1)!) e^{Delta} * scale < tol.
int choose_truncation(double capital_delta, double scale, double tol, int n_max)
{
    const double boost = std::exp(capital_delta) * scale;
    double term = capital_delta; // Delta^{N+1}/(N+1)! at N=0
    for (int N = 0; N <= n_max; ++N) {
        if (term * boost < tol)
            return N;
        term *= capital_delta / static_cast<double>(N + 2);
    }
    throw numeric_error("truncation failure: tail tolerance unreachable within n_max");
}

} // namespace

SeriesValue v_xi(const ModelParams& p, const TruncationConfig& tc, double t, double x)
{
    const double s = std::exp(-p.delta * t);
    const double D = p.capital_delta;
    const int N = choose_truncation(D, 1.0 / p.gamma, tc.tail_tol, tc.n_max);

    const double pref = std::exp(-D * s);
    KahanSum acc;
    double coef = 1.0; // (D s)^n / n!
    for (int n = 1; n <= N; ++n) {
        coef *= D * s / static_cast<double>(n);
        acc.add(coef * std::exp(roots(p, n).eta * x));
    }
    const double value = (1.0 - pref) / p.gamma - pref * acc.sum / p.gamma;

    double tail = 1.0;
    for (int n = 1; n <= N + 1; ++n)
        tail *= D / static_cast<double>(n);
    tail *= pref * std::exp(D) / p.gamma;
    return {value, N, tail};
}

SeriesValue v_xi_dx(const ModelParams& p, const TruncationConfig& tc, double t, double x)
{
    const double s = std::exp(-p.delta * t);
    const double D = p.capital_delta;

    // Terms carry a factor |eta_n| <= |eta_N| n/N for n > N (|eta_n|/n decreases),
    // so first pick N for the bare series, then inflate the tail accordingly.
    const int N = choose_truncation(D, 1.0 / p.gamma, tc.tail_tol, tc.n_max);

    const double pref = std::exp(-D * s);
    KahanSum acc;
    double coef = 1.0;
    double abs_eta_N = 0.0;
    for (int n = 1; n <= N; ++n) {
        coef *= D * s / static_cast<double>(n);
        const double eta = roots(p, n).eta;
        abs_eta_N = -eta;
        acc.add(coef * (-eta) * std::exp(eta * x));
    }
    const double value = pref * acc.sum / p.gamma;

    double tail = 1.0; // Delta^N / N!
    for (int n = 1; n <= N; ++n)
        tail *= D / static_cast<double>(n);
    tail *= pref * std::exp(D) / p.gamma * D * abs_eta_N / static_cast<double>(N);
    return {value, N, tail};
}

SeriesValue psi(const ModelParams& p, const TruncationConfig& tc, double s, double x)
{
    if (s < 0.0 || s > 1.0)
        throw validation_error("psi: s must lie in [0,1]");
    const double D = p.capital_delta;
    const double c1 = -roots(p, 1).eta * p.xi / p.delta;
    const int N = choose_truncation(D, 1.0 + c1, tc.tail_tol, tc.n_max);

    KahanSum acc;
    double coef = 1.0; // s^n Delta^n / n!
    double eta_prev = 0.0; // eta_0 = 0
    for (int n = 0; n <= N; ++n) {
        if (n > 0)
            coef *= D * s / static_cast<double>(n);
        const double eta_next = roots(p, n + 1).eta;
        const double term = eta_next * p.xi / (p.delta * static_cast<double>(n + 1))
                              * std::exp(eta_next * x)
                          + std::exp(eta_prev * x);
        acc.add(coef * term);
        eta_prev = eta_next;
    }

    double tail = 1.0;
    for (int n = 1; n <= N + 1; ++n)
        tail *= D / static_cast<double>(n);
    tail *= (1.0 + c1) * std::exp(D);
    return {acc.sum, N, tail};
}

double value_limit(const ModelParams& p, double t)
{
    return utility(p, p.xi / p.delta * std::exp(-p.delta * t));
}

} // namespace divopt
