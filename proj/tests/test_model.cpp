#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "divopt/model.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace divopt;

namespace {
const ModelParams kP5 = make_params(0.15, 1.0, 0.05, 0.2, 1.0);
}

TEST_CASE("make_params validates and caches Delta")
{
    CHECK(kP5.capital_delta == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(make_params(0.15, 1.0, 0.05, 0.2, 0.15).capital_delta
          == doctest::Approx(0.6).epsilon(1e-14));

    CHECK_THROWS_AS(make_params(0.15, 0.0, 0.05, 0.2, 1.0), validation_error);
    CHECK_THROWS_AS(make_params(0.15, 1.0, -0.05, 0.2, 1.0), validation_error);
    CHECK_THROWS_AS(make_params(0.15, 1.0, 0.05, 0.0, 1.0), validation_error);
    CHECK_THROWS_AS(make_params(0.15, 1.0, 0.05, 0.2, -1.0), validation_error);

    try {
        make_params(0.15, 0.0, 0.05, 0.2, 1.0);
    } catch (const validation_error& e) {
        CHECK(std::string(e.what()).find("sigma") != std::string::npos);
    }
}

TEST_CASE("root residuals stay below 1e-10 for random parameters up to n = 50")
{
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> U(0.05, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const ModelParams p = make_params(U(gen) - 1.0, U(gen), U(gen), U(gen), U(gen));
        const double h = 0.5 * p.sigma * p.sigma;
        for (int n = 1; n <= 50; ++n) {
            const RootSet r = roots(p, n);
            const double tol = 1e-10 * (1.0 + p.delta * n);
            CHECK(std::abs(h * r.eta * r.eta + (p.mu - p.xi) * r.eta - p.delta * n) <= tol);
            CHECK(std::abs(h * r.theta * r.theta + p.mu * r.theta - p.delta * n) <= tol);
            CHECK(std::abs(h * r.zeta * r.zeta + p.mu * r.zeta - p.delta * n) <= tol);
            CHECK(r.eta < 0.0);
            CHECK(r.theta > 0.0);
            CHECK(r.zeta < 0.0);
            CHECK(r.rho > 0.0);
        }
    }
}

TEST_CASE("known root values and Vieta identities")
{
    const RootSet r1 = roots(kP5, 1);
    CHECK(r1.eta == doctest::Approx(-0.0569178573608527).epsilon(1e-10));
    CHECK(r1.theta * r1.zeta
          == doctest::Approx(-2.0 * kP5.delta / (kP5.sigma * kP5.sigma)).epsilon(1e-12));
    CHECK(r1.theta + r1.zeta
          == doctest::Approx(-2.0 * kP5.mu / (kP5.sigma * kP5.sigma)).epsilon(1e-12));

    // symmetric case xi = mu
    const ModelParams ps = make_params(0.4, 1.3, 0.07, 0.5, 0.4);
    for (int n : {1, 3, 9}) {
        const double expect = -std::sqrt(2.0 * ps.delta * n) / ps.sigma;
        CHECK(roots(ps, n).eta == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("eta_n ordering and normalized monotonicity")
{
    for (double xi : {0.1, 0.5, 1.0, 3.0}) {
        const ModelParams p = make_params(0.15, 1.0, 0.05, 0.2, xi);
        for (int n = 1; n < 30; ++n) {
            const double en = roots(p, n).eta;
            const double en1 = roots(p, n + 1).eta;
            CHECK(en1 < en);
            CHECK(en1 / (n + 1) > en / n);
            const double ratio = en1 * n / (en * (n + 1));
            CHECK(ratio > 0.0);
            CHECK(ratio < 1.0);
        }
    }
    // eta_n increasing in xi, and the normalized ratio increasing in xi
    for (int n : {1, 5, 20}) {
        double prev = -1e300, prev_ratio = -1.0;
        for (double xi : {0.1, 0.3, 1.0, 3.0, 10.0}) {
            const ModelParams p = make_params(0.15, 1.0, 0.05, 0.2, xi);
            const double en = roots(p, n).eta;
            CHECK(en > prev);
            prev = en;
            const double ratio = roots(p, n + 1).eta * n / (en * (n + 1));
            CHECK(ratio > prev_ratio);
            prev_ratio = ratio;
        }
    }
}

TEST_CASE("large-xi limit: xi * eta_n -> -delta n")
{
    const ModelParams p = make_params(0.15, 1.0, 0.05, 0.2, 1e6);
    for (int n : {1, 2, 10, 50}) {
        const double dn = p.delta * n;
        CHECK(std::abs(p.xi * roots(p, n).eta + dn) < 1e-3 * dn);
    }
}

TEST_CASE("1 + eta_n xi/(delta n) changes sign exactly once, at xi = delta n sigma^2/(2 mu)")
{
    const double mu = 0.15, sigma = 1.0, delta = 0.05;
    for (int n : {1, 2, 5}) {
        const double xi_star = delta * n * sigma * sigma / (2.0 * mu);
        int switches = 0;
        bool prev_nonneg = true;
        for (int i = 0; i <= 400; ++i) {
            const double xi = 1e-3 + i * 0.01;
            const ModelParams p = make_params(mu, sigma, delta, 0.2, xi);
            const bool nonneg = 1.0 + roots(p, n).eta * xi / (delta * n) >= 0.0;
            if (i > 0 && nonneg != prev_nonneg)
                ++switches;
            prev_nonneg = nonneg;
        }
        CHECK(switches == 1);

        const ModelParams lo = make_params(mu, sigma, delta, 0.2, xi_star * (1.0 - 1e-6));
        const ModelParams hi = make_params(mu, sigma, delta, 0.2, xi_star * (1.0 + 1e-6));
        CHECK(1.0 + roots(lo, n).eta * lo.xi / (delta * n) > 0.0);
        CHECK(1.0 + roots(hi, n).eta * hi.xi / (delta * n) < 0.0);
    }
}

TEST_CASE("utility values")
{
    CHECK(utility(kP5, 0.0) == 0.0);
    CHECK(utility(kP5, 1e9) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(utility(kP5, 20.0) == doctest::Approx(5.0 * (1.0 - std::exp(-4.0))).epsilon(1e-12));
}

TEST_CASE("constant-strategy optimality criterion")
{
    const OptimalityCheck a = is_constant_strategy_optimal(make_params(0.15, 1, 0.05, 0.2, 0.15));
    CHECK(a.applicable);
    CHECK(a.optimal);
    CHECK(a.threshold == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    const OptimalityCheck b = is_constant_strategy_optimal(kP5);
    CHECK(b.applicable);
    CHECK_FALSE(b.optimal);

    // boundary case included
    const OptimalityCheck c =
        is_constant_strategy_optimal(make_params(0.15, 1, 0.05, 0.2, 0.05 / (2.0 * 0.15)));
    CHECK(c.optimal);

    const OptimalityCheck d = is_constant_strategy_optimal(make_params(-0.1, 1, 0.05, 0.2, 1.0));
    CHECK_FALSE(d.applicable);
    CHECK(std::isnan(d.threshold));
}
