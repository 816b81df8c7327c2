#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "divopt/barrier.hpp"
#include "divopt/free_boundary.hpp"
#include "divopt/series.hpp"

#include <cmath>
#include <vector>

using namespace divopt;

namespace {

// convergent configuration used throughout: small cap, comfortably suboptimal
const ModelParams kSmall = make_params(0.3, 1.0, 0.05, 0.2, 0.2);
const ModelParams kP5 = make_params(0.15, 1.0, 0.05, 0.2, 1.0);

// Oracle for the Leibniz table: coefficients of e^{r alpha(s)} in s via plain
// polynomial exponentiation, alpha(s) = sum_m a_m s^m / m!.
std::vector<double> exp_series(double r, const std::vector<double>& a, int M)
{
    std::vector<long double> P(M + 1, 0.0L); // r * (alpha - a_0), no constant term
    long double fm = 1.0L;
    for (int m = 1; m <= M && m < static_cast<int>(a.size()); ++m) {
        fm *= m;
        P[m] = static_cast<long double>(r) * static_cast<long double>(a[m]) / fm;
    }
    std::vector<long double> acc(M + 1, 0.0L), pw(M + 1, 0.0L);
    acc[0] = 1.0L;
    pw[0] = 1.0L;
    long double jf = 1.0L;
    for (int j = 1; j <= M; ++j) {
        jf *= j;
        std::vector<long double> nxt(M + 1, 0.0L);
        for (int u = 0; u <= M; ++u)
            for (int v = 1; u + v <= M; ++v)
                nxt[u + v] += pw[u] * P[v];
        pw = nxt;
        for (int m = 0; m <= M; ++m)
            acc[m] += pw[m] / jf;
    }
    const long double e0 = std::exp(static_cast<long double>(r) * a[0]);
    std::vector<double> out(M + 1);
    for (int m = 0; m <= M; ++m)
        out[m] = static_cast<double>(e0 * acc[m]);
    return out;
}

} // namespace

TEST_CASE("order-1 closed form")
{
    const FreeBoundarySolution sol = solve_free_boundary(kSmall, 1);
    REQUIRE(sol.solved == 1);

    const RootSet r1 = roots(kSmall, 1);
    // determinant condition e^{(theta - zeta) a0} = zeta (eta - zeta) / (theta (eta - theta))
    const double rhs = (-r1.zeta) * (r1.eta - r1.zeta) / (r1.theta * (r1.theta - r1.eta));
    const double a0 = std::log(rhs) / (r1.theta - r1.zeta);
    CHECK(sol.a[0] == doctest::Approx(a0).epsilon(1e-9));
    // value match at the barrier, order s^1: Delta/gamma + J_1 e^{eta a0}
    // equals L_1 (e^{theta a0} - e^{zeta a0})
    CHECK(kSmall.capital_delta / kSmall.gamma + sol.J[1] * std::exp(r1.eta * a0)
          == doctest::Approx(sol.L[1]
                             * (std::exp(r1.theta * a0) - std::exp(r1.zeta * a0)))
                 .epsilon(1e-9));
}

TEST_CASE("Leibniz tables match independent series exponentiation")
{
    const int K = 8;
    const FreeBoundarySolution sol = solve_free_boundary(kSmall, K);
    REQUIRE(sol.solved == K);
    for (int n = 1; n <= K; ++n) {
        const RootSet rn = roots(kSmall, n);
        const auto eb = exp_series(rn.eta, sol.a, K - n);
        const auto ep = exp_series(rn.theta, sol.a, K - n);
        const auto eq = exp_series(rn.zeta, sol.a, K - n);
        // tables hold Taylor derivatives: m! times the series coefficient
        double mf = 1.0;
        for (int m = 0; m <= K - n; ++m) {
            if (m > 0)
                mf *= m;
            CHECK(sol.b[n][m] == doctest::Approx(mf * eb[m]).epsilon(1e-9));
            CHECK(sol.p[n][m] == doctest::Approx(mf * ep[m]).epsilon(1e-9));
            CHECK(sol.q[n][m] == doctest::Approx(mf * eq[m]).epsilon(1e-9));
        }
    }
}

TEST_CASE("residuals meet the solver tolerance")
{
    const FreeBoundarySolution sol = solve_free_boundary(kSmall, 10, 1e-11);
    REQUIRE(sol.solved == 10);
    for (int k = 1; k <= sol.solved; ++k)
        CHECK(sol.residuals[k - 1] <= 1e-9);
    CHECK_FALSE(sol.diverged);
}

TEST_CASE("smooth-fit mismatch at the barrier shrinks with the order")
{
    double prev = 1e300;
    for (int K : {4, 8, 12}) {
        const FreeBoundarySolution sol = solve_free_boundary(kSmall, K);
        REQUIRE(sol.solved == K);
        const double t = 0.0;
        const FreeBoundaryValue at = eval_solution(sol, kSmall, t, std::max(sol.a[0], 0.0));
        const double h = 1e-6;
        const double xq = std::max(at.alpha, h);
        const double dh = (eval_solution(sol, kSmall, t, xq + h).value
                           - eval_solution(sol, kSmall, t, xq).value) / h;
        const double dg = (eval_solution(sol, kSmall, t, xq).value
                           - eval_solution(sol, kSmall, t, xq - h).value) / h;
        const double mismatch = std::abs(dh - dg);
        CHECK(mismatch <= prev + 1e-9);
        prev = mismatch;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("candidate value dominates the constant strategy where defined")
{
    const FreeBoundarySolution sol = solve_free_boundary(kSmall, 12);
    REQUIRE(sol.solved == 12);
    const TruncationConfig tc;
    for (double t : {0.0, 1.0, 5.0}) {
        for (double x = 0.0; x <= 10.0; x += 0.5) {
            const FreeBoundaryValue v = eval_solution(sol, kSmall, t, x);
            CHECK(v.value >= v_xi(kSmall, tc, t, x).value - 1e-3);
        }
    }
    // barrier level starts below zero for this configuration and rises to a_0
    const double al0 = eval_solution(sol, kSmall, 0.0, 1.0).alpha;
    CHECK(al0 < eval_solution(sol, kSmall, 50.0, 1.0).alpha + 1e-12);
    CHECK(eval_solution(sol, kSmall, 1e4, 1.0).alpha
          == doctest::Approx(sol.a[0]).epsilon(1e-8));
}

TEST_CASE("g branch vanishes at x = 0")
{
    const FreeBoundarySolution sol = solve_free_boundary(kSmall, 8);
    for (double t : {0.0, 2.0}) {
        const FreeBoundaryValue v = eval_solution(sol, kSmall, t, 0.0);
        if (!v.above)
            CHECK(std::abs(v.value) <= 1e-12);
    }
}

TEST_CASE("blow-up is flagged for the large-cap configuration")
{
    const FreeBoundarySolution sol = solve_free_boundary(kP5, 12);
    CHECK(sol.diverged);
    CHECK(sol.divergence_order >= 2);
    CHECK(sol.divergence_order <= 12);
    CHECK(sol.solved >= 1);
}

TEST_CASE("evaluation rejects invalid arguments")
{
    const FreeBoundarySolution sol = solve_free_boundary(kSmall, 4);
    CHECK_THROWS_AS(eval_solution(sol, kSmall, -1.0, 1.0), validation_error);
    CHECK_THROWS_AS(eval_solution(sol, kSmall, 1.0, -1.0), validation_error);
    FreeBoundarySolution empty;
    CHECK_THROWS_AS(eval_solution(empty, kSmall, 0.0, 1.0), numeric_error);
}
