#include "divopt/free_boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace divopt {

namespace {

constexpr double kMagnitudeLimit = 1e8;
constexpr int kBadRatioRun = 2;
constexpr double kBadRatio = 1.2;

struct StepState {
    const ModelParams& par;
    int K;
    std::vector<double> eta, theta, zeta;     // [1..K]
    std::vector<std::vector<double>> binom;   // Pascal triangle
    std::vector<double> fact;                 // m!
    std::vector<double> negD;                 // (-Delta)^m / m!
    std::vector<double> J, L, a;              // accepted coefficients

    explicit StepState(const ModelParams& p, int K_) : par(p), K(K_)
    {
        eta.assign(K + 1, 0.0);
        theta.assign(K + 1, 0.0);
        zeta.assign(K + 1, 0.0);
        for (int n = 1; n <= K; ++n) {
            const RootSet r = roots(p, n);
            eta[n] = r.eta;
            theta[n] = r.theta;
            zeta[n] = r.zeta;
        }
        binom.assign(K + 1, {});
        for (int m = 0; m <= K; ++m) {
            binom[m].assign(m + 1, 1.0);
            for (int j = 1; j < m; ++j)
                binom[m][j] = binom[m - 1][j - 1] + binom[m - 1][j];
        }
        fact.assign(K + 1, 1.0);
        negD.assign(K + 1, 1.0);
        for (int m = 1; m <= K; ++m) {
            fact[m] = fact[m - 1] * m;
            negD[m] = negD[m - 1] * (-p.capital_delta) / m;
        }
        J.assign(K + 1, 0.0);
        L.assign(K + 1, 0.0);
        a.assign(K, 0.0);
    }

    // coefficients c with e^{r alpha(t)} = sum_m c[m]/m! e^{-delta t m},
    // built from the Leibniz recursion; needs a[0..M]
    std::vector<double> stream(double r, int M, const std::vector<double>& av) const
    {
        std::vector<double> c(M + 1);
        c[0] = std::exp(r * av[0]);
        for (int m = 0; m < M; ++m) {
            double s = 0.0;
            for (int j = 0; j <= m; ++j)
                s += binom[m][j] * av[m - j + 1] * c[j];
            c[m + 1] = r * s;
        }
        return c;
    }

    // Matching residuals at order k with trial values (J_k, L_k, a_{k-1}).
    // scale collects the magnitudes entering the balance, for a relative test.
    void residual(int k, const double* u, double R[3], double& scale) const
    {
        std::vector<double> Jt = J, Lt = L, at = a;
        Jt[k] = u[0];
        Lt[k] = u[1];
        at[k - 1] = u[2];

        std::vector<std::vector<double>> bt(k + 1), pt(k + 1), qt(k + 1);
        for (int n = 1; n <= k; ++n) {
            bt[n] = stream(eta[n], k - n, at);
            pt[n] = stream(theta[n], k - n, at);
            qt[n] = stream(zeta[n], k - n, at);
        }

        scale = 1.0;
        for (int m = 1; m <= 3; ++m) {
            double Z = 0.0;
            for (int j = 1; j <= k; ++j) {
                double X = 0.0;
                for (int n = 1; n <= j; ++n)
                    X += Jt[n] * std::pow(eta[n], m - 1) * bt[n][j - n] / fact[j - n];
                Z += negD[k - j] * X;
            }
            double Y = 0.0;
            for (int n = 1; n <= k; ++n)
                Y += Lt[n]
                   * (std::pow(theta[n], m - 1) * pt[n][k - n]
                      - std::pow(zeta[n], m - 1) * qt[n][k - n])
                   / fact[k - n];
            R[m - 1] = Y - Z;
            if (m == 1)
                R[0] += negD[k] / par.gamma;
            scale = std::max(scale, std::abs(Y) + std::abs(Z));
        }
    }
};

bool solve3(const double Jm[3][3], const double r[3], double d[3])
{
    double m[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            m[i][j] = Jm[i][j];
        m[i][3] = -r[i];
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int i = c + 1; i < 3; ++i)
            if (std::abs(m[i][c]) > std::abs(m[piv][c]))
                piv = i;
        if (std::abs(m[piv][c]) < 1e-300)
            return false;
        if (piv != c)
            for (int j = c; j < 4; ++j)
                std::swap(m[c][j], m[piv][j]);
        for (int i = c + 1; i < 3; ++i) {
            const double f = m[i][c] / m[c][c];
            for (int j = c; j < 4; ++j)
                m[i][j] -= f * m[c][j];
        }
    }
    for (int i = 2; i >= 0; --i) {
        double s = m[i][3];
        for (int j = i + 1; j < 3; ++j)
            s -= m[i][j] * d[j];
        d[i] = s / m[i][i];
    }
    return std::isfinite(d[0]) && std::isfinite(d[1]) && std::isfinite(d[2]);
}

double max_abs3(const double r[3])
{
    return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

// Safeguarded Newton on the order-k system; returns the achieved relative
// residual, or a quiet NaN on failure.
double newton_step(const StepState& st, int k, double u[3], double tol)
{
    double R[3], scale;
    st.residual(k, u, R, scale);
    double best = max_abs3(R) / scale;
    for (int it = 0; it < 60 && best > tol; ++it) {
        double Jm[3][3];
        for (int c = 0; c < 3; ++c) {
            const double h = 1e-7 * (1.0 + std::abs(u[c]));
            double up[3] = {u[0], u[1], u[2]};
            up[c] += h;
            double Rp[3], sp;
            st.residual(k, up, Rp, sp);
            for (int r = 0; r < 3; ++r)
                Jm[r][c] = (Rp[r] - R[r]) / h;
        }
        double d[3];
        if (!solve3(Jm, R, d))
            return std::numeric_limits<double>::quiet_NaN();
        bool improved = false;
        for (double lam = 1.0; lam > 1e-7; lam *= 0.5) {
            double ut[3] = {u[0] + lam * d[0], u[1] + lam * d[1], u[2] + lam * d[2]};
            double Rt[3], stc;
            st.residual(k, ut, Rt, stc);
            const double cand = max_abs3(Rt) / stc;
            if (cand < best) {
                best = cand;
                u[0] = ut[0];
                u[1] = ut[1];
                u[2] = ut[2];
                R[0] = Rt[0];
                R[1] = Rt[1];
                R[2] = Rt[2];
                improved = true;
                break;
            }
        }
        if (!improved)
            break;
    }
    return best;
}

} // namespace

FreeBoundarySolution solve_free_boundary(const ModelParams& params, int K, double solver_tol)
{
    if (K < 1)
        throw validation_error("K must be >= 1");
    if (!(params.mu > 0.0))
        throw numeric_error("free boundary inapplicable: requires mu > 0");

    StepState st(params, K);
    FreeBoundarySolution sol;
    sol.K = K;
    sol.residuals.assign(K + 1, 0.0);

    double prev_mag = 0.0, peak_mag = 0.0, fac = 1.0;
    int bad_run = 0;

    for (int k = 1; k <= K; ++k) {
        double u[3] = {0.0, 0.0, 0.0};
        if (k == 1) {
            // closed-form start: the k=1 system pins alpha(0) at the level
            // where the two homogeneous derivative matches become dependent
            const double et = st.eta[1], th = st.theta[1], ze = st.zeta[1];
            const double a0 = std::log(ze * (et - ze) / (th * (et - th))) / (th - ze);
            const double eth = std::exp(th * a0), eze = std::exp(ze * a0);
            const double L1 = (params.capital_delta / params.gamma)
                            / ((eth - eze) - (th * eth - ze * eze) / et);
            const double J1 = L1 * (th * eth - ze * eze) / (et * std::exp(et * a0));
            u[0] = J1;
            u[1] = L1;
            u[2] = a0;
        }

        const double res = newton_step(st, k, u, solver_tol);
        // compare coefficients on the scale they enter the series at s = 1:
        // J_k and L_k directly, a_{k-1} divided by (k-1)!
        const double mag = std::max({std::abs(u[0]), std::abs(u[1]), std::abs(u[2]) / fac});
        fac *= k;
        const bool step_ok = std::isfinite(res) && res <= 100.0 * solver_tol
                          && std::isfinite(mag) && mag < kMagnitudeLimit;
        if (!step_ok) {
            sol.diverged = true;
            sol.divergence_order = k;
            break;
        }

        st.J[k] = u[0];
        st.L[k] = u[1];
        st.a[k - 1] = u[2];
        sol.residuals[k] = res;
        sol.solved = k;

        // growth of successive magnitudes signals a blow-up of the recursion;
        // rises deep below the running peak are numerical noise, not growth
        peak_mag = std::max(peak_mag, mag);
        if (k > 1) {
            const double ratio = mag / std::max(prev_mag, 1e-300);
            const bool significant = mag > 1e-3 * peak_mag;
            bad_run = (ratio > kBadRatio && significant) ? bad_run + 1 : 0;
            if (bad_run >= kBadRatioRun) {
                sol.diverged = true;
                sol.divergence_order = k;
                break;
            }
        }
        prev_mag = std::max(mag, 1e-300);
    }

    const int M = sol.solved;
    sol.J.assign(st.J.begin(), st.J.begin() + M + 1);
    sol.L.assign(st.L.begin(), st.L.begin() + M + 1);
    sol.a.assign(st.a.begin(), st.a.begin() + std::max(M, 0));
    sol.b.assign(M + 1, {});
    sol.p.assign(M + 1, {});
    sol.q.assign(M + 1, {});
    if (M >= 1) {
        std::vector<double> av(st.a.begin(), st.a.begin() + M);
        for (int n = 1; n <= M; ++n) {
            sol.b[n] = st.stream(st.eta[n], M - n, av);
            sol.p[n] = st.stream(st.theta[n], M - n, av);
            sol.q[n] = st.stream(st.zeta[n], M - n, av);
        }
    }
    sol.residuals.resize(M + 1);
    return sol;
}

FreeBoundaryValue eval_solution(const FreeBoundarySolution& sol, const ModelParams& params,
                                double t, double x)
{
    if (sol.solved < 1)
        throw numeric_error("free boundary solution has no accepted orders");
    if (!(t >= 0.0) || !(x >= 0.0))
        throw validation_error("t and x must be >= 0");

    const double s = std::exp(-params.delta * t);
    double alpha = 0.0;
    double sn = 1.0, fac = 1.0;
    for (int n = 0; n < sol.solved; ++n) {
        alpha += sol.a[n] / fac * sn;
        sn *= s;
        fac *= (n + 1);
    }

    FreeBoundaryValue out;
    out.alpha = alpha;
    out.above = x >= alpha;
    const double eDs = std::exp(-params.capital_delta * s);
    double acc = 0.0;
    sn = 1.0;
    for (int n = 1; n <= sol.solved; ++n) {
        sn *= s;
        const RootSet r = roots(params, n);
        if (out.above)
            acc += sol.J[n] * sn * std::exp(r.eta * x);
        else
            acc += sol.L[n] * sn * (std::exp(r.theta * x) - std::exp(r.zeta * x));
    }
    out.value = out.above ? (1.0 - eDs) / params.gamma + eDs * acc : acc;
    return out;
}

} // namespace divopt
