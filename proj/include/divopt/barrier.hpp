#pragma once

#include "divopt/constant_bound.hpp"
#include "divopt/model.hpp"

#include <vector>

namespace divopt {

struct BarrierConfig {
    double q;  // barrier level >= 0
    int N;     // truncation order >= 1
};

// Coefficients of the order-N approximation of a constant-barrier performance
// function. Immutable after construction; eta[0] = 0 by convention.
struct CoefficientTable {
    double q;
    int N;
    std::vector<std::vector<double>> A; // A[n][k], 1 <= n <= N, 0 <= k <= n (A[0] unused)
    std::vector<double> D;              // D[n] = sum_k A[n][k]
    std::vector<double> nu;             // smooth-fit ratio; +inf when q = 0
    std::vector<double> eta;            // eta[k], 0 <= k <= N
    std::vector<double> theta;          // theta[n], 1 <= n <= N+1 ([0] unused)
    std::vector<double> zeta;           // zeta[n], likewise
};

// Barrier of the classical restricted-dividend problem without utility,
// clamped at zero. Requires mu > 0.
double default_barrier(const ModelParams& p);

CoefficientTable build_coefficients(const ModelParams& p, const BarrierConfig& cfg);

// F^N / G^N as formulas (each defined for all x >= 0) and their x-derivatives.
double barrier_F(const ModelParams& p, const CoefficientTable& tab, double t, double x);
double barrier_G(const ModelParams& p, const CoefficientTable& tab, double t, double x);
double barrier_F_x(const ModelParams& p, const CoefficientTable& tab, double t, double x);
double barrier_G_x(const ModelParams& p, const CoefficientTable& tab, double t, double x);

// V^N: F^N above the barrier, G^N below.
double v_approx(const ModelParams& p, const CoefficientTable& tab, double t, double x);

// HJB residual sign function of V^N.
double psi_N(const ModelParams& p, const CoefficientTable& tab, double t, double x);

// Residuals of the two dynamics identities, via central finite differences:
//   below:  G_t + mu G_x + sigma^2/2 G_xx                     (should be 0)
//   above:  F_t + mu F_x + sigma^2/2 F_xx + xi psi^N
//           minus the closed-form error term                  (should be 0)
struct ResidualPair {
    double below;
    double above;
};
ResidualPair residual_lemma_check(const ModelParams& p, const CoefficientTable& tab,
                                  double t, double x);

// Certified bound V(t,x) <= V^N(t,x) + above + below + approx (+ quadrature_error),
// the three components matching suboptimality above the barrier, below it, and the
// series truncation.
struct BarrierBound {
    double above = 0.0;
    double below = 0.0;
    double approx = 0.0;
    double quadrature_error = 0.0;

    double total() const { return above + below + approx + quadrature_error; }
};

BarrierBound goodness_barrier(const ModelParams& p, const CoefficientTable& tab,
                              double t, double x);

// |V^N - V^C| bound (the approx component alone, quadrature error included).
double approx_error(const ModelParams& p, const CoefficientTable& tab, double t, double x);

} // namespace divopt
