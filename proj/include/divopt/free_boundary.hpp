#pragma once

#include "divopt/model.hpp"

#include <vector>

namespace divopt {

// Power-series construction of the conjectured value function: h above a
// time-dependent barrier alpha, g below it, everything expanded in powers of
// s = e^{-delta t}. Experimental: rests on unproven smoothness and convergence
// assumptions, so the result carries an explicit divergence flag and nothing
// here feeds the certified bounds.
struct FreeBoundarySolution {
    int K = 0;      // requested order
    int solved = 0; // highest order whose coefficients were accepted

    std::vector<double> J; // J[1..solved] ([0] unused)
    std::vector<double> L; // L[1..solved] ([0] unused)
    std::vector<double> a; // barrier coefficients a[0..solved-1]

    // Leibniz tables, [n][m] = order-m coefficient of the n-th stream:
    //   b: e^{eta_n alpha},  p: e^{theta_n alpha},  q: e^{zeta_n alpha}
    std::vector<std::vector<double>> b, p, q;

    std::vector<double> residuals; // matching-residual max norm per solved order

    bool diverged = false;
    int divergence_order = 0; // first order where breakdown was detected
};

// Solves the coefficient equations order by order; each step determines
// (J_k, L_k, a_{k-1}) by safeguarded Newton iteration. Stops early and flags
// divergence when coefficients blow up or a step fails to converge.
FreeBoundarySolution solve_free_boundary(const ModelParams& params, int K,
                                         double solver_tol = 1e-11);

struct FreeBoundaryValue {
    double value;
    double alpha;
    bool above; // true: h branch, false: g branch
};

FreeBoundaryValue eval_solution(const FreeBoundarySolution& sol, const ModelParams& params,
                                double t, double x);

} // namespace divopt
