#pragma once

#include "divopt/expsum.hpp"
#include "divopt/model.hpp"

namespace divopt {

// Drift corridor [a, b] for the controlled diffusion dX = C_t dt + sigma dW,
// with discount rate applied to the occupation functional.
struct DriftBand {
    double a;
    double b;
    double sigma;    // > 0
    double discount; // >= 0
};

// Exponents of the closed-form occupation kernel for a drift band.
// alpha >= 0, beta_plus >= 0 >= beta_minus.
struct OccupationKernel {
    double alpha;
    double beta_plus;
    double beta_minus;
    DriftBand band;
};

OccupationKernel make_kernel(const DriftBand& band);

// f(x,y): deterministic bound with E_x[int_0^tau e^{-disc s} L^y_{ds}] <= sigma^2 f(x,y),
// uniform over progressively measurable drifts in the band.
double kernel_f(const OccupationKernel& k, double x, double y);
double kernel_f(const DriftBand& band, double x, double y);

// f_n of the constant-strategy goodness bound: band (mu - xi, mu), discount delta*n.
// Evaluated directly from the characteristic roots.
double kernel_f_n(const ModelParams& p, int n, double x, double y);

// Limit a -> -infinity of kernel_f: drift only bounded above by b.
double kernel_f_unbounded(double b, double sigma, double discount, double x, double y);

struct IntegralResult {
    double value;
    double error; // certified: quadrature estimate + truncation remainder
};

// int_{lo}^{hi} g(y)^+ f(x,y) dy. hi may be +infinity; the tail beyond an
// automatically chosen cutoff is bounded in closed form and added to error.
IntegralResult integrate_bound(const OccupationKernel& k, const ExpSum& g,
                               double x, double lo, double hi);

} // namespace divopt
