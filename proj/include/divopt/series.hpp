#pragma once

#include "divopt/model.hpp"

namespace divopt {

struct TruncationConfig {
    int n_max = 60;          // hard cap on the series index
    double tail_tol = 1e-12; // absolute tolerance for the certified remainder
};

// Truncated series value together with a certified remainder bound:
// |true value - value| <= tail_bound.
struct SeriesValue {
    double value;
    int truncation_index;
    double tail_bound;
};

// Return function of the constant strategy xi:
// V^xi(t,x) = 1/g - e^{-D e^{-dt}}/g - e^{-D e^{-dt}} sum_{n>=1} D^n/(g n!) e^{-d t n} e^{eta_n x}
SeriesValue v_xi(const ModelParams& p, const TruncationConfig& tc, double t, double x);

// x-derivative of v_xi (term-wise differentiated series).
SeriesValue v_xi_dx(const ModelParams& p, const TruncationConfig& tc, double t, double x);

// Sign function of the HJB maximiser in the substituted variable s = e^{-delta t}:
// psi(s,x) = sum_{n>=0} s^n D^n/n! { eta_{n+1} xi/(delta(n+1)) e^{eta_{n+1} x} + e^{eta_n x} }
// with eta_0 = 0.
SeriesValue psi(const ModelParams& p, const TruncationConfig& tc, double s, double x);

// Common x -> infinity limit of V and V^xi: U((xi/delta) e^{-delta t}).
double value_limit(const ModelParams& p, double t);

} // namespace divopt
