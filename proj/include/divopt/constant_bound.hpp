#pragma once

#include "divopt/model.hpp"
#include "divopt/series.hpp"

namespace divopt {

// Certified upper bound on V - V^C for a fixed strategy C. The guarantee is
// conservative: V(t,x) <= V^C(t,x) + total().
struct GoodnessBound {
    double value = 0.0;            // summed integral terms
    int terms_used = 0;
    double tail_bound = 0.0;       // series truncation remainder
    double quadrature_error = 0.0; // certified integration error

    double total() const { return value + tail_bound + quadrature_error; }
};

// Distance bound for the constant payout strategy xi:
// V(t,x) <= V^xi(t,x) + xi e^{-dt - D e^{-dt}} sum_n e^{-dtn} D^n/n! *
//           int_0^inf (c_{n+1} e^{eta_{n+1} y} - e^{eta_n y})^+ f_{n+1}(x,y) dy
// with c_n = -eta_n xi / (delta n). Zero exactly when the constant strategy is optimal.
GoodnessBound goodness_constant(const ModelParams& p, const TruncationConfig& tc,
                                double t, double x);

} // namespace divopt
