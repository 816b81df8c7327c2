#pragma once

#include <utility>
#include <vector>

namespace divopt {

// Finite sum of exponentials  g(y) = sum_i c_i e^{r_i y}.
// Every integrand appearing in the goodness bounds is the positive part of such a sum.
struct ExpTerm {
    double coef;
    double rate;
};

struct ExpSum {
    std::vector<ExpTerm> terms;

    double operator()(double y) const;

    // Adds c e^{r (y - y0)} as a term in y.
    void add_shifted(double coef, double rate, double y0);

    double max_rate() const;
    double abs_coef_sum() const;
    bool is_zero() const;
};

// Intervals of [lo, hi] where g > 0, boundaries resolved by bisection to ~1e-12
// relative. Assumes isolated zeros (true for non-degenerate exponential sums);
// throws numeric_error on a detected flat zero segment.
std::vector<std::pair<double, double>> positive_regions(const ExpSum& g, double lo, double hi);

} // namespace divopt
