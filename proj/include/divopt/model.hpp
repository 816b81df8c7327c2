#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace divopt {

// Thrown when model parameters violate their constraints. what() names the field.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numeric routine cannot reach its certified tolerance.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Market/preference constants of the surplus model. Immutable after construction.
struct ModelParams {
    double mu;     // surplus drift per unit time
    double sigma;  // volatility, > 0
    double delta;  // discount rate, > 0
    double gamma;  // risk aversion, > 0
    double xi;     // maximal dividend rate, > 0

    // xi * gamma / delta, cached at construction
    double capital_delta;
};

ModelParams make_params(double mu, double sigma, double delta, double gamma, double xi);

// Characteristic roots for series index n >= 1.
//   eta_n:  root of (sigma^2/2) r^2 + (mu - xi) r - delta*n = 0, negative branch
//   theta_n, zeta_n: roots of (sigma^2/2) r^2 + mu r - delta*n = 0 (theta > 0 > zeta)
//   rho_n = sqrt(mu^2 + 2 sigma^2 delta n) / sigma^2
struct RootSet {
    int n;
    double eta;
    double theta;
    double zeta;
    double rho;
};

RootSet roots(const ModelParams& p, int n);

// Exponential utility U(x) = (1 - exp(-gamma x)) / gamma.
double utility(const ModelParams& p, double x);

// Verdict of the constant-payout optimality criterion. Only meaningful for mu > 0.
struct OptimalityCheck {
    bool applicable;   // false when mu <= 0: threshold undefined
    bool optimal;      // xi <= threshold (only valid if applicable)
    double threshold;  // delta * sigma^2 / (2 mu), NaN when inapplicable
};

OptimalityCheck is_constant_strategy_optimal(const ModelParams& p);

} // namespace divopt
