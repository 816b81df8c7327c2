#include "divopt/model.hpp"

#include <limits>

namespace divopt {

ModelParams make_params(double mu, double sigma, double delta, double gamma, double xi)
{
    auto require_pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw validation_error(std::string(name) + " must be positive and finite");
    };
    if (!std::isfinite(mu))
        throw validation_error("mu must be finite");
    require_pos(sigma, "sigma");
    require_pos(delta, "delta");
    require_pos(gamma, "gamma");
    require_pos(xi, "xi");

    ModelParams p{mu, sigma, delta, gamma, xi, xi * gamma / delta};
    if (!std::isfinite(p.capital_delta))
        throw validation_error("xi*gamma/delta overflows");
    return p;
}

namespace {

// Negative root of (sigma^2/2) r^2 - m r - c = 0 written to avoid cancellation:
// r = (m - sqrt(m^2 + 2 c sigma^2)) / sigma^2 with c > 0.
double stable_negative_root(double m, double c, double sigma2)
{
    const double disc = std::sqrt(m * m + 2.0 * c * sigma2);
    if (m > 0.0)
        return -2.0 * c / (m + disc); // conjugate form, no cancellation
    return (m - disc) / sigma2;
}

} // namespace

RootSet roots(const ModelParams& p, int n)
{
    if (n < 1)
        throw validation_error("root index n must be >= 1");
    const double sigma2 = p.sigma * p.sigma;
    const double dn = p.delta * static_cast<double>(n);

    const double eta = stable_negative_root(p.xi - p.mu, dn, sigma2);
    const double rho = std::sqrt(p.mu * p.mu + 2.0 * sigma2 * dn) / sigma2;
    const double zeta = stable_negative_root(-p.mu, dn, sigma2);
    // theta via Vieta: theta * zeta = -2 dn / sigma^2
    const double theta = -2.0 * dn / (sigma2 * zeta);
    return RootSet{n, eta, theta, zeta, rho};
}

double utility(const ModelParams& p, double x)
{
    return -std::expm1(-p.gamma * x) / p.gamma;
}

OptimalityCheck is_constant_strategy_optimal(const ModelParams& p)
{
    if (p.mu <= 0.0)
        return {false, false, std::numeric_limits<double>::quiet_NaN()};
    const double threshold = p.delta * p.sigma * p.sigma / (2.0 * p.mu);
    return {true, p.xi <= threshold, threshold};
}

} // namespace divopt
