#include "divopt/expsum.hpp"

#include "divopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace divopt {

double ExpSum::operator()(double y) const
{
    double s = 0.0;
    for (const auto& t : terms)
        s += t.coef * std::exp(t.rate * y);
    return s;
}

void ExpSum::add_shifted(double coef, double rate, double y0)
{
    if (coef == 0.0)
        return;
    terms.push_back({coef * std::exp(-rate * y0), rate});
}

double ExpSum::max_rate() const
{
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms)
        if (t.coef != 0.0)
            m = std::max(m, t.rate);
    return m;
}

double ExpSum::abs_coef_sum() const
{
    double s = 0.0;
    for (const auto& t : terms)
        s += std::abs(t.coef);
    return s;
}

bool ExpSum::is_zero() const
{
    for (const auto& t : terms)
        if (t.coef != 0.0)
            return false;
    return true;
}

namespace {

double bisect_zero(const ExpSum& g, double lo, double hi, double flo)
{
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-13 * (1.0 + std::abs(mid)))
            return mid;
        const double fm = g(mid);
        if (fm == 0.0)
            return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::vector<std::pair<double, double>> positive_regions(const ExpSum& g, double lo, double hi)
{
    std::vector<std::pair<double, double>> out;
    if (g.is_zero() || !(hi > lo))
        return out;

    // Sign scan on a dense grid; exponential sums with k terms have at most
    // k-1 sign changes, a few hundred samples is ample for the orders used here.
    const int n_scan = 1024;
    std::vector<double> ys(n_scan + 1);
    std::vector<double> fs(n_scan + 1);
    int zero_run = 0;
    for (int i = 0; i <= n_scan; ++i) {
        ys[i] = lo + (hi - lo) * static_cast<double>(i) / n_scan;
        fs[i] = g(ys[i]);
        zero_run = (fs[i] == 0.0) ? zero_run + 1 : 0;
        if (zero_run >= 3)
            throw numeric_error("root isolation failure: flat zero segment");
    }

    bool open = fs[0] > 0.0;
    double start = lo;
    for (int i = 1; i <= n_scan; ++i) {
        const bool pos = fs[i] > 0.0;
        if (pos == open)
            continue;
        const double z = bisect_zero(g, ys[i - 1], ys[i], fs[i - 1]);
        if (open)
            out.emplace_back(start, z);
        else
            start = z;
        open = pos;
    }
    if (open)
        out.emplace_back(start, hi);
    return out;
}

} // namespace divopt
