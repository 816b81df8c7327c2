#pragma once

#include <cstdint>

namespace divopt {

// Philox4x32-10 counter-based generator. Each path owns an independent stream
// keyed by (seed, path index); identical configs reproduce identical draws
// regardless of how paths are scheduled.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_lo_(static_cast<std::uint32_t>(path)),
          path_hi_(static_cast<std::uint32_t>(path >> 32))
    {
    }

    // uniform draw in (0, 1)
    double uniform()
    {
        if (have_ == 0)
            refill();
        const std::uint32_t hi = buf_[--have_];
        const std::uint32_t lo = buf_[--have_];
        const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal(); // inverse-CDF transform of uniform()

private:
    void refill();

    std::uint32_t key_[2];
    std::uint32_t path_lo_, path_hi_;
    std::uint64_t block_ = 0;
    std::uint32_t buf_[4] = {};
    int have_ = 0;
};

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9 absolute).
double normal_icdf(double p);

} // namespace divopt
