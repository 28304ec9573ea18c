#pragma once

// Counter-based Philox4x32-10 plus the few distributions the simulators need.
// A stream is fully determined by (seed, stream id), so trial i draws the same
// numbers no matter which thread runs it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ftrlink {

using philox_ctr = std::array<std::uint32_t, 4>;
using philox_key = std::array<std::uint32_t, 2>;

inline philox_ctr philox4x32_10(philox_ctr c, philox_key k)
{
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += w0;
            k[1] += w1;
        }
        std::uint64_t p0 = std::uint64_t(m0) * c[0];
        std::uint64_t p1 = std::uint64_t(m1) * c[2];
        c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
    }
    return c;
}

class philox_stream {
public:
    philox_stream(std::uint64_t seed, std::uint64_t stream)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
          ctr_{0u, 0u, std::uint32_t(stream), std::uint32_t(stream >> 32)}
    {
    }

    std::uint32_t next_u32()
    {
        if (pos_ == 4) {
            buf_ = philox4x32_10(ctr_, key_);
            if (++ctr_[0] == 0) ++ctr_[1];
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // uniform on (0, 1), 53 random bits, never 0
    double uniform()
    {
        std::uint64_t a = next_u32() >> 5, b = next_u32() >> 6;
        return ((a * 67108864.0 + b) + 0.5) / 9007199254740992.0;
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // Marsaglia-Tsang, unit scale
    double gamma(double shape)
    {
        if (shape < 1.0) {
            double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    philox_key key_;
    philox_ctr ctr_;
    philox_ctr buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ftrlink
