// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Counter-based random streams. A stream is addressed by
// (master seed, agent, step, purpose); its output depends on nothing else,
// so draws are identical regardless of thread count or evaluation order.
//
// Philox4x32-10: Salmon, Moraes, Dror, Shaw, "Parallel random numbers:
// as easy as 1, 2, 3", SC 2011.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace kesten {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox_round(PhiloxCounter ctr, PhiloxKey key) noexcept {
    const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

/// Ten-round Philox4x32 block function.
constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        ctr = philox_round(ctr, key);
    }
    return ctr;
}

}  // namespace detail

/// What a stream is used for; keeps draws for different roles disjoint.
enum class StreamPurpose : std::uint32_t {
    Alpha = 1,
    Replacement = 2,
    Donor = 3,
    Initial = 4,
    Savings = 5,
    Generic = 6,
};

/// Stream address: (agent index, step index) within a master seed.
struct StreamId {
    std::uint32_t agent = 0;
    std::uint32_t step = 0;
    StreamPurpose purpose = StreamPurpose::Generic;
};

/// An unbounded sequence of 64-bit draws for one stream address.
///
/// Copying a stream copies its position; two copies produce the same draws.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, StreamId id) noexcept
        : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
          id_(id) {}

    RngStream(std::uint64_t master_seed, std::uint32_t agent, std::uint32_t step,
              StreamPurpose purpose = StreamPurpose::Generic) noexcept
        : RngStream(master_seed, StreamId{agent, step, purpose}) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    std::uint64_t master_seed() const noexcept {
        return (std::uint64_t{key_[1]} << 32) | key_[0];
    }
    const StreamId& id() const noexcept { return id_; }

    result_type operator()() noexcept {
        if (lane_ == 2) {
            refill();
        }
        return buffer_[lane_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() noexcept { return 1.0 - uniform(); }

    /// Uniform on (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n) by Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) noexcept {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = (*this)();
            const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
            if (static_cast<std::uint64_t>(m) >= threshold) {
                return static_cast<std::uint64_t>(m >> 64);
            }
        }
    }

    /// Standard normal via Box-Muller; the sine branch is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 via the U^(1/shape) boost.
    double gamma(double shape) noexcept {
        if (shape < 1.0) {
            const double u = uniform_open();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = 0.0;
            double v = 0.0;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) {
                return d * v;
            }
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
                return d * v;
            }
        }
    }

    /// Chi-square with (possibly non-integer) `dof` degrees of freedom.
    double chi_square(double dof) noexcept { return 2.0 * gamma(0.5 * dof); }

private:
    void refill() noexcept {
        const detail::PhiloxCounter ctr{block_++, id_.step, id_.agent,
                                        static_cast<std::uint32_t>(id_.purpose)};
        const auto out = detail::philox4x32_10(ctr, key_);
        buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        lane_ = 0;
    }

    detail::PhiloxKey key_;
    StreamId id_;
    std::uint32_t block_ = 0;
    unsigned lane_ = 2;
    std::array<std::uint64_t, 2> buffer_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace kesten
