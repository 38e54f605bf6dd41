#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace smilab {

// splitmix64 finalizer. Used both as the generator's output function and to
// derive stream keys, so every draw is a pure function of (key, counter).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ull));
}

// Sub-seed for a derived computation (sweep point, curve point, instance).
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t salt) {
    return absorb(mix64(master_seed), salt);
}

// Counter-based stream keyed by (master_seed, trajectory, slice). A fresh
// stream per slice makes the draws independent of how many numbers other
// slices or trajectories consume, which is what keeps ensemble averages
// byte-identical for any worker count.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t trajectory, std::uint64_t slice)
        : state_(absorb(absorb(mix64(master_seed), trajectory), slice)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix64(state_);
    }

    // uniform in [0, 1) with 53 random bits
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Box-Muller, spelled out so the sequence is identical on every platform
    // (std::normal_distribution is implementation-defined).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// GUE draw normalized so E||V||_F^2 = dim: diagonal entries N(0, 1/d), real
// and imaginary parts of off-diagonal entries N(0, 1/(2d)). Draw order is
// fixed (diagonal then upper triangle, row by row) to pin the bit pattern.
inline Eigen::MatrixXcd sample_gue(int dim, RandomStream& rng) {
    Eigen::MatrixXcd v(dim, dim);
    const double diag_sd = 1.0 / std::sqrt(static_cast<double>(dim));
    const double off_sd = 1.0 / std::sqrt(2.0 * static_cast<double>(dim));
    for (int r = 0; r < dim; ++r) {
        v(r, r) = std::complex<double>(diag_sd * rng.next_gaussian(), 0.0);
        for (int c = r + 1; c < dim; ++c) {
            const double re = off_sd * rng.next_gaussian();
            const double im = off_sd * rng.next_gaussian();
            v(r, c) = std::complex<double>(re, im);
            v(c, r) = std::complex<double>(re, -im);
        }
    }
    return v;
}

} // namespace smilab
