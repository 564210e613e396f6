#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "qista/types.hpp"

namespace qista {

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for trial `trial` of sparsity cell `k` in a sweep. Injective in
/// (k, trial) for a fixed master seed as long as both fit in 32 bits.
constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint32_t k, std::uint32_t trial) noexcept {
    return mix64(master + mix64((std::uint64_t(k) << 32) | trial));
}

/// Independent sub-stream seed derived from a parent seed.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ (stream * 0xd1342543de82ef95ULL));
}

/// Portable random source: mt19937_64 (sequence fixed by the C++ standard)
/// with uniform, Gaussian and bounded-integer transforms written out here,
/// so draws are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, bound), bound > 0, by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % bound);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// m x n matrix with i.i.d. N(0,1) entries, or N(0,1/m) when
/// `column_normalized` (unit expected squared column norm).
template <typename Scalar = double>
Matrix<Scalar> generate_gaussian_matrix(Eigen::Index m, Eigen::Index n, bool column_normalized,
                                        std::uint64_t seed) {
    detail::require(m > 0 && n > 0, "generate_gaussian_matrix: dimensions must be positive");
    Rng rng(seed);
    const double scale = column_normalized ? 1.0 / std::sqrt(double(m)) : 1.0;
    Matrix<Scalar> a(m, n);
    // Row-major fill order so the stream does not depend on Eigen's storage order.
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Scalar(scale * rng.gaussian());
    return a;
}

/// Exactly k nonzeros on a uniformly random support, values i.i.d. N(0,1).
template <typename Scalar = double>
Vector<Scalar> generate_k_sparse_signal(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
    detail::require(n > 0, "generate_k_sparse_signal: n must be positive");
    detail::require(k >= 0 && k <= n, "generate_k_sparse_signal: need 0 <= k <= n");
    Rng rng(seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    // Partial Fisher-Yates: the first k slots become the support.
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto j = i + Eigen::Index(rng.below(std::uint64_t(n - i)));
        std::swap(idx[std::size_t(i)], idx[std::size_t(j)]);
    }
    Vector<Scalar> x = Vector<Scalar>::Zero(n);
    for (Eigen::Index i = 0; i < k; ++i) {
        double v = rng.gaussian();
        while (v == 0.0) v = rng.gaussian();
        x(idx[std::size_t(i)]) = Scalar(v);
    }
    return x;
}

/// Each entry independently nonzero with probability p, values i.i.d. N(0,1).
template <typename Scalar = double>
Vector<Scalar> generate_bernoulli_gaussian(Eigen::Index n, double p, std::uint64_t seed) {
    detail::require(n > 0, "generate_bernoulli_gaussian: n must be positive");
    detail::require(p >= 0.0 && p <= 1.0, "generate_bernoulli_gaussian: p must lie in [0, 1]");
    Rng rng(seed);
    Vector<Scalar> x = Vector<Scalar>::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool on = rng.uniform() < p;
        double v = rng.gaussian();
        while (on && v == 0.0) v = rng.gaussian();
        if (on) x(i) = Scalar(v);
    }
    return x;
}

/// y + e with e a Gaussian direction rescaled so that
/// ||y||^2 / ||e||^2 == 10^(snr_db/10) up to rounding.
template <typename Derived>
Vector<typename Derived::Scalar> add_noise_snr(const Eigen::MatrixBase<Derived>& y, double snr_db,
                                               std::uint64_t seed) {
    using Scalar = typename Derived::Scalar;
    detail::require(std::isfinite(snr_db), "add_noise_snr: snr_db must be finite");
    const double y_norm = double(y.norm());
    detail::require(y_norm > 0.0, "add_noise_snr: SNR undefined for y = 0");
    Rng rng(seed);
    Vector<Scalar> e(y.size());
    do {
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = Scalar(rng.gaussian());
    } while (e.norm() == Scalar(0));
    const double target = y_norm * std::pow(10.0, -snr_db / 20.0);
    e *= Scalar(target / double(e.norm()));
    return y + e;
}

}  // namespace qista
