#pragma once

#include <cstdint>
#include <optional>

#include "qista/random.hpp"
#include "qista/types.hpp"

namespace qista {

/// Recipe for a synthetic instance.
struct InstanceSpec {
    Eigen::Index m = 0;
    Eigen::Index n = 0;
    Eigen::Index k = 0;                 // exact support size, or expected size when bernoulli_p is set
    bool column_normalized = false;     // N(0, 1/m) entries instead of N(0, 1)
    std::optional<double> bernoulli_p;  // Bernoulli-Gaussian signal with this density
    std::optional<double> snr_db;       // additive measurement noise
};

/// Builds A, x0 and y from independent sub-streams of `seed`
/// (stream 1: A, stream 2: x0, stream 3: noise). Bernoulli-Gaussian signals
/// with p > 0 are redrawn until nonzero.
template <typename Scalar = double>
ProblemInstance<Scalar> make_instance(const InstanceSpec& spec, std::uint64_t seed) {
    detail::require(spec.m > 0 && spec.m < spec.n, "make_instance: need 0 < m < n");
    ProblemInstance<Scalar> inst;
    inst.a = generate_gaussian_matrix<Scalar>(spec.m, spec.n, spec.column_normalized, substream_seed(seed, 1));
    if (spec.bernoulli_p) {
        // An empty draw leaves RE and SNR undefined; redraw on a fresh stream.
        // This conditions the signal on a nonempty support when p > 0.
        std::uint64_t stream = 2;
        inst.x0 = generate_bernoulli_gaussian<Scalar>(spec.n, *spec.bernoulli_p, substream_seed(seed, stream));
        while (*spec.bernoulli_p > 0.0 && inst.x0->isZero(Scalar(0))) {
            stream += 0x100;
            inst.x0 = generate_bernoulli_gaussian<Scalar>(spec.n, *spec.bernoulli_p, substream_seed(seed, stream));
        }
        inst.k = int(spec.k);
    } else {
        inst.x0 = generate_k_sparse_signal<Scalar>(spec.n, spec.k, substream_seed(seed, 2));
        inst.k = int(spec.k);
    }
    inst.y = inst.a * *inst.x0;
    if (spec.snr_db) {
        inst.y = add_noise_snr(inst.y, *spec.snr_db, substream_seed(seed, 3));
        inst.noise_snr_db = spec.snr_db;
    }
    inst.seed = seed;
    return inst;
}

}  // namespace qista
