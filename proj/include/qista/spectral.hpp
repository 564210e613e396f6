#pragma once

#include <cmath>

#include "qista/types.hpp"

namespace qista {

struct PowerIterationOptions {
    double rel_tol = 1e-10;
    int max_steps = 10000;
};

/// Largest singular value of `a` by power iteration on A^T A, starting from
/// the normalised all-ones vector. Stops once the Rayleigh-quotient estimate
/// changes by less than `rel_tol` (relative) or after `max_steps` products.
/// If `dominant` is non-null it receives the final unit iterate.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& a,
                                       Vector<typename Derived::Scalar>* dominant = nullptr,
                                       PowerIterationOptions opts = {}) {
    using Scalar = typename Derived::Scalar;
    detail::require(a.rows() > 0 && a.cols() > 0, "spectral_norm: empty matrix");
    detail::require(a.allFinite(), "spectral_norm: non-finite entries");

    Vector<Scalar> v = Vector<Scalar>::Ones(a.cols()) / std::sqrt(Scalar(a.cols()));
    if ((a * v).squaredNorm() == Scalar(0)) {
        // All-ones lies in the null space; fall back to the heaviest column.
        Eigen::Index j = 0;
        if (a.colwise().squaredNorm().maxCoeff(&j) == Scalar(0)) {
            if (dominant) *dominant = v;
            return Scalar(0);
        }
        v.setZero();
        v(j) = Scalar(1);
    }

    Vector<Scalar> av(a.rows());
    Vector<Scalar> w(a.cols());
    Scalar estimate(0);
    for (int step = 0; step < opts.max_steps; ++step) {
        av.noalias() = a * v;
        w.noalias() = a.transpose() * av;
        const Scalar rayleigh = v.dot(w);  // ||A v||^2 for unit v
        v = w / w.norm();
        const bool settled =
            step > 0 && std::abs(rayleigh - estimate) <= Scalar(opts.rel_tol) * std::abs(rayleigh);
        estimate = rayleigh;
        if (settled) break;
    }
    if (dominant) *dominant = v;
    return std::sqrt((a * v).squaredNorm());
}

}  // namespace qista
