#pragma once

#include <algorithm>
#include <cmath>

#include "qista/types.hpp"

namespace qista {

/// Reported SNR when the recovery error is exactly zero.
inline constexpr double kSnrCapDb = 300.0;

template <typename DerivedA, typename DerivedB>
double relative_error(const Eigen::MatrixBase<DerivedA>& x_star, const Eigen::MatrixBase<DerivedB>& x0) {
    detail::require(x_star.size() == x0.size(), "relative_error: length mismatch");
    const double ref = double(x0.norm());
    detail::require(ref > 0.0, "relative_error: undefined for x0 = 0");
    return double((x_star - x0).norm()) / ref;
}

/// 10 log10(||x0||^2 / ||x* - x0||^2), capped at kSnrCapDb.
template <typename DerivedA, typename DerivedB>
double snr_db(const Eigen::MatrixBase<DerivedA>& x_star, const Eigen::MatrixBase<DerivedB>& x0) {
    detail::require(x_star.size() == x0.size(), "snr_db: length mismatch");
    const double signal = double(x0.squaredNorm());
    detail::require(signal > 0.0, "snr_db: undefined for x0 = 0");
    const double err = double((x_star - x0).squaredNorm());
    if (err == 0.0) return kSnrCapDb;
    return std::min(kSnrCapDb, 10.0 * std::log10(signal / err));
}

/// 0.5 ||y - A x||^2
template <typename Scalar, typename Derived>
Scalar data_fidelity(const Eigen::MatrixBase<Derived>& x, const ProblemInstance<Scalar>& inst) {
    detail::require(x.size() == inst.n(), "objective: x length does not match n");
    return Scalar(0.5) * (inst.y - inst.a * x).squaredNorm();
}

/// 0.5 ||y - A x||^2 + lambda ||x||_1
template <typename Scalar, typename Derived>
Scalar objective_lasso(const Eigen::MatrixBase<Derived>& x, const ProblemInstance<Scalar>& inst, Scalar lambda) {
    return data_fidelity(x, inst) + lambda * x.template lpNorm<1>();
}

/// 0.5 ||y - A x||^2 + lambda sum |x_i|^q with 0^q = 0.
template <typename Scalar, typename Derived>
Scalar objective_lq(const Eigen::MatrixBase<Derived>& x, const ProblemInstance<Scalar>& inst, Scalar lambda,
                    Scalar q) {
    detail::require(q > Scalar(0) && q <= Scalar(1), "objective_lq: q must lie in (0, 1]");
    Scalar penalty(0);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const Scalar v = std::abs(x(i));
        if (v != Scalar(0)) penalty += std::pow(v, q);
    }
    return data_fidelity(x, inst) + lambda * penalty;
}

namespace detail {

template <typename Scalar, typename DerivedW, typename DerivedE>
void check_weights(const Eigen::MatrixBase<DerivedW>& ref, const Eigen::MatrixBase<DerivedE>& eps, Scalar q) {
    require(eps.size() == ref.size(), "objective: eps length does not match n");
    require((eps.array() > Scalar(0)).all(), "objective: eps must be strictly positive");
    require(q > Scalar(0) && q <= Scalar(1), "objective: q must lie in (0, 1]");
}

}  // namespace detail

/// Smoothed l_q objective
///   F(x) = 0.5 ||y - A x||^2 + lambda sum |x_i| / (|x_i| + eps_i)^(1-q).
template <typename Scalar, typename Derived, typename DerivedE>
Scalar objective_approx(const Eigen::MatrixBase<Derived>& x, const ProblemInstance<Scalar>& inst, Scalar lambda,
                        Scalar q, const Eigen::MatrixBase<DerivedE>& eps) {
    detail::check_weights(x, eps, q);
    const auto ax = x.array().abs();
    const Scalar penalty = (ax / (ax + eps.array()).pow(Scalar(1) - q)).sum();
    return data_fidelity(x, inst) + lambda * penalty;
}

/// Two-argument relaxation
///   H(x, c) = 0.5 ||y - A x||^2 + lambda sum |x_i| / (|c_i| + eps_i)^(1-q),
/// with H(x, x) == F(x).
template <typename Scalar, typename Derived, typename DerivedC, typename DerivedE>
Scalar functional_h(const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<DerivedC>& c,
                    const ProblemInstance<Scalar>& inst, Scalar lambda, Scalar q,
                    const Eigen::MatrixBase<DerivedE>& eps) {
    detail::check_weights(x, eps, q);
    detail::require(c.size() == x.size(), "functional_h: c length does not match n");
    const Scalar penalty = (x.array().abs() / (c.array().abs() + eps.array()).pow(Scalar(1) - q)).sum();
    return data_fidelity(x, inst) + lambda * penalty;
}

}  // namespace qista
