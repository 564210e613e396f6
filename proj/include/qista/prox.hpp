#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>
#include <variant>
#include <vector>

#include "qista/types.hpp"

namespace qista {

/// Scalar soft threshold sign(x) max(0, |x| - theta).
template <typename Scalar>
    requires std::is_floating_point_v<Scalar>
inline Scalar soft_threshold(Scalar x, Scalar theta) {
    if (theta < Scalar(0)) throw InvalidInput("soft_threshold: theta must be >= 0");
    const Scalar mag = std::abs(x) - theta;
    if (mag <= Scalar(0)) return Scalar(0);
    return x > Scalar(0) ? mag : -mag;
}

/// Componentwise soft threshold with a uniform threshold.
template <typename Derived>
Vector<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& x,
                                                typename Derived::Scalar theta) {
    using Scalar = typename Derived::Scalar;
    detail::require(theta >= Scalar(0), "soft_threshold: theta must be >= 0");
    return x.unaryExpr([theta](Scalar v) { return soft_threshold(v, theta); });
}

/// Componentwise soft threshold with per-entry thresholds.
template <typename Derived, typename DerivedT>
Vector<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& x,
                                                const Eigen::MatrixBase<DerivedT>& theta) {
    using Scalar = typename Derived::Scalar;
    detail::require(theta.size() == x.size(), "soft_threshold: theta length does not match x");
    detail::require((theta.array() >= Scalar(0)).all(), "soft_threshold: theta must be >= 0");
    return x.binaryExpr(theta, [](Scalar v, Scalar t) { return soft_threshold(v, t); });
}

/// Adaptive thresholds lambda / (|r_i| + eps_i)^(1-q). Larger |r_i| gives a
/// smaller threshold.
template <typename Derived, typename DerivedE>
Vector<typename Derived::Scalar> qista_thresholds(const Eigen::MatrixBase<Derived>& r,
                                                  typename Derived::Scalar lambda,
                                                  const Eigen::MatrixBase<DerivedE>& eps,
                                                  typename Derived::Scalar q) {
    using Scalar = typename Derived::Scalar;
    detail::require(eps.size() == r.size(), "qista_threshold: eps length does not match r");
    detail::require((eps.array() > Scalar(0)).all(), "qista_threshold: eps must be strictly positive");
    detail::require(q > Scalar(0) && q <= Scalar(1), "qista_threshold: q must lie in (0, 1]");
    detail::require(lambda >= Scalar(0), "qista_threshold: lambda must be >= 0");
    return (lambda / (r.array().abs() + eps.array()).pow(Scalar(1) - q)).matrix();
}

/// x_i = soft_threshold(r_i, lambda / (|r_i| + eps_i)^(1-q))
template <typename Derived, typename DerivedE>
Vector<typename Derived::Scalar> qista_threshold(const Eigen::MatrixBase<Derived>& r,
                                                 typename Derived::Scalar lambda,
                                                 const Eigen::MatrixBase<DerivedE>& eps,
                                                 typename Derived::Scalar q) {
    using Scalar = typename Derived::Scalar;
    const Vector<Scalar> theta = qista_thresholds(r, lambda, eps, q);
    return r.binaryExpr(theta, [](Scalar v, Scalar t) { return soft_threshold(v, t); });
}

/// Keep the k entries of largest magnitude; ties keep the lower index.
template <typename Derived>
Vector<typename Derived::Scalar> hard_threshold_keep_k(const Eigen::MatrixBase<Derived>& x, Eigen::Index k) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = x.size();
    detail::require(k >= 0 && k <= n, "hard_threshold_keep_k: need 0 <= k <= n");
    Vector<Scalar> out = Vector<Scalar>::Zero(n);
    if (k == 0) return out;
    if (k == n) return x;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto before = [&x](Eigen::Index i, Eigen::Index j) {
        const Scalar ai = std::abs(x(i)), aj = std::abs(x(j));
        return ai > aj || (ai == aj && i < j);
    };
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), before);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto idx = order[std::size_t(i)];
        out(idx) = x(idx);
    }
    return out;
}

/// Largest |(psi psi^T - gamma I)_ij|.
template <typename Derived>
typename Derived::Scalar tight_frame_deviation(const Eigen::MatrixBase<Derived>& psi, typename Derived::Scalar gamma) {
    using Scalar = typename Derived::Scalar;
    const Matrix<Scalar> gram = psi * psi.transpose();
    return (gram - gamma * Matrix<Scalar>::Identity(psi.rows(), psi.rows())).cwiseAbs().maxCoeff();
}

inline constexpr double kTightFrameTolerance = 1e-8;

/// Proximal point of f(z) = sum_i w_i |(psi z + b)_i| at r, for psi with
/// psi psi^T = gamma I:
///   r + (1/gamma) psi^T (soft(psi r + b; gamma w) - (psi r + b)).
/// Throws PreconditionViolation when psi is not a gamma-tight frame.
template <typename DerivedR, typename DerivedP, typename DerivedB, typename DerivedW>
Vector<typename DerivedR::Scalar> generalized_prox(const Eigen::MatrixBase<DerivedR>& r,
                                                   const Eigen::MatrixBase<DerivedP>& psi,
                                                   const Eigen::MatrixBase<DerivedB>& b,
                                                   const Eigen::MatrixBase<DerivedW>& w,
                                                   typename DerivedR::Scalar gamma) {
    using Scalar = typename DerivedR::Scalar;
    detail::require(psi.cols() == r.size(), "generalized_prox: psi must have n columns");
    detail::require(b.size() == psi.rows() && w.size() == psi.rows(),
                    "generalized_prox: b and w must have one entry per row of psi");
    detail::require(gamma > Scalar(0), "generalized_prox: gamma must be > 0");
    detail::require((w.array() >= Scalar(0)).all(), "generalized_prox: weights must be >= 0");
    if (!(tight_frame_deviation(psi, gamma) <= Scalar(kTightFrameTolerance)))
        throw PreconditionViolation("generalized_prox: psi psi^T differs from gamma I");

    const Vector<Scalar> z = psi * r + b;
    const Vector<Scalar> shrunk = soft_threshold(z, (gamma * w).eval());
    return r + (psi.transpose() * (shrunk - z)) / gamma;
}

/// One of the three componentwise thresholding rules used by the solvers.
template <typename Scalar = double>
class ThresholdRule {
public:
    struct SoftConstant {
        Vector<Scalar> theta;  // size 1 means a uniform threshold
    };
    struct QistaAdaptive {
        Scalar lambda;
        Scalar q;
        Vector<Scalar> eps;
    };
    struct HardKeepK {
        Eigen::Index k;
    };

    static ThresholdRule soft(Scalar theta) {
        detail::require(theta >= Scalar(0), "ThresholdRule: theta must be >= 0");
        return ThresholdRule(SoftConstant{Vector<Scalar>::Constant(1, theta)});
    }
    static ThresholdRule soft(Vector<Scalar> theta) {
        detail::require((theta.array() >= Scalar(0)).all(), "ThresholdRule: theta must be >= 0");
        return ThresholdRule(SoftConstant{std::move(theta)});
    }
    static ThresholdRule qista(Scalar lambda, Scalar q, Vector<Scalar> eps) {
        detail::require(lambda >= Scalar(0), "ThresholdRule: lambda must be >= 0");
        detail::require(q > Scalar(0) && q <= Scalar(1), "ThresholdRule: q must lie in (0, 1]");
        detail::require((eps.array() > Scalar(0)).all(), "ThresholdRule: eps must be strictly positive");
        return ThresholdRule(QistaAdaptive{lambda, q, std::move(eps)});
    }
    static ThresholdRule hard(Eigen::Index k) {
        detail::require(k >= 0, "ThresholdRule: k must be >= 0");
        return ThresholdRule(HardKeepK{k});
    }

    template <typename Derived>
    Vector<Scalar> apply(const Eigen::MatrixBase<Derived>& r) const {
        return std::visit(
            [&r](const auto& rule) -> Vector<Scalar> {
                using Rule = std::decay_t<decltype(rule)>;
                if constexpr (std::is_same_v<Rule, SoftConstant>) {
                    if (rule.theta.size() == 1) return soft_threshold(r, rule.theta(0));
                    return soft_threshold(r, rule.theta);
                } else if constexpr (std::is_same_v<Rule, QistaAdaptive>) {
                    return qista_threshold(r, rule.lambda, rule.eps, rule.q);
                } else {
                    return hard_threshold_keep_k(r, rule.k);
                }
            },
            rule_);
    }

    const std::variant<SoftConstant, QistaAdaptive, HardKeepK>& rule() const { return rule_; }

private:
    template <typename R>
    explicit ThresholdRule(R r) : rule_(std::move(r)) {}

    std::variant<SoftConstant, QistaAdaptive, HardKeepK> rule_;
};

}  // namespace qista
