#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "qista/errors.hpp"

namespace qista {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A compressed-sensing problem y = A x0 (+ noise).
///
/// `x0` is absent when the instance was built from raw measurements.
/// `k` is the exact support size for k-sparse signals and the expected
/// support size for Bernoulli-Gaussian ones.
template <typename Scalar = double>
struct ProblemInstance {
    Matrix<Scalar> a;
    Vector<Scalar> y;
    std::optional<Vector<Scalar>> x0;
    int k = 0;
    std::optional<double> noise_snr_db;  // nullopt == noiseless
    std::uint64_t seed = 0;

    Eigen::Index m() const { return a.rows(); }
    Eigen::Index n() const { return a.cols(); }

    void validate() const {
        detail::require(a.rows() > 0 && a.cols() > 0, "instance: empty sensing matrix");
        detail::require(a.rows() < a.cols(), "instance: need 0 < m < n");
        detail::require(a.allFinite(), "instance: sensing matrix has non-finite entries");
        detail::require(y.size() == a.rows(), "instance: y length does not match m");
        detail::require(y.allFinite(), "instance: y has non-finite entries");
        if (x0) {
            detail::require(x0->size() == a.cols(), "instance: x0 length does not match n");
            detail::require(x0->allFinite(), "instance: x0 has non-finite entries");
        }
        detail::require(k >= 0 && k <= a.cols(), "instance: k outside [0, n]");
    }
};

/// Parameters shared by every iterative solver. Not every solver reads every
/// field: ISTA/FISTA ignore q and eps, IHT ignores lambda, q and eps.
template <typename Scalar = double>
struct SolverConfig {
    Scalar q = Scalar(0.05);
    Scalar lambda = Scalar(0);
    Vector<Scalar> eps;  // length n, strictly positive
    Scalar beta = Scalar(0);
    Scalar tol = Scalar(1e-7);
    int max_iter = 20000;
    Scalar gamma = Scalar(0);
    Vector<Scalar> x_init;  // empty means all zeros

    /// Default QISTA parameters for an instance with step size `beta`:
    /// lambda = 1e-4 * beta, q = 0.05, eps = 1.
    static SolverConfig defaults_for(Eigen::Index n, Scalar beta) {
        SolverConfig cfg;
        cfg.beta = beta;
        cfg.lambda = Scalar(1e-4) * beta;
        cfg.q = Scalar(0.05);
        cfg.eps = Vector<Scalar>::Ones(n);
        return cfg;
    }

    Vector<Scalar> initial_point(Eigen::Index n) const {
        if (x_init.size() == 0) return Vector<Scalar>::Zero(n);
        detail::require(x_init.size() == n, "config: x_init length does not match n");
        return x_init;
    }

    void validate(Eigen::Index n, bool needs_eps) const {
        detail::require(q > Scalar(0) && q <= Scalar(1), "config: q must lie in (0, 1]");
        detail::require(lambda >= Scalar(0) && std::isfinite(double(lambda)), "config: lambda must be >= 0");
        detail::require(beta > Scalar(0) && std::isfinite(double(beta)), "config: beta must be > 0");
        detail::require(tol > Scalar(0), "config: tol must be > 0");
        detail::require(max_iter > 0, "config: max_iter must be positive");
        detail::require(gamma >= Scalar(0), "config: gamma must be >= 0");
        if (needs_eps) {
            detail::require(eps.size() == n, "config: eps length does not match n");
            detail::require((eps.array() > Scalar(0)).all(), "config: eps must be strictly positive");
        }
        if (x_init.size() != 0) detail::require(x_init.size() == n, "config: x_init length does not match n");
    }
};

template <typename Scalar = double>
struct RecoveryReport {
    Vector<Scalar> x_star;
    std::optional<double> relative_error;  // present iff the instance has x0
    std::optional<double> snr_db;
    int iterations = 0;
    bool converged = false;
    double wall_time_s = 0.0;
};

/// Per-iteration diagnostics; every column has one entry per iteration.
/// rel_error is NaN when the instance carries no ground truth.
struct IterateTrace {
    std::vector<double> objective;
    std::vector<double> rel_error;
    std::vector<double> residual_norm;
    std::vector<double> elapsed_s;

    std::size_t size() const { return objective.size(); }
    bool empty() const { return objective.empty(); }
};

}  // namespace qista
