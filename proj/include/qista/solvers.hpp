#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qista/metrics.hpp"
#include "qista/prox.hpp"
#include "qista/spectral.hpp"
#include "qista/types.hpp"

namespace qista {

/// What the solver loop exposes to an observer after each iteration.
/// `base` is the point the gradient step was taken from (x^{t-1}, or the
/// extrapolated point for FISTA) and `r` the point before thresholding.
template <typename Scalar>
struct IterationEvent {
    int iteration;
    const Vector<Scalar>& base;
    const Vector<Scalar>& r;
    const Vector<Scalar>& x_prev;
    const Vector<Scalar>& x;
};

template <typename Scalar = double>
struct SolveOptions {
    bool record_trace = false;
    std::function<void(const IterationEvent<Scalar>&)> observer;
};

template <typename Scalar = double>
struct SolveResult {
    RecoveryReport<Scalar> report;
    IterateTrace trace;
};

/// beta * A^T, materialised so every solver (and the default-filled unfolded
/// model) applies the identical matrix.
template <typename Scalar>
Matrix<Scalar> step_matrix(const ProblemInstance<Scalar>& inst, Scalar beta) {
    return (beta * inst.a.transpose()).eval();
}

/// step * (y - A x)
template <typename Scalar, typename Derived>
Vector<Scalar> descent_direction(const Matrix<Scalar>& step, const ProblemInstance<Scalar>& inst,
                                 const Eigen::MatrixBase<Derived>& x) {
    const Vector<Scalar> residual = inst.y - inst.a * x;
    return step * residual;
}

/// x + beta A^T (y - A x)
template <typename Scalar, typename Derived>
Vector<Scalar> gradient_step(const Eigen::MatrixBase<Derived>& x, const ProblemInstance<Scalar>& inst, Scalar beta) {
    detail::require(beta > Scalar(0), "gradient_step: beta must be > 0");
    detail::require(x.size() == inst.n(), "gradient_step: x length does not match n");
    detail::require(inst.y.size() == inst.m(), "gradient_step: y length does not match m");
    return x + descent_direction(step_matrix(inst, beta), inst, x);
}

/// 1 / ||A||_2^2
template <typename Scalar>
Scalar lipschitz_step(const ProblemInstance<Scalar>& inst) {
    const Scalar s = spectral_norm(inst.a);
    detail::require(s > Scalar(0), "lipschitz_step: sensing matrix is zero");
    return Scalar(1) / (s * s);
}

namespace detail {

template <typename Scalar>
void check_instance(const ProblemInstance<Scalar>& inst) {
    require(inst.a.rows() > 0 && inst.a.cols() > 0, "solver: empty sensing matrix");
    require(inst.y.size() == inst.a.rows(), "solver: y length does not match m");
    if (inst.x0) require(inst.x0->size() == inst.a.cols(), "solver: x0 length does not match n");
}

/// Shared iteration loop. `step(t, x_prev, base, r, x_next)` produces the next
/// iterate; `objective(x)` feeds the trace. Stops when ||x^t - x^{t-1}|| < tol
/// if `early_stop` is set.
template <typename Scalar, typename Step, typename Objective>
SolveResult<Scalar> run_loop(const ProblemInstance<Scalar>& inst, Vector<Scalar> x, Scalar tol, int max_iter,
                             bool early_stop, const SolveOptions<Scalar>& opts, Step&& step,
                             Objective&& objective) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const Eigen::Index n = inst.n();

    SolveResult<Scalar> out;
    Vector<Scalar> base(n), r(n), x_next(n);
    int t = 0;
    bool converged = false;
    while (t < max_iter) {
        ++t;
        step(t, x, base, r, x_next);
        const Scalar diff = (x_next - x).norm();
        if (opts.observer) opts.observer(IterationEvent<Scalar>{t, base, r, x, x_next});
        x.swap(x_next);
        if (opts.record_trace) {
            auto& tr = out.trace;
            tr.objective.push_back(double(objective(x)));
            tr.residual_norm.push_back(double((inst.y - inst.a * x).norm()));
            tr.rel_error.push_back(inst.x0 && inst.x0->norm() > Scalar(0) ? relative_error(x, *inst.x0)
                                                                           : std::nan(""));
            tr.elapsed_s.push_back(std::chrono::duration<double>(clock::now() - start).count());
        }
        if (early_stop && diff < tol) {
            converged = true;
            break;
        }
    }

    auto& rep = out.report;
    rep.wall_time_s = std::chrono::duration<double>(clock::now() - start).count();
    rep.iterations = t;
    rep.converged = converged;
    if (inst.x0 && inst.x0->norm() > Scalar(0)) {
        rep.relative_error = relative_error(x, *inst.x0);
        rep.snr_db = snr_db(x, *inst.x0);
    }
    rep.x_star = std::move(x);
    return out;
}

}  // namespace detail

/// QISTA: r = x + beta A^T (y - A x), then x_i = soft(r_i, lambda / (|r_i| + eps_i)^(1-q)).
/// The trace objective is the smoothed l_q objective with the configured lambda.
template <typename Scalar>
SolveResult<Scalar> solve_qista(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                const SolveOptions<Scalar>& opts = {}) {
    detail::check_instance(inst);
    cfg.validate(inst.n(), true);
    const Matrix<Scalar> step = step_matrix(inst, cfg.beta);
    return detail::run_loop(
        inst, cfg.initial_point(inst.n()), cfg.tol, cfg.max_iter, true, opts,
        [&](int, const Vector<Scalar>& x, Vector<Scalar>& base, Vector<Scalar>& r, Vector<Scalar>& next) {
            base = x;
            const Vector<Scalar> d = descent_direction(step, inst, x);
            r = x + d;
            next = qista_threshold(r, cfg.lambda, cfg.eps, cfg.q);
        },
        [&](const Vector<Scalar>& x) { return objective_approx(x, inst, cfg.lambda, cfg.q, cfg.eps); });
}

/// ISTA on 0.5 ||y - A x||^2 + lambda ||x||_1 with threshold beta * lambda.
template <typename Scalar>
SolveResult<Scalar> solve_ista(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                               const SolveOptions<Scalar>& opts = {}) {
    detail::check_instance(inst);
    cfg.validate(inst.n(), false);
    const Matrix<Scalar> step = step_matrix(inst, cfg.beta);
    const Scalar theta = cfg.beta * cfg.lambda;
    return detail::run_loop(
        inst, cfg.initial_point(inst.n()), cfg.tol, cfg.max_iter, true, opts,
        [&](int, const Vector<Scalar>& x, Vector<Scalar>& base, Vector<Scalar>& r, Vector<Scalar>& next) {
            base = x;
            const Vector<Scalar> d = descent_direction(step, inst, x);
            r = x + d;
            next = soft_threshold(r, theta);
        },
        [&](const Vector<Scalar>& x) { return objective_lasso(x, inst, cfg.lambda); });
}

/// FISTA: ISTA step from an extrapolated point, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2,
/// extrapolation weight (t_k - 1) / t_{k+1}, t_1 = 1. No restart.
template <typename Scalar>
SolveResult<Scalar> solve_fista(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                const SolveOptions<Scalar>& opts = {}) {
    detail::check_instance(inst);
    cfg.validate(inst.n(), false);
    const Matrix<Scalar> step = step_matrix(inst, cfg.beta);
    const Scalar theta = cfg.beta * cfg.lambda;
    Vector<Scalar> z = cfg.initial_point(inst.n());
    Scalar tk(1);
    return detail::run_loop(
        inst, cfg.initial_point(inst.n()), cfg.tol, cfg.max_iter, true, opts,
        [&](int, const Vector<Scalar>& x, Vector<Scalar>& base, Vector<Scalar>& r, Vector<Scalar>& next) {
            base = z;
            const Vector<Scalar> d = descent_direction(step, inst, z);
            r = z + d;
            next = soft_threshold(r, theta);
            const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * tk * tk)) / Scalar(2);
            z = next + ((tk - Scalar(1)) / t_next) * (next - x);
            tk = t_next;
        },
        [&](const Vector<Scalar>& x) { return objective_lasso(x, inst, cfg.lambda); });
}

/// IHT: gradient step then keep the k largest magnitudes.
template <typename Scalar>
SolveResult<Scalar> solve_iht(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg, Eigen::Index k,
                              const SolveOptions<Scalar>& opts = {}) {
    detail::check_instance(inst);
    cfg.validate(inst.n(), false);
    detail::require(k >= 0 && k <= inst.n(), "solve_iht: need 0 <= k <= n");
    const Matrix<Scalar> step = step_matrix(inst, cfg.beta);
    return detail::run_loop(
        inst, cfg.initial_point(inst.n()), cfg.tol, cfg.max_iter, true, opts,
        [&](int, const Vector<Scalar>& x, Vector<Scalar>& base, Vector<Scalar>& r, Vector<Scalar>& next) {
            base = x;
            const Vector<Scalar> d = descent_direction(step, inst, x);
            r = x + d;
            next = hard_threshold_keep_k(r, k);
        },
        [&](const Vector<Scalar>& x) { return data_fidelity(x, inst); });
}

/// Stored descent directions D^j of the momentum recursion.
///
/// After each layer every stored direction is multiplied by `decay`
/// (gamma / m). Directions that have decayed to exactly zero contribute
/// nothing to later sums and are dropped; layers_completed() still counts them.
template <typename Scalar = double>
class MomentumState {
public:
    /// Store `d`, return x_prev + sum of all stored directions (oldest first),
    /// then rescale the stored directions by `decay`.
    Vector<Scalar> advance(const Vector<Scalar>& x_prev, Vector<Scalar> d, Scalar decay) {
        directions_.push_back(std::move(d));
        Vector<Scalar> acc = directions_.front();
        for (std::size_t j = 1; j < directions_.size(); ++j) acc += directions_[j];
        Vector<Scalar> r = x_prev + acc;
        std::size_t keep = 0;
        for (std::size_t j = 0; j < directions_.size(); ++j) {
            directions_[j] *= decay;
            if (!directions_[j].isZero(Scalar(0))) {
                if (keep != j) directions_[keep] = std::move(directions_[j]);
                ++keep;
            }
        }
        directions_.resize(keep);
        ++completed_;
        return r;
    }

    const std::vector<Vector<Scalar>>& directions() const { return directions_; }
    int layers_completed() const { return completed_; }

private:
    std::vector<Vector<Scalar>> directions_;
    int completed_ = 0;
};

/// QISTA with accumulated momentum and fixed parameters (A^t = beta A^T,
/// lambda^t = lambda, eps^t = eps). `layers` caps the iteration count; the
/// stopping rule ||x^t - x^{t-1}|| < tol still applies.
template <typename Scalar>
SolveResult<Scalar> solve_qista_momentum(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                         int layers, const SolveOptions<Scalar>& opts = {}) {
    detail::check_instance(inst);
    cfg.validate(inst.n(), true);
    detail::require(layers > 0, "solve_qista_momentum: layers must be positive");
    const Matrix<Scalar> step = step_matrix(inst, cfg.beta);
    const Scalar decay = cfg.gamma / Scalar(inst.m());
    MomentumState<Scalar> momentum;
    return detail::run_loop(
        inst, cfg.initial_point(inst.n()), cfg.tol, layers, true, opts,
        [&](int, const Vector<Scalar>& x, Vector<Scalar>& base, Vector<Scalar>& r, Vector<Scalar>& next) {
            base = x;
            r = momentum.advance(x, descent_direction(step, inst, x), decay);
            next = qista_threshold(r, cfg.lambda, cfg.eps, cfg.q);
        },
        [&](const Vector<Scalar>& x) { return objective_approx(x, inst, cfg.lambda, cfg.q, cfg.eps); });
}

/// Parameters of one unfolded layer.
template <typename Scalar = double>
struct LayerParams {
    Matrix<Scalar> a_t;    // n x m, plays the role of beta A^T
    Scalar lambda_t = 0;
    Vector<Scalar> eps_t;  // n
};

template <typename Scalar = double>
struct UnfoldedModel {
    std::vector<LayerParams<Scalar>> layers;
    Scalar gamma = 0;
    Scalar q = Scalar(0.05);

    int depth() const { return int(layers.size()); }

    void validate(Eigen::Index m, Eigen::Index n) const {
        detail::require(!layers.empty(), "unfolded model: needs at least one layer");
        detail::require(q > Scalar(0) && q <= Scalar(1), "unfolded model: q must lie in (0, 1]");
        detail::require(gamma >= Scalar(0), "unfolded model: gamma must be >= 0");
        for (std::size_t t = 0; t < layers.size(); ++t) {
            const auto& l = layers[t];
            const std::string where = "unfolded model layer " + std::to_string(t) + ": ";
            detail::require(l.a_t.rows() == n && l.a_t.cols() == m, where + "A_t must be n x m");
            detail::require(l.eps_t.size() == n, where + "eps_t must have n entries");
            detail::require(l.lambda_t >= Scalar(0), where + "lambda_t must be >= 0");
            detail::require((l.eps_t.array() > Scalar(0)).all(), where + "eps_t must be strictly positive");
        }
    }
};

/// Every layer set to (beta A^T, lambda, eps).
template <typename Scalar>
UnfoldedModel<Scalar> default_unfolded_model(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                             int depth) {
    detail::require(depth > 0, "default_unfolded_model: depth must be positive");
    cfg.validate(inst.n(), true);
    UnfoldedModel<Scalar> model;
    model.gamma = cfg.gamma;
    model.q = cfg.q;
    model.layers.assign(std::size_t(depth), LayerParams<Scalar>{step_matrix(inst, cfg.beta), cfg.lambda, cfg.eps});
    return model;
}

/// Fixed-depth forward pass of the momentum-unfolded network. Runs exactly
/// model.depth() layers; `converged` is always false since no stopping rule
/// is evaluated.
template <typename Scalar>
SolveResult<Scalar> solve_unfolded(const ProblemInstance<Scalar>& inst, const UnfoldedModel<Scalar>& model,
                                   const Vector<Scalar>& x_init = {}, const SolveOptions<Scalar>& opts = {}) {
    detail::check_instance(inst);
    model.validate(inst.m(), inst.n());
    Vector<Scalar> x0 = x_init.size() == 0 ? Vector<Scalar>::Zero(inst.n()) : x_init;
    detail::require(x0.size() == inst.n(), "solve_unfolded: x_init length does not match n");
    const Scalar decay = model.gamma / Scalar(inst.m());
    MomentumState<Scalar> momentum;
    int current = 0;
    return detail::run_loop(
        inst, std::move(x0), Scalar(0), model.depth(), false, opts,
        [&](int t, const Vector<Scalar>& x, Vector<Scalar>& base, Vector<Scalar>& r, Vector<Scalar>& next) {
            const auto& layer = model.layers[std::size_t(t - 1)];
            current = t - 1;
            base = x;
            r = momentum.advance(x, descent_direction(layer.a_t, inst, x), decay);
            next = qista_threshold(r, layer.lambda_t, layer.eps_t, model.q);
        },
        [&](const Vector<Scalar>& x) {
            const auto& layer = model.layers[std::size_t(current)];
            return objective_approx(x, inst, layer.lambda_t, model.q, layer.eps_t);
        });
}

}  // namespace qista
