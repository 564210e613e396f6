#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qista/instance.hpp"
#include "qista/solvers.hpp"

namespace qista {

enum class SolverKind { ista, fista, iht, qista, qista_momentum, unfolded };

std::string_view to_string(SolverKind kind);
std::optional<SolverKind> parse_solver(std::string_view name);

/// Named experimental regime: how instances are drawn and how the solver
/// parameters are derived from an instance.
struct Preset {
    std::string name;
    int n = 1024;  // default problem size for sweeps
    int m = 256;
    bool column_normalized = false;
    bool bernoulli_signal = false;  // density k/n instead of exactly k nonzeros
    double q = 0.05;
    double lambda_factor = 1e-4;    // lambda = lambda_factor * beta
    double eps = 1.0;
    double gamma = 0.0;
    double tol = 1e-7;
    int max_iter = 20000;
    int unfolded_layers = 16;

    /// n = 1024, m = 256, N(0,1) sensing entries, exactly k-sparse N(0,1)
    /// signals; beta = 1/||A||^2, lambda = 1e-4 beta, q = 0.05, eps = 1.
    static Preset paper_5_1();
    /// n = 500, m = 250, N(0,1/m) sensing entries, Bernoulli-Gaussian
    /// signals (density k/n, 0.1 by default); beta = 1/||A||^2,
    /// lambda = 1e-4 beta, q = 0.05, eps = 0.1, gamma = 0.1.
    static Preset paper_6_1();
    static std::optional<Preset> by_name(std::string_view name);

    InstanceSpec instance_spec(Eigen::Index m, Eigen::Index n, Eigen::Index k, std::optional<double> snr_db) const;

    /// Solver parameters for `inst`, with beta = 1/||A||_2^2.
    SolverConfig<double> config_for(const ProblemInstance<double>& inst) const;
};

/// Runs `kind` on `inst`. `k` feeds IHT's sparsity level; the unfolded
/// solver uses a default-filled model of depth preset.unfolded_layers.
SolveResult<double> run_solver(SolverKind kind, const ProblemInstance<double>& inst, const SolverConfig<double>& cfg,
                               const Preset& preset, Eigen::Index k, const SolveOptions<double>& opts = {});

struct SweepSpec {
    int n = 1024;
    int m = 256;
    std::vector<int> k_values;
    int trials = 20;
    SolverKind solver = SolverKind::qista;
    Preset preset = Preset::paper_5_1();
    std::uint64_t master_seed = 0;
    double success_threshold = 1e-4;
    std::optional<double> noise_snr_db;
    unsigned jobs = 1;
    bool record_timing = true;  // false writes 0 for wall time, making output byte-reproducible

    void validate() const;
};

struct SweepRow {
    int k = 0;
    int trials = 0;
    int successes = 0;
    double success_rate = 0.0;
    double mean_iterations = 0.0;
    double mean_re = 0.0;
    double mean_wall_time_s = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

/// Per-trial outcome, kept for callers that need more than the aggregates.
struct TrialRecord {
    int k = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    int iterations = 0;
    bool converged = false;
    double relative_error = 0.0;
    double wall_time_s = 0.0;
};

/// Success-rate sweep over sparsity. Trial (k, i) uses the instance seed
/// trial_seed(master_seed, k, i); results do not depend on spec.jobs.
SweepResult run_success_rate_sweep(const SweepSpec& spec, std::vector<TrialRecord>* trials_out = nullptr);

/// Runs the solver with trace recording on; the trace carries elapsed times.
IterateTrace run_convergence_trace(const ProblemInstance<double>& inst, SolverKind kind,
                                   const SolverConfig<double>& cfg, const Preset& preset, Eigen::Index k,
                                   RecoveryReport<double>* report = nullptr);

inline constexpr std::string_view kSweepCsvHeader =
    "k,trials,successes,success_rate,mean_iterations,mean_re,mean_wall_time_s";
inline constexpr std::string_view kTraceCsvHeader = "iter,objective,rel_error,residual_norm,elapsed_s";

void write_csv(std::ostream& os, const SweepResult& result);
void write_csv(std::ostream& os, const IterateTrace& trace);
void write_csv(const std::filesystem::path& path, const SweepResult& result);
void write_csv(const std::filesystem::path& path, const IterateTrace& trace);

SweepResult read_sweep_csv(std::istream& is);
IterateTrace read_trace_csv(std::istream& is);

/// "start:stop:step" (inclusive stop) or a comma-separated list.
std::vector<int> parse_k_range(std::string_view text);

}  // namespace qista
