#include "qista/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "qista/bench.hpp"
#include "qista/io.hpp"
#include "qista/layer_params.hpp"

namespace qista::cli {

namespace {

using nlohmann::ordered_json;

/// Bad flag combination or value detected after parsing, before any work.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kPresetNames{"paper-5.1", "paper-6.1"};
const std::vector<std::string> kSolverNames{"ista", "fista", "iht", "qista", "qista-momentum", "unfolded"};

/// Preset selection plus per-field overrides, shared by solve, trace and sweep.
struct PresetFlags {
    std::string name = "paper-5.1";
    double q = 0, lambda_factor = 0, eps = 0, gamma = 0, tol = 0;
    int max_iter = 0, layers = 0;
    CLI::Option *q_opt{}, *lf_opt{}, *eps_opt{}, *gamma_opt{}, *tol_opt{}, *iter_opt{}, *layers_opt{};

    void add(CLI::App& app) {
        app.add_option("--preset", name, "Parameter preset")->check(CLI::IsMember(kPresetNames))->capture_default_str();
        q_opt = app.add_option("--q", q, "Override q, in (0, 1]")->check(CLI::Range(0.0, 1.0));
        lf_opt = app.add_option("--lambda-factor", lambda_factor, "Override lambda / beta")
                     ->check(CLI::NonNegativeNumber);
        eps_opt = app.add_option("--eps", eps, "Override the (uniform) eps")->check(CLI::PositiveNumber);
        gamma_opt = app.add_option("--gamma", gamma, "Override the momentum weight")->check(CLI::NonNegativeNumber);
        tol_opt = app.add_option("--tol", tol, "Override the stopping tolerance")->check(CLI::PositiveNumber);
        iter_opt = app.add_option("--max-iter", max_iter, "Override the iteration cap")->check(CLI::PositiveNumber);
        layers_opt = app.add_option("--layers", layers, "Depth of the default unfolded model")
                         ->check(CLI::PositiveNumber);
    }

    Preset resolve() const {
        Preset p = *Preset::by_name(name);
        if (*q_opt) {
            if (!(q > 0.0)) throw UsageError("--q must lie in (0, 1]");
            p.q = q;
        }
        if (*lf_opt) p.lambda_factor = lambda_factor;
        if (*eps_opt) p.eps = eps;
        if (*gamma_opt) p.gamma = gamma;
        if (*tol_opt) p.tol = tol;
        if (*iter_opt) p.max_iter = max_iter;
        if (*layers_opt) p.unfolded_layers = layers;
        return p;
    }
};

SolverKind solver_from(const std::string& name) {
    const auto kind = parse_solver(name);
    if (!kind) throw UsageError("unknown solver '" + name + "'");
    return *kind;
}

ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json report_json(SolverKind kind, const Preset& preset, const ProblemInstance<double>& inst,
                         const RecoveryReport<double>& rep) {
    ordered_json j;
    j["solver"] = std::string(to_string(kind));
    j["preset"] = preset.name;
    j["m"] = inst.m();
    j["n"] = inst.n();
    j["k"] = inst.k;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["relative_error"] = optional_number(rep.relative_error);
    j["snr_db"] = optional_number(rep.snr_db);
    j["x_star_nnz"] = (rep.x_star.array() != 0.0).count();
    j["wall_time_s"] = rep.wall_time_s;
    return j;
}

void write_vector(const std::string& path, const Vector<double>& v) {
    atomic_write(path, [&](std::ostream& os) {
        for (Eigen::Index i = 0; i < v.size(); ++i) os << format_double(v(i)) << '\n';
    });
}

// ---- generate ---------------------------------------------------------------

struct GenerateCmd {
    std::string preset = "paper-5.1";
    int n = 0, m = 0, k = 0;
    double p = 0, snr_db = 0;
    bool normalized = false;
    std::uint64_t seed = 0;
    std::string out;
    CLI::Option *n_opt{}, *m_opt{}, *p_opt{}, *snr_opt{};

    void add(CLI::App& app) {
        app.add_option("--preset", preset, "Instance family")->check(CLI::IsMember(kPresetNames))->capture_default_str();
        n_opt = app.add_option("--n", n, "Signal length (default: preset)")->check(CLI::PositiveNumber);
        m_opt = app.add_option("--m", m, "Number of measurements (default: preset)")->check(CLI::PositiveNumber);
        app.add_option("--k", k, "Sparsity (expected support size for Bernoulli signals)")
            ->required()
            ->check(CLI::NonNegativeNumber);
        p_opt = app.add_option("--p", p, "Bernoulli-Gaussian density instead of exactly k nonzeros")
                    ->check(CLI::Range(0.0, 1.0));
        app.add_flag("--normalized", normalized, "N(0, 1/m) sensing entries");
        snr_opt = app.add_option("--snr-db", snr_db, "Add measurement noise at this SNR");
        app.add_option("--seed", seed, "Random seed")->capture_default_str();
        app.add_option("--out", out, "Instance file to write")->required();
    }

    int run(std::ostream& os) const {
        const Preset pr = *Preset::by_name(preset);
        const int nn = *n_opt ? n : pr.n;
        const int mm = *m_opt ? m : pr.m;
        if (!(mm < nn)) throw UsageError("need m < n");
        if (k > nn) throw UsageError("need k <= n");
        if (*snr_opt && !std::isfinite(snr_db)) throw UsageError("--snr-db must be finite");
        auto spec = pr.instance_spec(mm, nn, k, *snr_opt ? std::optional<double>(snr_db) : std::nullopt);
        if (normalized) spec.column_normalized = true;
        if (*p_opt) spec.bernoulli_p = p;

        const auto inst = make_instance(spec, seed);
        if (spec.snr_db && inst.y.norm() == 0.0) throw InvalidInput("cannot add noise to a zero measurement");
        save_instance(out, inst);
        os << "wrote " << inst.m() << "x" << inst.n() << " instance with "
           << (inst.x0->array() != 0.0).count() << " nonzeros to " << out << '\n';
        return 0;
    }
};

// ---- solve / trace ----------------------------------------------------------

struct SolveCmd {
    bool trace_mode = false;
    std::string instance, solver = "qista", params, export_params, out, trace_out;
    int k = 0;
    PresetFlags preset;
    CLI::Option *k_opt{}, *params_opt{};

    void add(CLI::App& app, bool trace) {
        trace_mode = trace;
        app.add_option("--instance", instance, "Instance file")->required();
        app.add_option("--solver", solver, "Solver")->check(CLI::IsMember(kSolverNames))->capture_default_str();
        preset.add(app);
        k_opt = app.add_option("--k", k, "Sparsity level for IHT (default: the instance's k)")
                    ->check(CLI::NonNegativeNumber);
        params_opt = app.add_option("--params", params, "Layer-parameter file for the unfolded solver");
        if (trace) {
            app.add_option("--out", trace_out, "Trace CSV to write")->required();
        } else {
            app.add_option("--export-params", export_params, "Write the unfolded model used (or the default one)");
            app.add_option("--out", out, "Write the recovered signal, one value per line");
        }
    }

    int run(std::ostream& os, std::ostream& es) const {
        const SolverKind kind = solver_from(solver);
        const Preset pr = preset.resolve();
        if (*params_opt && kind != SolverKind::unfolded) throw UsageError("--params requires --solver unfolded");

        const auto inst = load_instance(instance);
        const Eigen::Index sparsity = *k_opt ? k : inst.k;
        if (sparsity > inst.n()) throw InvalidInput("--k exceeds n");
        const auto cfg = pr.config_for(inst);

        std::optional<UnfoldedModel<double>> model;
        if (*params_opt) {
            auto loaded = load_layer_params(params, inst.m(), inst.n());
            es << loaded.summary.describe() << '\n';
            model = std::move(loaded.model);
        } else if (kind == SolverKind::unfolded || !export_params.empty()) {
            model = default_unfolded_model(inst, cfg, pr.unfolded_layers);
        }

        SolveOptions<double> opts;
        opts.record_trace = trace_mode;
        auto res = kind == SolverKind::unfolded ? solve_unfolded(inst, *model, cfg.x_init, opts)
                                                : run_solver(kind, inst, cfg, pr, sparsity, opts);

        if (trace_mode) write_csv(std::filesystem::path(trace_out), res.trace);
        if (!out.empty()) write_vector(out, res.report.x_star);
        if (!export_params.empty()) save_layer_params(export_params, *model);
        os << report_json(kind, pr, inst, res.report).dump(2) << '\n';
        return 0;
    }
};

// ---- sweep ------------------------------------------------------------------

struct SweepCmd {
    int n = 0, m = 0, trials = 20;
    std::string k_range, solver = "qista", out;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    double snr_db = 0, threshold = 1e-4;
    bool no_timing = false;
    PresetFlags preset;
    CLI::Option *n_opt{}, *m_opt{}, *snr_opt{};

    void add(CLI::App& app) {
        n_opt = app.add_option("--n", n, "Signal length (default: preset)")->check(CLI::PositiveNumber);
        m_opt = app.add_option("--m", m, "Number of measurements (default: preset)")->check(CLI::PositiveNumber);
        app.add_option("--k", k_range, "Sparsity values, start:stop:step or a comma list")->required();
        app.add_option("--trials", trials, "Trials per k")->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--solver", solver, "Solver")->check(CLI::IsMember(kSolverNames))->capture_default_str();
        preset.add(app);
        app.add_option("--seed", seed, "Master seed")->capture_default_str();
        app.add_option("--out", out, "Sweep CSV to write (default: stdout)");
        app.add_option("--jobs", jobs, "Worker threads, 0 = all cores")->capture_default_str();
        snr_opt = app.add_option("--snr-db", snr_db, "Measurement noise SNR");
        app.add_option("--threshold", threshold, "Success threshold on relative error")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app.add_flag("--no-timing", no_timing, "Write 0 for wall times so output is byte-reproducible");
    }

    int run(std::ostream& os) const {
        SweepSpec spec;
        spec.preset = preset.resolve();
        spec.n = *n_opt ? n : spec.preset.n;
        spec.m = *m_opt ? m : spec.preset.m;
        spec.solver = solver_from(solver);
        spec.trials = trials;
        spec.master_seed = seed;
        spec.success_threshold = threshold;
        spec.jobs = jobs;
        spec.record_timing = !no_timing;
        if (*snr_opt) spec.noise_snr_db = snr_db;
        try {
            spec.k_values = parse_k_range(k_range);
            spec.validate();
        } catch (const InvalidInput& e) {
            throw UsageError(e.what());
        }

        const auto result = run_success_rate_sweep(spec);
        if (out.empty())
            write_csv(os, result);
        else
            write_csv(std::filesystem::path(out), result);
        return 0;
    }
};

// ---- validate-params --------------------------------------------------------

struct ValidateParamsCmd {
    std::string params;
    int n = 0, m = 0;

    void add(CLI::App& app) {
        app.add_option("--params", params, "Layer-parameter file")->required();
        app.add_option("--n", n, "Signal length")->required()->check(CLI::PositiveNumber);
        app.add_option("--m", m, "Number of measurements")->required()->check(CLI::PositiveNumber);
    }

    int run(std::ostream& os) const {
        const auto loaded = load_layer_params(params, m, n);
        os << params << ": ok, " << loaded.summary.describe() << '\n';
        for (const auto& c : loaded.summary.clamped)
            os << "  layers[" << c.layer << "].eps_t[" << c.index << "] = " << format_double(c.original) << '\n';
        return 0;
    }
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse recovery with QISTA and classical thresholding solvers", "qista"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    GenerateCmd generate;
    SolveCmd solve, trace;
    SweepCmd sweep;
    ValidateParamsCmd validate;
    auto* gen_app = app.add_subcommand("generate", "Write a seeded synthetic instance");
    auto* solve_app = app.add_subcommand("solve", "Recover the signal of an instance and print a JSON report");
    auto* trace_app = app.add_subcommand("trace", "Write a per-iteration convergence trace as CSV");
    auto* sweep_app = app.add_subcommand("sweep", "Success rate versus sparsity, written as CSV");
    auto* val_app = app.add_subcommand("validate-params", "Check a layer-parameter file against the schema");
    generate.add(*gen_app);
    solve.add(*solve_app, false);
    trace.add(*trace_app, true);
    sweep.add(*sweep_app);
    validate.add(*val_app);

    std::vector<const char*> argv{"qista"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_app->parsed()) return generate.run(out);
        if (solve_app->parsed()) return solve.run(out, err);
        if (trace_app->parsed()) return trace.run(out, err);
        if (sweep_app->parsed()) return sweep.run(out);
        return validate.run(out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for more information.\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace qista::cli
