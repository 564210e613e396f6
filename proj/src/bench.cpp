#include "qista/bench.hpp"

#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "qista/io.hpp"

namespace qista {

std::string_view to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::ista: return "ista";
        case SolverKind::fista: return "fista";
        case SolverKind::iht: return "iht";
        case SolverKind::qista: return "qista";
        case SolverKind::qista_momentum: return "qista-momentum";
        case SolverKind::unfolded: return "unfolded";
    }
    return "?";
}

std::optional<SolverKind> parse_solver(std::string_view name) {
    for (auto kind : {SolverKind::ista, SolverKind::fista, SolverKind::iht, SolverKind::qista,
                      SolverKind::qista_momentum, SolverKind::unfolded})
        if (to_string(kind) == name) return kind;
    return std::nullopt;
}

Preset Preset::paper_5_1() {
    Preset p;
    p.name = "paper-5.1";
    return p;
}

Preset Preset::paper_6_1() {
    Preset p;
    p.name = "paper-6.1";
    p.n = 500;
    p.m = 250;
    p.column_normalized = true;
    p.bernoulli_signal = true;
    p.eps = 0.1;
    p.gamma = 0.1;
    return p;
}

std::optional<Preset> Preset::by_name(std::string_view name) {
    if (name == "paper-5.1") return paper_5_1();
    if (name == "paper-6.1") return paper_6_1();
    return std::nullopt;
}

InstanceSpec Preset::instance_spec(Eigen::Index m, Eigen::Index n, Eigen::Index k,
                                   std::optional<double> snr_db) const {
    InstanceSpec s;
    s.m = m;
    s.n = n;
    s.k = k;
    s.column_normalized = column_normalized;
    if (bernoulli_signal) s.bernoulli_p = double(k) / double(n);
    s.snr_db = snr_db;
    return s;
}

SolverConfig<double> Preset::config_for(const ProblemInstance<double>& inst) const {
    SolverConfig<double> cfg;
    cfg.beta = lipschitz_step(inst);
    cfg.lambda = lambda_factor * cfg.beta;
    cfg.q = q;
    cfg.eps = Vector<double>::Constant(inst.n(), eps);
    cfg.gamma = gamma;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    return cfg;
}

SolveResult<double> run_solver(SolverKind kind, const ProblemInstance<double>& inst, const SolverConfig<double>& cfg,
                               const Preset& preset, Eigen::Index k, const SolveOptions<double>& opts) {
    switch (kind) {
        case SolverKind::ista: return solve_ista(inst, cfg, opts);
        case SolverKind::fista: return solve_fista(inst, cfg, opts);
        case SolverKind::iht: return solve_iht(inst, cfg, k, opts);
        case SolverKind::qista: return solve_qista(inst, cfg, opts);
        case SolverKind::qista_momentum: return solve_qista_momentum(inst, cfg, cfg.max_iter, opts);
        case SolverKind::unfolded:
            return solve_unfolded(inst, default_unfolded_model(inst, cfg, preset.unfolded_layers), cfg.x_init, opts);
    }
    throw InvalidInput("run_solver: unknown solver");
}

void SweepSpec::validate() const {
    detail::require(m > 0 && m < n, "sweep: need 0 < m < n");
    detail::require(trials >= 1, "sweep: trials must be >= 1");
    detail::require(!k_values.empty(), "sweep: k_values must not be empty");
    for (int k : k_values) detail::require(k >= 1 && k <= n, "sweep: every k must lie in [1, n]");
    detail::require(success_threshold > 0.0, "sweep: success threshold must be > 0");
    if (noise_snr_db) detail::require(std::isfinite(*noise_snr_db), "sweep: noise SNR must be finite");
}

namespace {

TrialRecord run_trial(const SweepSpec& spec, int k, int trial) {
    TrialRecord rec;
    rec.k = k;
    rec.trial = trial;
    rec.seed = trial_seed(spec.master_seed, std::uint32_t(k), std::uint32_t(trial));
    const auto inst = make_instance(spec.preset.instance_spec(spec.m, spec.n, k, spec.noise_snr_db), rec.seed);
    const auto cfg = spec.preset.config_for(inst);
    const auto res = run_solver(spec.solver, inst, cfg, spec.preset, k);
    rec.iterations = res.report.iterations;
    rec.converged = res.report.converged;
    // A Bernoulli draw can be all zeros; fall back to the absolute error then.
    rec.relative_error = res.report.relative_error ? *res.report.relative_error : double(res.report.x_star.norm());
    rec.wall_time_s = spec.record_timing ? res.report.wall_time_s : 0.0;
    return rec;
}

}  // namespace

SweepResult run_success_rate_sweep(const SweepSpec& spec, std::vector<TrialRecord>* trials_out) {
    spec.validate();
    const std::size_t per_k = std::size_t(spec.trials);
    const std::size_t total = spec.k_values.size() * per_k;
    std::vector<TrialRecord> records(total);

    unsigned jobs = spec.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.jobs;
    jobs = unsigned(std::min<std::size_t>(jobs, total));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < total;) {
            try {
                records[i] = run_trial(spec, spec.k_values[i / per_k], int(i % per_k));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = total;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    // Aggregate in (k, trial) order so sums do not depend on scheduling.
    SweepResult result;
    for (std::size_t c = 0; c < spec.k_values.size(); ++c) {
        SweepRow row;
        row.k = spec.k_values[c];
        row.trials = spec.trials;
        double iters = 0, re = 0, wall = 0;
        for (std::size_t t = 0; t < per_k; ++t) {
            const auto& r = records[c * per_k + t];
            if (r.relative_error <= spec.success_threshold) ++row.successes;
            iters += r.iterations;
            re += r.relative_error;
            wall += r.wall_time_s;
        }
        row.success_rate = double(row.successes) / double(row.trials);
        row.mean_iterations = iters / double(row.trials);
        row.mean_re = re / double(row.trials);
        row.mean_wall_time_s = wall / double(row.trials);
        result.rows.push_back(row);
    }
    if (trials_out) *trials_out = std::move(records);
    return result;
}

IterateTrace run_convergence_trace(const ProblemInstance<double>& inst, SolverKind kind,
                                   const SolverConfig<double>& cfg, const Preset& preset, Eigen::Index k,
                                   RecoveryReport<double>* report) {
    SolveOptions<double> opts;
    opts.record_trace = true;
    auto res = run_solver(kind, inst, cfg, preset, k, opts);
    if (report) *report = std::move(res.report);
    return std::move(res.trace);
}

void write_csv(std::ostream& os, const SweepResult& result) {
    os << kSweepCsvHeader << '\n';
    for (const auto& r : result.rows) {
        os << r.k << ',' << r.trials << ',' << r.successes << ',' << format_double(r.success_rate) << ','
           << format_double(r.mean_iterations) << ',' << format_double(r.mean_re) << ','
           << format_double(r.mean_wall_time_s) << '\n';
    }
}

void write_csv(std::ostream& os, const IterateTrace& trace) {
    os << kTraceCsvHeader << '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double elapsed = i < trace.elapsed_s.size() ? trace.elapsed_s[i] : 0.0;
        os << (i + 1) << ',' << format_double(trace.objective[i]) << ',' << format_double(trace.rel_error[i]) << ','
           << format_double(trace.residual_norm[i]) << ',' << format_double(elapsed) << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const SweepResult& result) {
    atomic_write(path, [&](std::ostream& os) { write_csv(os, result); });
}

void write_csv(const std::filesystem::path& path, const IterateTrace& trace) {
    atomic_write(path, [&](std::ostream& os) { write_csv(os, trace); });
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double csv_number(const std::string& cell, std::size_t line) {
    if (cell == "nan" || cell == "-nan") return std::nan("");
    const auto v = parse_double(cell);
    if (!v) throw FormatError("csv line " + std::to_string(line) + ": bad number '" + cell + "'", line);
    return *v;
}

int csv_int(const std::string& cell, std::size_t line) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw FormatError("csv line " + std::to_string(line) + ": bad integer '" + cell + "'", line);
    return v;
}

template <typename OnRow>
void read_csv(std::istream& is, std::string_view header, std::size_t columns, OnRow&& on_row) {
    std::string line;
    if (!std::getline(is, line) || line != header) throw FormatError("csv: missing or unexpected header", 1);
    std::size_t no = 1;
    while (std::getline(is, line)) {
        ++no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != columns)
            throw FormatError("csv line " + std::to_string(no) + ": expected " + std::to_string(columns) + " columns",
                              no);
        on_row(cells, no);
    }
}

}  // namespace

SweepResult read_sweep_csv(std::istream& is) {
    SweepResult out;
    read_csv(is, kSweepCsvHeader, 7, [&](const std::vector<std::string>& c, std::size_t no) {
        out.rows.push_back({csv_int(c[0], no), csv_int(c[1], no), csv_int(c[2], no), csv_number(c[3], no),
                            csv_number(c[4], no), csv_number(c[5], no), csv_number(c[6], no)});
    });
    return out;
}

IterateTrace read_trace_csv(std::istream& is) {
    IterateTrace out;
    read_csv(is, kTraceCsvHeader, 5, [&](const std::vector<std::string>& c, std::size_t no) {
        if (csv_int(c[0], no) != int(out.size() + 1))
            throw FormatError("csv line " + std::to_string(no) + ": iterations must be consecutive", no);
        out.objective.push_back(csv_number(c[1], no));
        out.rel_error.push_back(csv_number(c[2], no));
        out.residual_norm.push_back(csv_number(c[3], no));
        out.elapsed_s.push_back(csv_number(c[4], no));
    });
    return out;
}

std::vector<int> parse_k_range(std::string_view text) {
    const auto to_int = [&](std::string_view s) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
            throw InvalidInput("bad k specification '" + std::string(text) + "'");
        return v;
    };
    std::vector<int> out;
    if (text.find(':') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t pos = 0;
        while (true) {
            const auto c = text.find(':', pos);
            parts.push_back(text.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
            if (c == std::string_view::npos) break;
            pos = c + 1;
        }
        if (parts.size() != 3) throw InvalidInput("k range must be start:stop:step, got '" + std::string(text) + "'");
        const int start = to_int(parts[0]), stop = to_int(parts[1]), step = to_int(parts[2]);
        if (step <= 0 || stop < start) throw InvalidInput("k range needs step > 0 and stop >= start");
        for (int k = start; k <= stop; k += step) out.push_back(k);
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto c = text.find(',', pos);
            out.push_back(to_int(text.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
            if (c == std::string_view::npos) break;
            pos = c + 1;
        }
    }
    return out;
}

}  // namespace qista
