#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qista/bench.hpp"

using namespace qista;
namespace fs = std::filesystem;

namespace {

SweepSpec small_spec() {
    SweepSpec spec;
    spec.n = 64;
    spec.m = 32;
    spec.k_values = {1, 3, 12};
    spec.trials = 3;
    spec.solver = SolverKind::iht;
    spec.master_seed = 21;
    spec.preset.column_normalized = true;
    spec.preset.max_iter = 3000;
    spec.record_timing = false;
    return spec;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

}  // namespace

TEST_CASE("presets") {
    const auto p5 = Preset::paper_5_1();
    CHECK(p5.name == "paper-5.1");
    CHECK(p5.n == 1024);
    CHECK(p5.m == 256);
    CHECK_FALSE(p5.column_normalized);
    CHECK_FALSE(p5.bernoulli_signal);
    CHECK(p5.q == 0.05);
    CHECK(p5.lambda_factor == 1e-4);
    CHECK(p5.eps == 1.0);
    CHECK(p5.gamma == 0.0);

    const auto p6 = Preset::paper_6_1();
    CHECK(p6.n == 500);
    CHECK(p6.m == 250);
    CHECK(p6.column_normalized);
    CHECK(p6.bernoulli_signal);
    CHECK(p6.gamma == 0.1);
    CHECK(p6.instance_spec(250, 500, 50, std::nullopt).bernoulli_p == 0.1);

    CHECK(Preset::by_name("paper-6.1")->name == "paper-6.1");
    CHECK_FALSE(Preset::by_name("paper-7"));

    const auto inst = make_instance<double>(p5.instance_spec(16, 32, 2, std::nullopt), 3);
    const auto cfg = p5.config_for(inst);
    CHECK(cfg.beta == doctest::Approx(1.0 / std::pow(spectral_norm(inst.a), 2)).epsilon(1e-14));
    CHECK(cfg.lambda == doctest::Approx(1e-4 * cfg.beta).epsilon(1e-15));
    CHECK((cfg.eps.array() == 1.0).all());
    CHECK(cfg.tol == 1e-7);
    CHECK(cfg.max_iter == 20000);
}

TEST_CASE("solver names") {
    for (auto k : {SolverKind::ista, SolverKind::fista, SolverKind::iht, SolverKind::qista, SolverKind::qista_momentum,
                   SolverKind::unfolded})
        CHECK(parse_solver(to_string(k)) == k);
    CHECK_FALSE(parse_solver("lista"));
}

TEST_CASE("parse_k_range") {
    CHECK(parse_k_range("50:120:10") == std::vector<int>{50, 60, 70, 80, 90, 100, 110, 120});
    CHECK(parse_k_range("5:9:3") == std::vector<int>{5, 8});
    CHECK(parse_k_range("50,70,80") == std::vector<int>{50, 70, 80});
    CHECK(parse_k_range("7") == std::vector<int>{7});
    CHECK_THROWS_AS(parse_k_range("1:2"), InvalidInput);
    CHECK_THROWS_AS(parse_k_range("5:1:1"), InvalidInput);
    CHECK_THROWS_AS(parse_k_range("1:5:0"), InvalidInput);
    CHECK_THROWS_AS(parse_k_range("a,b"), InvalidInput);
    CHECK_THROWS_AS(parse_k_range("1,,2"), InvalidInput);
}

TEST_CASE("sweep validation") {
    auto spec = small_spec();
    spec.trials = 0;
    CHECK_THROWS_AS(run_success_rate_sweep(spec), InvalidInput);
    spec = small_spec();
    spec.k_values.clear();
    CHECK_THROWS_AS(run_success_rate_sweep(spec), InvalidInput);
    spec = small_spec();
    spec.k_values = {0};
    CHECK_THROWS_AS(run_success_rate_sweep(spec), InvalidInput);
    spec = small_spec();
    spec.k_values = {65};
    CHECK_THROWS_AS(run_success_rate_sweep(spec), InvalidInput);
    spec = small_spec();
    spec.m = 64;
    CHECK_THROWS_AS(run_success_rate_sweep(spec), InvalidInput);
}

TEST_CASE("success-rate sweep") {
    SUBCASE("trivially easy cell") {
        auto spec = small_spec();
        spec.solver = SolverKind::qista;
        spec.k_values = {1};
        spec.trials = 1;
        spec.preset.max_iter = 200'000;
        const auto r = run_success_rate_sweep(spec);
        REQUIRE(r.rows.size() == 1);
        CHECK(r.rows[0].success_rate == 1.0);
    }
    SUBCASE("rows are consistent with the trials") {
        const auto spec = small_spec();
        std::vector<TrialRecord> trials;
        const auto r = run_success_rate_sweep(spec, &trials);
        REQUIRE(r.rows.size() == 3);
        REQUIRE(trials.size() == 9);
        std::set<std::uint64_t> seeds;
        for (std::size_t c = 0; c < 3; ++c) {
            const auto& row = r.rows[c];
            CHECK(row.k == spec.k_values[c]);
            CHECK(row.trials == 3);
            CHECK(row.successes <= row.trials);
            CHECK(row.success_rate == double(row.successes) / 3.0);
            double re = 0, it = 0;
            int ok = 0;
            for (int t = 0; t < 3; ++t) {
                const auto& tr = trials[c * 3 + std::size_t(t)];
                CHECK(tr.k == row.k);
                CHECK(tr.seed == trial_seed(spec.master_seed, std::uint32_t(row.k), std::uint32_t(t)));
                seeds.insert(tr.seed);
                re += tr.relative_error;
                it += tr.iterations;
                ok += tr.relative_error <= spec.success_threshold;
            }
            CHECK(row.successes == ok);
            CHECK(row.mean_re == re / 3.0);
            CHECK(row.mean_iterations == it / 3.0);
            CHECK(row.mean_wall_time_s == 0.0);
        }
        CHECK(seeds.size() == 9);
        // IHT recovers the sparsest cell and fails the densest one.
        CHECK(r.rows[0].success_rate == 1.0);
        CHECK(r.rows[2].success_rate < 1.0);
    }
    SUBCASE("deterministic, and independent of the job count") {
        auto spec = small_spec();
        const auto serial = csv_of(run_success_rate_sweep(spec));
        CHECK(csv_of(run_success_rate_sweep(spec)) == serial);
        spec.jobs = 3;
        CHECK(csv_of(run_success_rate_sweep(spec)) == serial);
        spec.master_seed = 22;
        CHECK(csv_of(run_success_rate_sweep(spec)) != serial);
    }
    SUBCASE("timing is recorded when asked") {
        auto spec = small_spec();
        spec.record_timing = true;
        for (const auto& row : run_success_rate_sweep(spec).rows) CHECK(row.mean_wall_time_s > 0.0);
    }
    SUBCASE("every solver and preset runs") {
        for (auto kind : {SolverKind::ista, SolverKind::fista, SolverKind::iht, SolverKind::qista,
                          SolverKind::qista_momentum, SolverKind::unfolded}) {
            auto spec = small_spec();
            spec.preset = Preset::paper_6_1();
            spec.preset.max_iter = 300;
            spec.solver = kind;
            spec.noise_snr_db = 20.0;
            spec.k_values = {4};
            spec.trials = 2;
            const auto r = run_success_rate_sweep(spec);
            CHECK(r.rows[0].mean_iterations > 0);
            CHECK(std::isfinite(r.rows[0].mean_re));
        }
    }
    SUBCASE("worker failures propagate") {
        auto spec = small_spec();
        spec.preset.q = 0.0;  // rejected by the solver, not by the spec
        spec.jobs = 2;
        CHECK_THROWS_AS(run_success_rate_sweep(spec), InvalidInput);
    }
}

TEST_CASE("convergence trace") {
    const auto p = Preset::paper_5_1();
    SUBCASE("zero measurement gives a single row") {
        auto inst = make_instance<double>(p.instance_spec(16, 32, 2, std::nullopt), 1);
        inst.y.setZero();
        const auto tr = run_convergence_trace(inst, SolverKind::qista, p.config_for(inst), p, 2);
        CHECK(tr.size() == 1);
    }
    SUBCASE("lengths match the report and ISTA descends") {
        const auto inst = make_instance<double>(p.instance_spec(32, 64, 3, std::nullopt), 2);
        auto cfg = p.config_for(inst);
        cfg.lambda = 0.1;
        cfg.max_iter = 500;
        RecoveryReport<double> rep;
        const auto tr = run_convergence_trace(inst, SolverKind::ista, cfg, p, 3, &rep);
        CHECK(tr.size() == std::size_t(rep.iterations));
        CHECK(tr.elapsed_s.size() == tr.size());
        for (std::size_t i = 1; i < tr.size(); ++i) {
            CHECK(tr.objective[i] <= tr.objective[i - 1] + 1e-12);
            CHECK(tr.elapsed_s[i] >= tr.elapsed_s[i - 1]);
        }
    }
}

TEST_CASE("CSV output") {
    SUBCASE("empty result is header only") {
        CHECK(csv_of(SweepResult{}) == std::string(kSweepCsvHeader) + "\n");
        std::ostringstream os;
        write_csv(os, IterateTrace{});
        CHECK(os.str() == std::string(kTraceCsvHeader) + "\n");
    }
    SUBCASE("one row") {
        SweepResult r;
        r.rows.push_back({50, 20, 19, 0.95, 1234.5, 1.0 / 3.0, 0.25});
        const auto text = csv_of(r);
        CHECK(text == std::string(kSweepCsvHeader) + "\n50,20,19,0.94999999999999996,1234.5,0.33333333333333331,0.25\n");
    }
    SUBCASE("round trips") {
        SweepResult r;
        r.rows.push_back({1, 3, 2, 2.0 / 3.0, 17.0 / 3.0, 1e-17, 3.14159e-5});
        r.rows.push_back({9, 3, 0, 0.0, 20000, 0.8660254037844386, 12.5});
        std::stringstream ss;
        write_csv(ss, r);
        const auto back = read_sweep_csv(ss);
        REQUIRE(back.rows.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(back.rows[i].k == r.rows[i].k);
            CHECK(back.rows[i].successes == r.rows[i].successes);
            CHECK(back.rows[i].success_rate == r.rows[i].success_rate);
            CHECK(back.rows[i].mean_iterations == r.rows[i].mean_iterations);
            CHECK(back.rows[i].mean_re == r.rows[i].mean_re);
            CHECK(back.rows[i].mean_wall_time_s == r.rows[i].mean_wall_time_s);
        }

        IterateTrace tr;
        tr.objective = {3.5, 1.0 / 7.0};
        tr.rel_error = {std::nan(""), 0.1};
        tr.residual_norm = {2.0, 1e-300};
        tr.elapsed_s = {0.001, 0.002};
        std::stringstream ts;
        write_csv(ts, tr);
        const auto tb = read_trace_csv(ts);
        REQUIRE(tb.size() == 2);
        CHECK(tb.objective == tr.objective);
        CHECK(std::isnan(tb.rel_error[0]));
        CHECK(tb.rel_error[1] == 0.1);
        CHECK(tb.residual_norm == tr.residual_norm);
        CHECK(tb.elapsed_s == tr.elapsed_s);
    }
    SUBCASE("malformed input") {
        std::istringstream bad_header("k,trials\n");
        CHECK_THROWS_AS(read_sweep_csv(bad_header), FormatError);
        std::istringstream short_row(std::string(kSweepCsvHeader) + "\n1,2,3\n");
        CHECK_THROWS_AS(read_sweep_csv(short_row), FormatError);
        std::istringstream gap(std::string(kTraceCsvHeader) + "\n2,1,1,1,1\n");
        CHECK_THROWS_AS(read_trace_csv(gap), FormatError);
    }
    SUBCASE("files") {
        const auto dir = fs::temp_directory_path() / "qista_test_bench";
        fs::create_directories(dir);
        SweepResult r;
        r.rows.push_back({2, 1, 1, 1.0, 5, 0.0, 0.0});
        write_csv(dir / "s.csv", r);
        std::ifstream is(dir / "s.csv");
        CHECK(read_sweep_csv(is).rows.size() == 1);
        CHECK_FALSE(fs::exists(dir / "s.csv.tmp"));
        CHECK_THROWS_AS(write_csv(dir / "missing" / "s.csv", r), std::runtime_error);
    }
}
