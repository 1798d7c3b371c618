#pragma once

// Benchmark harness: generate instance families, run the solver lineup on
// them, and emit machine-readable reports. The three entry points mirror
// the CLI subcommands (gen / solve / suite) and are callable directly from
// tests.
//
// Wall times cover the solve call only (Gram products included, file I/O
// excluded). Runs are deterministic: rerunning a cell with the same seed
// and config reproduces the objective bit for bit.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "antilop/accelerated.hpp"
#include "antilop/active_set.hpp"
#include "antilop/io.hpp"
#include "antilop/nnls.hpp"
#include "antilop/nqp.hpp"
#include "antilop/testgen.hpp"

#include "json.hpp"

namespace antilop::bench {

enum class SolverId { Antilop, Fast, Accer, AntiAccer };

inline constexpr std::array<SolverId, 4> kAllSolvers = {SolverId::Antilop, SolverId::Fast,
                                                        SolverId::Accer, SolverId::AntiAccer};

inline std::string_view to_string(SolverId s) {
    switch (s) {
        case SolverId::Antilop: return "antilop";
        case SolverId::Fast: return "fast";
        case SolverId::Accer: return "accer";
        case SolverId::AntiAccer: return "anti-accer";
    }
    return "?";
}

inline SolverId parse_solver(std::string_view s) {
    for (SolverId id : kAllSolvers) {
        if (s == to_string(id)) return id;
    }
    throw std::invalid_argument("unknown solver: " + std::string(s) +
                                " (expected antilop|fast|accer|anti-accer)");
}

/// Default wall-clock budget per solve: 60 s, overridable through the
/// ANTILOP_TIME_CAP environment variable (seconds; <= 0 disables the cap).
/// An explicit --time-cap always wins over both.
inline std::optional<std::chrono::duration<double>> default_time_cap() {
    if (const char* env = std::getenv("ANTILOP_TIME_CAP")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && v > 0.0) return std::chrono::duration<double>(v);
        if (end != env) return std::nullopt;
    }
    return std::chrono::duration<double>(60.0);
}

/// Dispatch one solver over one instance. "accer" runs on the raw Gram
/// system, everything else as documented in its own header.
inline NnlsResult run_solver(SolverId id, const DenseMatrix& a, const Vector& b,
                             const SolverConfig& config) {
    switch (id) {
        case SolverId::Antilop: return solve_nnls(a, b, config);
        case SolverId::Fast: return solve_fast_activeset(a, b, config);
        case SolverId::AntiAccer: return solve_anti_accelerated(a, b, config);
        case SolverId::Accer: {
            const DenseMatrix h = gram(a);
            Vector hv = transpose_matvec(a, b);
            for (std::size_t i = 0; i < hv.size(); ++i) hv[i] = -hv[i];
            SolveResult inner = solve_accelerated(NqpProblem(h, std::move(hv)), config);
            NnlsResult out;
            out.x = inner.x;
            out.residual_sq = detail::residual_norm_sq(a, b, out.x);
            out.inner = std::move(inner);
            return out;
        }
    }
    throw std::logic_error("run_solver: unreachable");
}

// ---------------------------------------------------------------------------
// Suite runner.

struct SuiteConfig {
    std::vector<testgen::TestKind> kinds{testgen::kAllKinds.begin(), testgen::kAllKinds.end()};
    std::size_t n = 400;
    std::size_t d = 600;
    std::size_t sub_tests = 5;
    std::uint64_t seed = 1;          // master seed; sub-test s uses seed + s
    std::vector<SolverId> solvers{kAllSolvers.begin(), kAllSolvers.end()};
    SolverConfig solver_config;
    bool parallel = false;
    bool gap_plus_one = false;       // add an obj_gap + 1 column to the CSV
};

/// Sub-test s of `count` uses sparsity evenly spaced over [0, 0.4].
inline double sparsity_for_sub(std::size_t s, std::size_t count) {
    if (count <= 1) return 0.0;
    return 0.4 * static_cast<double>(s) / static_cast<double>(count - 1);
}

/// One (kind, sub-test, solver) run. The full solver output is kept so
/// callers can inspect traces and solutions; reports serialize scalars only.
struct CellResult {
    testgen::TestKind kind = testgen::TestKind::T1;
    std::size_t sub = 0;
    std::uint64_t seed = 0;
    double sparsity = 0.0;
    SolverId solver = SolverId::Antilop;
    double objective = std::numeric_limits<double>::quiet_NaN();  // 1/2 ||Ax-b||^2
    double f_star = std::numeric_limits<double>::quiet_NaN();
    double obj_gap = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;
    Termination termination = Termination::MaxIters;
    double wall_seconds = 0.0;
    std::string error;               // non-empty when the solver threw
    NnlsResult result;
};

struct SuiteReport {
    SuiteConfig config;
    std::vector<CellResult> cells;
    bool timing_reliable = true;
};

inline SuiteReport run_suite(const SuiteConfig& config) {
    using clock = std::chrono::steady_clock;
    SuiteReport report;
    report.config = config;
    report.timing_reliable = !config.parallel;

    struct Task {
        std::size_t instance = 0;
        SolverId solver = SolverId::Antilop;
    };

    std::vector<testgen::TestInstance> instances;
    std::vector<Task> tasks;
    for (const testgen::TestKind kind : config.kinds) {
        for (std::size_t s = 0; s < config.sub_tests; ++s) {
            testgen::TestCaseSpec spec;
            spec.kind = kind;
            spec.n = config.n;
            spec.d = config.d;
            spec.sparsity = sparsity_for_sub(s, config.sub_tests);
            spec.seed = config.seed + s;
            instances.push_back(testgen::generate(spec));
            for (const SolverId solver : config.solvers) {
                tasks.push_back({instances.size() - 1, solver});
            }
        }
    }

    std::vector<CellResult> cells(tasks.size());
    const auto run_task = [&](std::size_t t) {
        const Task& task = tasks[t];
        const testgen::TestInstance& inst = instances[task.instance];
        CellResult& cell = cells[t];
        cell.kind = inst.spec.kind;
        cell.sub = task.instance % std::max<std::size_t>(1, config.sub_tests);
        cell.seed = inst.spec.seed;
        cell.sparsity = inst.spec.sparsity;
        cell.solver = task.solver;
        try {
            const auto t0 = clock::now();
            cell.result = run_solver(task.solver, inst.A, inst.b, config.solver_config);
            cell.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
            cell.objective = 0.5 * cell.result.residual_sq;
            cell.iterations = cell.result.inner.iterations();
            cell.termination = cell.result.inner.termination;
        } catch (const NumericFailure& e) {
            cell.error = e.what();
        }
    };

    if (config.parallel && tasks.size() > 1) {
        const std::size_t workers =
            std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                                  tasks.size());
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < tasks.size();
                     t = next.fetch_add(1)) {
                    run_task(t);
                }
            });
        }
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
    }

    // Fill per-instance reference optima now that every solver has run.
    for (std::size_t i = 0; i < instances.size(); ++i) {
        std::vector<double> objectives;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (tasks[t].instance == i && cells[t].error.empty()) {
                objectives.push_back(cells[t].objective);
            }
        }
        double fstar = std::numeric_limits<double>::quiet_NaN();
        if (instances[i].f_star_known) {
            fstar = *instances[i].f_star_known;
        } else if (!objectives.empty()) {
            fstar = testgen::reference_fstar(instances[i], objectives);
        }
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (tasks[t].instance != i) continue;
            cells[t].f_star = fstar;
            if (cells[t].error.empty() && std::isfinite(fstar)) {
                cells[t].obj_gap = std::abs(cells[t].objective - fstar);
            }
        }
    }

    report.cells = std::move(cells);
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization.

struct Aggregate {
    testgen::TestKind kind = testgen::TestKind::T1;
    SolverId solver = SolverId::Antilop;
    std::size_t cells = 0;
    std::size_t failed = 0;
    double mean_obj_gap = 0.0;
    double max_obj_gap = 0.0;
    double mean_iterations = 0.0;
    double mean_wall_seconds = 0.0;
};

inline std::vector<Aggregate> aggregate(const SuiteReport& report) {
    std::vector<Aggregate> out;
    for (const testgen::TestKind kind : report.config.kinds) {
        for (const SolverId solver : report.config.solvers) {
            Aggregate agg;
            agg.kind = kind;
            agg.solver = solver;
            double gap_sum = 0.0, iter_sum = 0.0, wall_sum = 0.0;
            std::size_t ok = 0;
            for (const CellResult& c : report.cells) {
                if (c.kind != kind || c.solver != solver) continue;
                ++agg.cells;
                if (!c.error.empty()) {
                    ++agg.failed;
                    continue;
                }
                ++ok;
                if (std::isfinite(c.obj_gap)) {
                    gap_sum += c.obj_gap;
                    agg.max_obj_gap = std::max(agg.max_obj_gap, c.obj_gap);
                }
                iter_sum += static_cast<double>(c.iterations);
                wall_sum += c.wall_seconds;
            }
            if (ok) {
                agg.mean_obj_gap = gap_sum / static_cast<double>(ok);
                agg.mean_iterations = iter_sum / static_cast<double>(ok);
                agg.mean_wall_seconds = wall_sum / static_cast<double>(ok);
            }
            out.push_back(agg);
        }
    }
    return out;
}

inline nlohmann::json report_to_json(const SuiteReport& report) {
    const SuiteConfig& cfg = report.config;
    nlohmann::json j;
    j["schema"] = "bench-report/1";

    nlohmann::json jc;
    jc["n"] = cfg.n;
    jc["d"] = cfg.d;
    jc["sub_tests"] = cfg.sub_tests;
    jc["seed"] = cfg.seed;
    jc["parallel"] = cfg.parallel;
    jc["timing_reliable"] = report.timing_reliable;
    jc["kinds"] = nlohmann::json::array();
    for (const auto k : cfg.kinds) jc["kinds"].push_back(std::string(testgen::to_string(k)));
    jc["solvers"] = nlohmann::json::array();
    for (const auto s : cfg.solvers) jc["solvers"].push_back(std::string(to_string(s)));
    jc["sparsities"] = nlohmann::json::array();
    for (std::size_t s = 0; s < cfg.sub_tests; ++s) {
        jc["sparsities"].push_back(sparsity_for_sub(s, cfg.sub_tests));
    }
    if (cfg.solver_config.epsilon) {
        jc["epsilon"] = *cfg.solver_config.epsilon;
    } else {
        jc["epsilon"] = nullptr;
    }
    if (cfg.solver_config.max_iters) {
        jc["max_iters"] = *cfg.solver_config.max_iters;
    } else {
        jc["max_iters"] = nullptr;
    }
    if (cfg.solver_config.time_cap) {
        jc["time_cap_s"] = cfg.solver_config.time_cap->count();
    } else {
        jc["time_cap_s"] = nullptr;
    }
    j["config"] = std::move(jc);

    j["cells"] = nlohmann::json::array();
    for (const CellResult& c : report.cells) {
        nlohmann::json cell;
        cell["kind"] = std::string(testgen::to_string(c.kind));
        cell["sub"] = c.sub;
        cell["seed"] = c.seed;
        cell["sparsity"] = c.sparsity;
        cell["solver"] = std::string(to_string(c.solver));
        if (c.error.empty()) {
            cell["objective"] = c.objective;
            cell["f_star"] = c.f_star;
            cell["obj_gap"] = c.obj_gap;
            cell["iterations"] = c.iterations;
            cell["termination"] = std::string(to_string(c.termination));
            cell["wall_s"] = c.wall_seconds;
            cell["error"] = nullptr;
        } else {
            cell["objective"] = nullptr;
            cell["f_star"] = nullptr;
            cell["obj_gap"] = nullptr;
            cell["iterations"] = nullptr;
            cell["termination"] = nullptr;
            cell["wall_s"] = nullptr;
            cell["error"] = c.error;
        }
        j["cells"].push_back(std::move(cell));
    }

    j["aggregates"] = nlohmann::json::array();
    for (const Aggregate& a : aggregate(report)) {
        nlohmann::json agg;
        agg["kind"] = std::string(testgen::to_string(a.kind));
        agg["solver"] = std::string(to_string(a.solver));
        agg["cells"] = a.cells;
        agg["failed"] = a.failed;
        agg["mean_obj_gap"] = a.mean_obj_gap;
        agg["max_obj_gap"] = a.max_obj_gap;
        agg["mean_iterations"] = a.mean_iterations;
        agg["mean_wall_s"] = a.mean_wall_seconds;
        j["aggregates"].push_back(std::move(agg));
    }
    return j;
}

inline void write_report_json(std::ostream& os, const SuiteReport& report) {
    os << report_to_json(report).dump(2) << "\n";
}

inline void write_report_csv(std::ostream& os, const SuiteReport& report) {
    os << "kind,sub,seed,sparsity,solver,objective,f_star,obj_gap";
    if (report.config.gap_plus_one) os << ",obj_gap_plus1";
    os << ",iterations,termination,wall_s,error\n";
    for (const CellResult& c : report.cells) {
        os << testgen::to_string(c.kind) << "," << c.sub << "," << c.seed << ","
           << fmt_g17(c.sparsity) << "," << to_string(c.solver) << ",";
        if (c.error.empty()) {
            os << fmt_g17(c.objective) << "," << fmt_g17(c.f_star) << ","
               << fmt_g17(c.obj_gap);
            if (report.config.gap_plus_one) os << "," << fmt_g17(c.obj_gap + 1.0);
            os << "," << c.iterations << "," << to_string(c.termination) << ","
               << fmt_g17(c.wall_seconds) << ",";
        } else {
            os << ",,";
            if (report.config.gap_plus_one) os << ",";
            os << ",,,," << c.error;
        }
        os << "\n";
    }
}

// ---------------------------------------------------------------------------
// CLI command bodies. Argument validation errors throw std::invalid_argument;
// the CLI wrapper maps exceptions to exit code 1 and numeric failures to 2.

struct GenArgs {
    testgen::TestCaseSpec spec;
    std::filesystem::path out_dir;
};

inline int cmd_generate(const GenArgs& args, std::ostream& out) {
    const testgen::TestInstance inst = testgen::generate(args.spec);
    testgen::save_instance(args.out_dir, inst);
    out << "wrote " << testgen::to_string(args.spec.kind) << " instance (n=" << args.spec.n
        << ", d=" << args.spec.d << ", sparsity=" << args.spec.sparsity
        << ", seed=" << args.spec.seed << ") to " << args.out_dir.string() << "\n";
    return 0;
}

struct SolveArgs {
    SolverId solver = SolverId::Antilop;
    std::filesystem::path in_dir;
    SolverConfig config;                      // time_cap empty -> default_time_cap()
    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> result_path;
};

inline int cmd_solve(const SolveArgs& args, std::ostream& out) {
    const testgen::TestInstance inst = testgen::load_instance(args.in_dir);
    SolverConfig config = args.config;
    if (!config.time_cap) config.time_cap = default_time_cap();

    NnlsResult result;
    try {
        result = run_solver(args.solver, inst.A, inst.b, config);
    } catch (const NumericFailure& e) {
        const auto trace_path =
            args.trace_path
                ? *args.trace_path
                : args.in_dir / ("trace-" + std::string(to_string(args.solver)) + ".csv");
        write_trace_csv_file(trace_path, e.trace());
        out << "numeric failure: " << e.what() << "\n";
        return 2;
    }

    const auto trace_path =
        args.trace_path ? *args.trace_path
                        : args.in_dir / ("trace-" + std::string(to_string(args.solver)) + ".csv");
    write_trace_csv_file(trace_path, result.inner.trace);

    const std::string summary = result_summary_json(result);
    if (args.result_path) {
        auto f = detail::open_out(*args.result_path);
        f << summary << "\n";
    }
    out << summary << "\n";
    return 0;
}

struct SuiteArgs {
    SuiteConfig config;
    std::filesystem::path report_path;
    std::optional<std::filesystem::path> csv_path;
};

inline int cmd_suite(const SuiteArgs& args, std::ostream& out) {
    SuiteArgs resolved = args;
    if (!resolved.config.solver_config.time_cap) {
        resolved.config.solver_config.time_cap = default_time_cap();
    }
    const SuiteReport report = run_suite(resolved.config);

    {
        auto f = detail::open_out(args.report_path);
        write_report_json(f, report);
    }
    if (args.csv_path) {
        auto f = detail::open_out(*args.csv_path);
        write_report_csv(f, report);
    }

    std::size_t failed = 0;
    for (const CellResult& c : report.cells) {
        if (!c.error.empty()) ++failed;
    }
    out << "suite: " << report.cells.size() << " cells, " << failed
        << " failed; report written to " << args.report_path.string() << "\n";
    if (!report.timing_reliable) {
        out << "note: parallel run, wall times are not comparable\n";
    }
    return 0;
}

}  // namespace antilop::bench
