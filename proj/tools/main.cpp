// Command line front end: gen / solve / suite.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "antilop/bench.hpp"

namespace {

// --time-cap <= 0 means "no cap"; modelled as an infinite budget so the
// downstream default (60 s) does not reapply.
std::chrono::duration<double> cap_from_seconds(double v) {
    if (v > 0.0) return std::chrono::duration<double>(v);
    return std::chrono::duration<double>(std::numeric_limits<double>::infinity());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rescaled projected-gradient NNLS solver and benchmark harness"};
    app.require_subcommand(1);

    // ---- gen ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate one test instance directory");
    std::string gen_kind = "T1";
    antilop::bench::GenArgs gen_args;
    gen->add_option("--kind", gen_kind, "test family T1..T6")->capture_default_str();
    gen->add_option("--n", gen_args.spec.n, "columns / variables")->capture_default_str();
    gen->add_option("--d", gen_args.spec.d, "rows")->capture_default_str();
    gen->add_option("--sparsity", gen_args.spec.sparsity, "zero fraction in [0, 0.4]")
        ->capture_default_str();
    gen->add_option("--seed", gen_args.spec.seed, "generator seed")->capture_default_str();
    gen->add_option("-o,--out", gen_args.out_dir, "output directory")->required();

    // ---- solve --------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "solve a saved instance");
    std::string solve_algo = "antilop";
    std::string solve_in;
    double solve_eps = 0.0, solve_cap = 0.0;
    std::uint64_t solve_iters = 0;
    std::size_t solve_stall = 0;
    std::string solve_trace, solve_out;
    solve->add_option("--algo", solve_algo, "antilop|fast|accer|anti-accer")
        ->capture_default_str();
    solve->add_option("--in", solve_in, "instance directory (from gen)")->required();
    auto* eps_opt = solve->add_option("--epsilon", solve_eps,
                                      "squared-gradient tolerance (default 1e-10*n)");
    auto* iters_opt = solve->add_option("--max-iters", solve_iters,
                                        "iteration cap (default 5*n)");
    auto* cap_opt = solve->add_option(
        "--time-cap", solve_cap,
        "wall-clock cap in seconds, <= 0 disables (default 60, env ANTILOP_TIME_CAP)");
    auto* stall_opt = solve->add_option("--stall-window", solve_stall,
                                        "stop after this many non-improving iterations");
    double solve_as_tol = 0.0;
    auto* as_tol_opt = solve->add_option(
        "--as-tol", solve_as_tol,
        "fast only: absolute KKT tolerance (default 1e-10*(1+||A^T b||_inf))");
    solve->add_option("--trace", solve_trace,
                      "trace CSV path (default <in>/trace-<algo>.csv)");
    solve->add_option("--out", solve_out, "also write the result JSON to this file");

    // ---- suite --------------------------------------------------------
    auto* suite = app.add_subcommand("suite", "run the benchmark grid");
    std::vector<std::string> suite_kinds, suite_solvers;
    antilop::bench::SuiteArgs suite_args;
    suite_args.report_path = "report.json";
    double suite_eps = 0.0, suite_cap = 0.0;
    std::uint64_t suite_iters = 0;
    std::size_t suite_stall = 0;
    std::string suite_csv;
    suite->add_option("--kinds", suite_kinds, "comma separated families (default all six)")
        ->delimiter(',');
    suite->add_option("--n", suite_args.config.n, "columns / variables")->capture_default_str();
    suite->add_option("--d", suite_args.config.d, "rows")->capture_default_str();
    suite->add_option("--sub-tests", suite_args.config.sub_tests,
                      "sub-tests per family, sparsity spread over [0, 0.4]")
        ->capture_default_str();
    suite->add_option("--seed", suite_args.config.seed, "master seed (sub-test s adds s)")
        ->capture_default_str();
    suite->add_option("--solvers", suite_solvers, "comma separated solver lineup (default all)")
        ->delimiter(',');
    auto* s_eps = suite->add_option("--epsilon", suite_eps, "squared-gradient tolerance");
    auto* s_iters = suite->add_option("--max-iters", suite_iters, "iteration cap");
    auto* s_cap = suite->add_option("--time-cap", suite_cap,
                                    "per-solve wall cap in seconds, <= 0 disables");
    auto* s_stall = suite->add_option("--stall-window", suite_stall,
                                      "stop after this many non-improving iterations");
    double suite_as_tol = 0.0;
    auto* s_as_tol = suite->add_option(
        "--as-tol", suite_as_tol,
        "fast only: absolute KKT tolerance (default 1e-10*(1+||A^T b||_inf))");
    suite->add_option("--report", suite_args.report_path, "JSON report path")
        ->capture_default_str();
    suite->add_option("--csv", suite_csv, "also write a flat CSV here");
    suite->add_flag("--parallel", suite_args.config.parallel,
                    "run cells on all cores (wall times become incomparable)");
    suite->add_flag("--plus-one", suite_args.config.gap_plus_one,
                    "add an obj_gap+1 column to the CSV for log-scale plots");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            gen_args.spec.kind = antilop::testgen::parse_kind(gen_kind);
            return antilop::bench::cmd_generate(gen_args, std::cout);
        }
        if (solve->parsed()) {
            antilop::bench::SolveArgs args;
            args.solver = antilop::bench::parse_solver(solve_algo);
            args.in_dir = solve_in;
            if (*eps_opt) args.config.epsilon = solve_eps;
            if (*iters_opt) args.config.max_iters = solve_iters;
            if (*cap_opt) args.config.time_cap = cap_from_seconds(solve_cap);
            if (*stall_opt) args.config.stall_window = solve_stall;
            if (*as_tol_opt) args.config.active_set_tol = solve_as_tol;
            if (!solve_trace.empty()) args.trace_path = solve_trace;
            if (!solve_out.empty()) args.result_path = solve_out;
            return antilop::bench::cmd_solve(args, std::cout);
        }
        if (suite->parsed()) {
            if (!suite_kinds.empty()) {
                suite_args.config.kinds.clear();
                for (const auto& k : suite_kinds) {
                    suite_args.config.kinds.push_back(antilop::testgen::parse_kind(k));
                }
            }
            if (!suite_solvers.empty()) {
                suite_args.config.solvers.clear();
                for (const auto& s : suite_solvers) {
                    suite_args.config.solvers.push_back(antilop::bench::parse_solver(s));
                }
            }
            if (*s_eps) suite_args.config.solver_config.epsilon = suite_eps;
            if (*s_iters) suite_args.config.solver_config.max_iters = suite_iters;
            if (*s_cap) suite_args.config.solver_config.time_cap = cap_from_seconds(suite_cap);
            if (*s_stall) suite_args.config.solver_config.stall_window = suite_stall;
            if (*s_as_tol) suite_args.config.solver_config.active_set_tol = suite_as_tol;
            if (!suite_csv.empty()) suite_args.csv_path = suite_csv;
            return antilop::bench::cmd_suite(suite_args, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
