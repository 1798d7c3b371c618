#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "antilop/nnls.hpp"
#include "antilop/testgen.hpp"
#include "oracle.hpp"

using namespace antilop;
using Catch::Approx;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                          bool mixed = true) {
    testgen::SplitMix64 rng(seed);
    DenseMatrix m(rows, cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < rows; ++i) {
            m(i, j) = mixed ? rng.uniform(-1.0, 1.0) : rng.uniform01();
        }
    }
    return m;
}

Vector random_vector(std::size_t n, std::uint64_t seed) {
    testgen::SplitMix64 rng(seed);
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v;
}

SolverConfig tight_config() {
    SolverConfig c;
    c.epsilon = 1e-20;
    c.max_iters = 200000;
    c.stall_window = 1000000;
    return c;
}

}  // namespace

TEST_CASE("rescaling produces the cosine system") {
    // H with diagonal (1, 9): scales (1, 3), so Q_01 = 0.1/3 = 1/30 and the
    // linear term divides coordinatewise by the scales.
    DenseMatrix h_mat(2, 2, {1.0, 0.1, 0.1, 9.0});
    Vector h_vec{-4.0, -5.0};
    const auto sys = rescale(h_mat, h_vec);

    REQUIRE(sys.problem.has_value());
    REQUIRE(sys.dropped.empty());
    REQUIRE(sys.retained == std::vector<std::size_t>{0, 1});
    REQUIRE(sys.scale[0] == 1.0);
    REQUIRE(sys.scale[1] == 3.0);

    const auto& p = *sys.problem;
    REQUIRE(p.Q(0, 0) == 1.0);
    REQUIRE(p.Q(1, 1) == 1.0);
    REQUIRE(p.Q(0, 1) == 0.1 / 3.0);
    REQUIRE(p.Q(0, 1) == p.Q(1, 0));
    REQUIRE(p.Q(0, 1) == Approx(1.0 / 30.0).epsilon(1e-15));
    REQUIRE(p.q[0] == -4.0);
    REQUIRE(p.q[1] == -5.0 / 3.0);
}

TEST_CASE("rescaling rejects malformed systems") {
    REQUIRE_THROWS_AS(rescale(DenseMatrix(2, 3), Vector{1.0, 2.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(rescale(DenseMatrix::identity(2), Vector{1.0}), std::invalid_argument);
    DenseMatrix asym(2, 2, {1.0, 0.2, 0.1, 1.0});
    REQUIRE_THROWS_AS(rescale(asym, Vector{1.0, 2.0}), std::invalid_argument);
    DenseMatrix neg(2, 2, {-1.0, 0.0, 0.0, 1.0});
    REQUIRE_THROWS_AS(rescale(neg, Vector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("zero diagonal columns are dropped and pinned to zero") {
    // Second column of A is zero, so H has a zero row/column.
    DenseMatrix a(2, 2, {1.0, 0.0, 0.0, 0.0});
    const DenseMatrix h = gram(a);
    const Vector h_vec{-3.0, 0.0};
    const auto sys = rescale(h, h_vec);
    REQUIRE(sys.problem.has_value());
    REQUIRE(sys.problem->dim() == 1);
    REQUIRE(sys.retained == std::vector<std::size_t>{0});
    REQUIRE(sys.dropped == std::vector<std::size_t>{1});

    const Vector full = unscale(Vector{2.0}, sys, 2);
    REQUIRE(full.size() == 2);
    REQUIRE(full[0] == 2.0);
    REQUIRE(full[1] == 0.0);

    const auto res = solve_nnls(a, Vector{3.0, 1.0});
    REQUIRE(res.x[0] == Approx(3.0).margin(1e-12));
    REQUIRE(res.x[1] == 0.0);
    REQUIRE(res.dropped_columns == std::vector<std::size_t>{1});
    REQUIRE(res.residual_sq == Approx(1.0).margin(1e-12));
}

TEST_CASE("all-zero matrix solves to zero with every column dropped") {
    DenseMatrix a(3, 2, 0.0);
    const auto res = solve_nnls(a, Vector{1.0, 2.0, 3.0});
    REQUIRE(res.x[0] == 0.0);
    REQUIRE(res.x[1] == 0.0);
    REQUIRE(res.dropped_columns == std::vector<std::size_t>{0, 1});
    REQUIRE(res.inner.termination == Termination::EmptyPassiveSet);
    REQUIRE(res.residual_sq == Approx(14.0).epsilon(1e-15));
}

TEST_CASE("cosine matrix invariants hold on random instances") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const std::size_t n = 3 + seed % 9;
        const auto a = random_matrix(n + 5, n, seed, seed % 2 == 0);
        const DenseMatrix h = gram(a);
        const auto sys = rescale(h, random_vector(n, seed + 1000));
        REQUIRE(sys.problem.has_value());
        const auto& q_mat = sys.problem->Q;

        const std::size_t m = q_mat.rows();
        for (std::size_t i = 0; i < m; ++i) {
            REQUIRE(q_mat(i, i) == 1.0);
            for (std::size_t j = 0; j < m; ++j) {
                REQUIRE(std::abs(q_mat(i, j)) <= 1.0 + 1e-12);
                REQUIRE(q_mat(i, j) == q_mat(j, i));
            }
        }
        const double fro = frobenius_norm(q_mat);
        REQUIRE(fro >= std::sqrt(static_cast<double>(m)) - 1e-12);
        REQUIRE(fro <= static_cast<double>(m) + 1e-12);
    }
}

TEST_CASE("solving the rescaled system is equivalent to the raw system") {
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
        const std::size_t n = 4 + seed % 5;
        const auto a = random_matrix(n + 6, n, seed);
        const auto b = random_vector(n + 6, seed + 500);

        const DenseMatrix h = gram(a);
        Vector h_vec = transpose_matvec(a, b);
        for (std::size_t i = 0; i < n; ++i) h_vec[i] = -h_vec[i];

        // Raw solve, no rescaling.
        NqpProblem raw(h, h_vec);
        const auto raw_res = solve_nqp(raw, tight_config());

        // Rescaled pipeline.
        const auto res = solve_nnls(a, b, tight_config());

        const double f_raw = objective(raw, raw_res.x);
        const double f_scaled = objective(raw, res.x);
        REQUIRE(f_scaled == Approx(f_raw).margin(1e-10 * (1.0 + std::abs(f_raw))));
    }
}

TEST_CASE("column scaling does not change the recovered solution") {
    // Scaling columns by powers of two rescales exactly; the NNLS solution
    // of the scaled problem is the unscaled solution divided by the factors.
    const auto a = random_matrix(10, 4, 77);
    const auto b = random_vector(10, 78);
    DenseMatrix scaled = a;
    const double factors[4] = {4.0, 0.25, 8.0, 1.0};
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < 10; ++i) scaled(i, j) = a(i, j) * factors[j];
    }

    const auto base = solve_nnls(a, b, tight_config());
    const auto scl = solve_nnls(scaled, b, tight_config());
    for (std::size_t j = 0; j < 4; ++j) {
        REQUIRE(scl.x[j] * factors[j] == Approx(base.x[j]).margin(1e-9));
    }
    REQUIRE(scl.residual_sq == Approx(base.residual_sq).margin(1e-9));
}

TEST_CASE("frozen small systems solve to known solutions") {
    SECTION("identity") {
        const auto res = solve_nnls(DenseMatrix::identity(2), Vector{3.0, -1.0});
        REQUIRE(res.x[0] == Approx(3.0).margin(1e-10));
        REQUIRE(res.x[1] == 0.0);
        REQUIRE(res.residual_sq == Approx(1.0).margin(1e-10));
    }
    SECTION("upper triangular") {
        DenseMatrix a(2, 2, {1.0, 0.0, 1.0, 1.0});
        const auto res = solve_nnls(a, Vector{2.0, -1.0}, tight_config());
        // Oracle: support {0} gives x = (2, 0), residual 1; support {0,1}
        // forces x_1 < 0; support {1} is worse (residual 9/2).
        REQUIRE(res.x[0] == Approx(2.0).margin(1e-9));
        REQUIRE(res.x[1] == 0.0);
        REQUIRE(res.residual_sq == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("nnls matches the brute force oracle on random rectangles") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        const std::size_t n = 2 + seed % 7;       // up to 8 columns
        const std::size_t d = n + 1 + seed % 8;   // up to 15 rows
        const bool mixed = seed % 2 == 0;
        const auto a = random_matrix(d, n, seed, mixed);
        const auto b = random_vector(d, seed + 999);

        std::vector<double> a_row_major(d * n);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < n; ++j) a_row_major[i * n + j] = a(i, j);
        }
        const auto op = oracle::from_least_squares(
            a_row_major, d, n, std::vector<double>(b.begin(), b.end()));
        const auto expect = oracle::solve(op);
        REQUIRE(expect.found);

        const auto res = solve_nnls(a, b, tight_config());
        // oracle objective is the NQP form: f_nnls = f_nqp + ||b||^2 / 2.
        const double f_nqp = 0.5 * res.residual_sq - 0.5 * norm_sq(b);
        REQUIRE(f_nqp == Approx(expect.f).margin(1e-8));
    }
}

TEST_CASE("result summary serializes scalars") {
    const auto res = solve_nnls(DenseMatrix::identity(2), Vector{3.0, -1.0});
    const auto parsed = nlohmann::json::parse(result_summary_json(res));
    REQUIRE(parsed["residual_sq"].get<double>() == Approx(1.0).margin(1e-10));
    REQUIRE(parsed["termination"].get<std::string>() == "GradientBelowEpsilon");
    REQUIRE(parsed["iterations"].get<std::size_t>() == res.inner.iterations());
    REQUIRE(parsed["dropped_columns"].is_array());
    REQUIRE(parsed["dropped_columns"].empty());
}
