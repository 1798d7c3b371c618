#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "antilop/linalg.hpp"
#include "antilop/testgen.hpp"

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

}  // namespace

TEST_CASE("vector and matrix construction invariants") {
    REQUIRE_THROWS_AS(DenseMatrix(0, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(DenseMatrix(3, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(Vector({1.0, nan}), std::invalid_argument);
    REQUIRE_THROWS_AS(Vector({inf}), std::invalid_argument);
    REQUIRE_THROWS_AS(DenseMatrix(1, 2, {1.0, nan}), std::invalid_argument);
    REQUIRE_THROWS_AS(DenseMatrix::from_rows({{1.0}, {1.0, 2.0}}), std::invalid_argument);

    const DenseMatrix m = DenseMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 2);
    REQUIRE(m(0, 1) == 2.0);
    REQUIRE(m(1, 0) == 3.0);
    // column-major storage
    REQUIRE(m.data() == std::vector<double>{1.0, 3.0, 2.0, 4.0});
}

TEST_CASE("gram matrix on fixed examples") {
    SECTION("identity") {
        const DenseMatrix h = gram(DenseMatrix::identity(2));
        REQUIRE(h(0, 0) == 1.0);
        REQUIRE(h(0, 1) == 0.0);
        REQUIRE(h(1, 0) == 0.0);
        REQUIRE(h(1, 1) == 1.0);
    }
    SECTION("upper triangular example") {
        const DenseMatrix a = DenseMatrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
        const DenseMatrix h = gram(a);
        REQUIRE(h(0, 0) == 1.0);
        REQUIRE(h(0, 1) == 1.0);
        REQUIRE(h(1, 0) == 1.0);
        REQUIRE(h(1, 1) == 2.0);
    }
    SECTION("zero column gives a zero row and column") {
        const DenseMatrix a = DenseMatrix::from_rows({{1.0, 0.0}, {2.0, 0.0}});
        const DenseMatrix h = gram(a);
        REQUIRE(h(0, 1) == 0.0);
        REQUIRE(h(1, 0) == 0.0);
        REQUIRE(h(1, 1) == 0.0);
        REQUIRE(h(0, 0) == 5.0);
    }
}

TEST_CASE("gram matrix is bitwise symmetric and positive semidefinite") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DenseMatrix a = random_matrix(11, 7, seed);
        const DenseMatrix h = gram(a);
        for (std::size_t j = 0; j < h.cols(); ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                REQUIRE(h(i, j) == h(j, i));
            }
        }
        const double hf = frobenius_norm(h);
        for (std::uint64_t vs = 0; vs < 5; ++vs) {
            const Vector v = random_vector(7, seed * 100 + vs);
            const double quad = dot(v, matvec(h, v));
            REQUIRE(quad >= -1e-10 * norm_sq(v) * hf);
        }
    }
}

TEST_CASE("matvec on fixed examples") {
    const DenseMatrix h = DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 2.0}});
    const Vector y = matvec(h, Vector{1.0, 0.0});
    REQUIRE(y[0] == 1.0);
    REQUIRE(y[1] == 1.0);

    const Vector z = matvec(h, Vector(2, 0.0));
    REQUIRE(z[0] == 0.0);
    REQUIRE(z[1] == 0.0);

    REQUIRE_THROWS_AS(matvec(h, Vector{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("masked matvec on fixed examples") {
    const DenseMatrix h = DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 2.0}});
    const std::vector<std::size_t> mask{1};
    const Vector y = masked_matvec(h, Vector{0.0, 2.0}, mask);
    REQUIRE(y[0] == 2.0);
    REQUIRE(y[1] == 4.0);

    const std::vector<std::size_t> empty;
    const Vector z = masked_matvec(h, Vector{5.0, 6.0}, empty);
    REQUIRE(z[0] == 0.0);
    REQUIRE(z[1] == 0.0);

    const std::vector<std::size_t> bad{2};
    REQUIRE_THROWS_AS(masked_matvec(h, Vector{1.0, 2.0}, bad), std::out_of_range);
}

TEST_CASE("masked matvec with a full mask is bitwise equal to matvec") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const DenseMatrix m = random_matrix(9, 6, seed);
        const Vector v = random_vector(6, seed + 77);
        std::vector<std::size_t> full(6);
        for (std::size_t i = 0; i < full.size(); ++i) full[i] = i;
        const Vector a = matvec(m, v);
        const Vector b = masked_matvec(m, v, full);
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i] == b[i]);
        }
    }
}

TEST_CASE("masked matvec multiply count is rows times mask size") {
    const DenseMatrix m = random_matrix(13, 9, 3);
    const Vector v = random_vector(9, 4);
    const std::vector<std::size_t> mask{0, 2, 5, 8};
    std::size_t count = 0;
    masked_matvec(m, v, mask, &count);
    REQUIRE(count == 13 * 4);

    count = 7;  // accumulates, does not reset
    masked_matvec(m, v, mask, &count);
    REQUIRE(count == 7 + 13 * 4);
}

TEST_CASE("transpose matvec") {
    const DenseMatrix a = DenseMatrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
    const Vector y = transpose_matvec(a, Vector{2.0, -1.0});
    REQUIRE(y[0] == 2.0);
    REQUIRE(y[1] == 1.0);
    REQUIRE_THROWS_AS(transpose_matvec(a, Vector{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("frobenius norm") {
    REQUIRE(frobenius_norm(DenseMatrix::identity(2)) == std::sqrt(2.0));
    REQUIRE(frobenius_norm(DenseMatrix(2, 2, 1.0)) == 2.0);
    const DenseMatrix h = DenseMatrix::from_rows({{1.0, 0.1}, {0.1, 9.0}});
    REQUIRE(frobenius_norm(h) == Approx(std::sqrt(82.02)).epsilon(1e-15));
}

TEST_CASE("vector reductions") {
    const Vector v{3.0, -4.0};
    REQUIRE(norm_sq(v) == 25.0);
    REQUIRE(norm2(v) == 5.0);
    REQUIRE(norm_inf(v) == 4.0);
    REQUIRE(dot(v, Vector{1.0, 1.0}) == -1.0);
    REQUIRE_THROWS_AS(dot(v, Vector{1.0}), std::invalid_argument);
}
