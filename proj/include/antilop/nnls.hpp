#pragma once

// Nonnegative least squares front end:
//
//     minimize 1/2 ||A x - b||^2   subject to x >= 0
//
// The Gram system H = A^T A, h = -A^T b is rescaled by the inverse column
// lengths D_i = sqrt(H_ii) before solving, so the quadratic term becomes the
// cosine matrix Q_ij = H_ij / (D_i D_j) with unit diagonal and entries in
// [-1, 1]. That bounds the spread of curvatures the solver sees regardless
// of how badly the columns of A are scaled. A solution y of the rescaled
// problem maps back through x_i = y_i / D_i.
//
// Columns with H_ii == 0 (identically zero columns of A) are dropped from
// the rescaled system and their coordinates pinned to 0, which is optimal
// since they cannot affect the residual.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "antilop/linalg.hpp"
#include "antilop/nqp.hpp"

#include "json.hpp"

namespace antilop {

/// Rescaled system plus the bookkeeping needed to undo the substitution.
/// `problem` is absent when every column was dropped.
struct ScaledSystem {
    std::optional<NqpProblem> problem;
    Vector scale;                        // D_i = sqrt(H_ii) over retained columns
    std::vector<std::size_t> retained;   // reduced index -> original index
    std::vector<std::size_t> dropped;    // original indices with H_ii == 0
};

/// Build the cosine-rescaled system from H = A^T A and h = -A^T b.
/// The diagonal of the result is set to exactly 1.0.
inline ScaledSystem rescale(const DenseMatrix& h_mat, const Vector& h_vec) {
    const std::size_t n = h_mat.rows();
    detail::require(h_mat.cols() == n, "rescale: H must be square");
    detail::require(h_vec.size() == n, "rescale: H and h dimension mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            detail::require(h_mat(i, j) == h_mat(j, i), "rescale: H must be symmetric");
        }
    }

    ScaledSystem sys;
    std::vector<double> scale;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = h_mat(i, i);
        detail::require(d >= 0.0, "rescale: negative diagonal entry");
        if (d == 0.0) {
            sys.dropped.push_back(i);
        } else {
            sys.retained.push_back(i);
            scale.push_back(std::sqrt(d));
        }
    }
    sys.scale = Vector(std::move(scale));

    const std::size_t m = sys.retained.size();
    if (m == 0) return sys;

    DenseMatrix q_mat(m, m, 0.0);
    Vector q_vec(m);
    for (std::size_t b = 0; b < m; ++b) {
        const std::size_t jb = sys.retained[b];
        q_mat(b, b) = 1.0;
        for (std::size_t a = 0; a < b; ++a) {
            const std::size_t ja = sys.retained[a];
            const double v = h_mat(ja, jb) / (sys.scale[a] * sys.scale[b]);
            q_mat(a, b) = v;
            q_mat(b, a) = v;
        }
        q_vec[b] = h_vec[jb] / sys.scale[b];
    }
    sys.problem.emplace(std::move(q_mat), std::move(q_vec));
    return sys;
}

/// Map a solution of the rescaled problem back to the original coordinates
/// (dropped columns come back as 0). `n` is the original dimension.
inline Vector unscale(const Vector& y, const ScaledSystem& sys, std::size_t n) {
    detail::require(y.size() == sys.retained.size(), "unscale: dimension mismatch");
    Vector x(n);
    for (std::size_t a = 0; a < y.size(); ++a) {
        const std::size_t i = sys.retained[a];
        detail::require(i < n, "unscale: retained index out of range");
        x[i] = y[a] / sys.scale[a];
    }
    return x;
}

struct NnlsResult {
    Vector x;
    double residual_sq = 0.0;            // ||A x - b||^2
    SolveResult inner;                   // run on the rescaled system
    std::vector<std::size_t> dropped_columns;
};

namespace detail {

inline SolveResult empty_solve_result() {
    SolveResult r;
    r.termination = Termination::EmptyPassiveSet;
    r.trace.push_back({0, 0.0, 0.0, 0, std::chrono::duration<double>{0.0}, std::nullopt});
    r.min_iterate = 0.0;
    return r;
}

inline double residual_norm_sq(const DenseMatrix& a, const Vector& b, const Vector& x) {
    const Vector ax = matvec(a, x);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double r = ax[i] - b[i];
        s += r * r;
    }
    return s;
}

}  // namespace detail

/// Full pipeline: Gram products, cosine rescale, masked projected gradient
/// solve, map back. The reported residual is recomputed from A and b.
inline NnlsResult solve_nnls(const DenseMatrix& a, const Vector& b,
                             const SolverConfig& config = {}) {
    detail::require(a.rows() == b.size(), "solve_nnls: A and b dimension mismatch");
    const DenseMatrix h_mat = gram(a);
    Vector h_vec = transpose_matvec(a, b);
    for (std::size_t i = 0; i < h_vec.size(); ++i) h_vec[i] = -h_vec[i];

    const ScaledSystem sys = rescale(h_mat, h_vec);

    NnlsResult out;
    out.dropped_columns = sys.dropped;
    out.inner = sys.problem ? solve_nqp(*sys.problem, config) : detail::empty_solve_result();
    out.x = unscale(out.inner.x, sys, a.cols());
    out.residual_sq = detail::residual_norm_sq(a, b, out.x);
    return out;
}

inline std::string result_summary_json(const NnlsResult& r) {
    nlohmann::json j;
    j["residual_sq"] = r.residual_sq;
    j["iterations"] = r.inner.iterations();
    j["termination"] = std::string(to_string(r.inner.termination));
    j["dropped_columns"] = r.dropped_columns;
    return j.dump();
}

}  // namespace antilop
