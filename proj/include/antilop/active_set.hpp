#pragma once

// Active-set NNLS baseline operating on the precomputed Gram system
// (H = A^T A, A^T b) rather than on A directly. One variable with the most
// negative gradient is admitted per outer iteration; the equality-
// constrained subproblem on the passive set is solved exactly, with
// feasibility restored by backtracking along the segment between the
// current iterate and the subproblem solution.

#include <algorithm>
#include <chrono>
#include <limits>
#include <vector>

#include "antilop/linalg.hpp"
#include "antilop/nnls.hpp"
#include "antilop/nqp.hpp"

namespace antilop {

namespace detail {

/// Solve S z = rhs for a small dense symmetric positive system by Gaussian
/// elimination with partial pivoting. Returns false when a pivot collapses.
inline bool solve_dense(std::vector<double> s, std::vector<double> rhs,
                        std::size_t n, std::vector<double>& z) {
    double scale = 0.0;
    for (double v : s) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(s[i * n + k]) > std::abs(s[piv * n + k])) piv = i;
        }
        if (std::abs(s[piv * n + k]) <= 1e-14 * scale) return false;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(s[k * n + j], s[piv * n + j]);
            std::swap(rhs[k], rhs[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = s[i * n + k] / s[k * n + k];
            if (m == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) s[i * n + j] -= m * s[k * n + j];
            rhs[i] -= m * rhs[k];
        }
    }
    z.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t j = ii + 1; j < n; ++j) v -= s[ii * n + j] * z[j];
        z[ii] = v / s[ii * n + ii];
    }
    return true;
}

/// Solve H_PP z = rhs_P. On a singular pivot the diagonal is perturbed by
/// 1e-12 * trace(H_PP) / |P| and the solve retried once.
inline bool solve_passive_system(const DenseMatrix& h, const std::vector<std::size_t>& p,
                                 const Vector& rhs, std::vector<double>& z) {
    const std::size_t m = p.size();
    std::vector<double> s(m * m);
    std::vector<double> r(m);
    double trace = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        r[a] = rhs[p[a]];
        for (std::size_t b = 0; b < m; ++b) s[a * m + b] = h(p[a], p[b]);
        trace += h(p[a], p[a]);
    }
    if (solve_dense(s, r, m, z)) return true;
    const double bump = 1e-12 * trace / static_cast<double>(m);
    for (std::size_t a = 0; a < m; ++a) s[a * m + a] += bump;
    return solve_dense(std::move(s), std::move(r), m, z);
}

}  // namespace detail

/// Active-set NNLS on the Gram system. Stopping mirrors the gradient
/// solvers: optimality when no excluded variable has gradient below
/// -tol with tol = 1e-10 * (1 + ||A^T b||_inf) unless overridden via
/// config.active_set_tol, plus max_iters/time_cap.
inline NnlsResult solve_fast_activeset(const DenseMatrix& a, const Vector& b,
                                       const SolverConfig& config = {}) {
    using clock = std::chrono::steady_clock;
    detail::require(a.rows() == b.size(), "solve_fast_activeset: A and b dimension mismatch");

    const std::size_t n = a.cols();
    const DenseMatrix h = gram(a);
    const Vector atb = transpose_matvec(a, b);
    Vector h_vec(n);
    for (std::size_t i = 0; i < n; ++i) h_vec[i] = -atb[i];

    double tol = 1e-10 * (1.0 + norm_inf(atb));
    if (config.active_set_tol) {
        detail::require(*config.active_set_tol > 0.0,
                        "solve_fast_activeset: active_set_tol must be > 0");
        tol = *config.active_set_tol;
    }
    const std::size_t max_iters = config.resolve_max_iters(n);

    Vector x(n);
    Vector grad(n);
    std::vector<std::size_t> passive;   // kept sorted ascending
    std::vector<char> in_passive(n, 0);
    std::vector<double> z;

    SolveResult inner;
    inner.min_iterate = 0.0;
    const auto t0 = clock::now();

    for (std::size_t k = 0;; ++k) {
        const Vector hx = masked_matvec(h, x, passive);
        for (std::size_t i = 0; i < n; ++i) grad[i] = hx[i] + h_vec[i];

        // f = 1/2 x^T H x + h^T x, restricted to the support of x.
        double f = 0.0;
        for (std::size_t i : passive) f += 0.5 * x[i] * (grad[i] + h_vec[i]);
        double gbs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] > 0.0 || grad[i] < 0.0) gbs += grad[i] * grad[i];
        }
        const std::chrono::duration<double> elapsed = clock::now() - t0;

        if (!std::isfinite(f) || !std::isfinite(gbs)) {
            throw NumericFailure("solve_fast_activeset: non-finite objective or gradient",
                                 inner.trace);
        }

        std::size_t candidate = n;
        double gmin = -tol;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_passive[i] && grad[i] < gmin) {
                gmin = grad[i];
                candidate = i;
            }
        }

        std::optional<Termination> stop;
        if (candidate == n) {
            stop = passive.empty() ? Termination::EmptyPassiveSet
                                   : Termination::GradientBelowEpsilon;
        } else if (k >= max_iters) {
            stop = Termination::MaxIters;
        } else if (config.time_cap && elapsed >= *config.time_cap) {
            stop = Termination::TimeCap;
        }

        if (stop) {
            inner.trace.push_back({k, f, gbs, passive.size(), elapsed, std::nullopt});
            inner.termination = *stop;
            break;
        }
        inner.trace.push_back({k, f, gbs, passive.size(), elapsed, std::nullopt});

        passive.insert(std::lower_bound(passive.begin(), passive.end(), candidate), candidate);
        in_passive[candidate] = 1;

        // Inner feasibility loop: solve on the passive set, backtrack onto
        // the feasible region and shrink the set until the subproblem
        // solution is strictly positive.
        const std::size_t inner_cap = 10 * n + 10;
        for (std::size_t pass = 0; pass < inner_cap && !passive.empty(); ++pass) {
            if (!detail::solve_passive_system(h, passive, atb, z)) {
                throw NumericFailure("solve_fast_activeset: singular passive system",
                                     inner.trace);
            }
            bool all_positive = true;
            for (double v : z) {
                if (!(v > 0.0)) {
                    all_positive = false;
                    break;
                }
                if (!std::isfinite(v)) {
                    throw NumericFailure("solve_fast_activeset: non-finite subproblem solution",
                                         inner.trace);
                }
            }
            if (all_positive) {
                for (std::size_t j = 0; j < passive.size(); ++j) x[passive[j]] = z[j];
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            std::size_t pivot = passive.size();
            for (std::size_t j = 0; j < passive.size(); ++j) {
                if (z[j] <= 0.0) {
                    const double xi = x[passive[j]];
                    const double ratio = xi / (xi - z[j]);
                    if (ratio < alpha) {
                        alpha = ratio;
                        pivot = j;
                    }
                }
            }
            for (std::size_t j = 0; j < passive.size(); ++j) {
                double xi = x[passive[j]] + alpha * (z[j] - x[passive[j]]);
                if (xi < 0.0) xi = 0.0;
                x[passive[j]] = xi;
            }
            std::vector<std::size_t> kept;
            kept.reserve(passive.size());
            for (std::size_t j = 0; j < passive.size(); ++j) {
                const std::size_t i = passive[j];
                const bool prune =
                    j == pivot || (z[j] <= 0.0 && x[i] <= 1e-14 * (1.0 + std::abs(z[j])));
                if (prune) {
                    x[i] = 0.0;
                    in_passive[i] = 0;
                } else {
                    kept.push_back(i);
                }
            }
            passive = std::move(kept);
        }

        double mn = 0.0;
        for (std::size_t i = 0; i < n; ++i) mn = std::min(mn, x[i]);
        inner.min_iterate = std::min(inner.min_iterate, mn);
    }

    NnlsResult out;
    out.x = x;
    out.residual_sq = detail::residual_norm_sq(a, b, x);
    inner.x = std::move(x);
    inner.final_grad = std::move(grad);
    out.inner = std::move(inner);
    return out;
}

}  // namespace antilop
