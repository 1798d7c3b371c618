#pragma once

// Accelerated projected gradient baseline (Nesterov momentum) for the
// nonnegative quadratic program, with a fixed step 1/M where M is the
// entrywise 2-norm of Q (an upper bound on the spectral norm, so the step
// is conservative and the iteration never diverges). Momentum makes the
// objective non-monotone; an optional restart resets it whenever the
// objective increases.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "antilop/linalg.hpp"
#include "antilop/nnls.hpp"
#include "antilop/nqp.hpp"

namespace antilop {

inline SolveResult solve_accelerated(const NqpProblem& p, const SolverConfig& config = {}) {
    using clock = std::chrono::steady_clock;
    const std::size_t n = p.dim();
    const double eps = config.resolve_epsilon(n);
    const std::size_t max_iters = config.resolve_max_iters(n);
    const std::size_t trace_every = std::max<std::size_t>(1, config.trace_every);
    const double m_norm = frobenius_norm(p.Q);

    SolveResult result;
    result.min_iterate = 0.0;

    Vector x(n);        // last projected iterate
    Vector y = x;       // extrapolated point
    double t = 1.0;
    double f_prev = std::numeric_limits<double>::infinity();

    double best_gbs = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    const auto t0 = clock::now();

    for (std::size_t k = 0;; ++k) {
        Vector grad = matvec(p.Q, x);
        for (std::size_t i = 0; i < n; ++i) grad[i] += p.q[i];

        const auto mask = passive_mask(x, grad);
        double gbs = 0.0;
        for (std::size_t i : mask) gbs += grad[i] * grad[i];
        const double f = 0.5 * (dot(x, grad) + dot(p.q, x));
        const std::chrono::duration<double> elapsed = clock::now() - t0;

        if (!std::isfinite(f) || !std::isfinite(gbs)) {
            throw NumericFailure("solve_accelerated: non-finite objective or gradient",
                                 result.trace);
        }

        std::optional<Termination> stop;
        if (mask.empty()) {
            stop = Termination::EmptyPassiveSet;
        } else if (gbs < eps) {
            stop = Termination::GradientBelowEpsilon;
        } else if (k >= max_iters) {
            stop = Termination::MaxIters;
        } else if (config.time_cap && elapsed >= *config.time_cap) {
            stop = Termination::TimeCap;
        } else if (m_norm == 0.0) {
            stop = Termination::ZeroCurvature;
        } else if (gbs < best_gbs) {
            best_gbs = gbs;
            since_best = 0;
        } else if (++since_best >= config.stall_window) {
            stop = Termination::Stalled;
        }

        if (stop) {
            result.trace.push_back({k, f, gbs, mask.size(), elapsed, std::nullopt});
            result.termination = *stop;
            break;
        }

        const double alpha = 1.0 / m_norm;
        if (k % trace_every == 0) {
            result.trace.push_back({k, f, gbs, mask.size(), elapsed, alpha});
        }

        // Gradient step from the extrapolated point y, then projection.
        Vector grad_y = matvec(p.Q, y);
        for (std::size_t i = 0; i < n; ++i) grad_y[i] += p.q[i];
        Vector x_next(n);
        for (std::size_t i = 0; i < n; ++i) {
            x_next[i] = std::max(0.0, y[i] - alpha * grad_y[i]);
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double momentum = (t - 1.0) / t_next;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = x_next[i] + momentum * (x_next[i] - x[i]);
        }

        if (config.nesterov_restart && f > f_prev) {
            t = 1.0;
            y = x_next;
        } else {
            t = t_next;
        }
        f_prev = f;
        x = std::move(x_next);

        double mn = 0.0;
        for (std::size_t i = 0; i < n; ++i) mn = std::min(mn, x[i]);
        result.min_iterate = std::min(result.min_iterate, mn);
    }

    Vector final_grad = matvec(p.Q, x);
    for (std::size_t i = 0; i < n; ++i) final_grad[i] += p.q[i];
    result.final_grad = std::move(final_grad);
    result.x = std::move(x);
    return result;
}

/// Rescale to the cosine system first, then run the accelerated solver on
/// it and map back: combines the conditioning transform with momentum.
inline NnlsResult solve_anti_accelerated(const DenseMatrix& a, const Vector& b,
                                         const SolverConfig& config = {}) {
    detail::require(a.rows() == b.size(),
                    "solve_anti_accelerated: A and b dimension mismatch");
    const DenseMatrix h_mat = gram(a);
    Vector h_vec = transpose_matvec(a, b);
    for (std::size_t i = 0; i < h_vec.size(); ++i) h_vec[i] = -h_vec[i];

    const ScaledSystem sys = rescale(h_mat, h_vec);

    NnlsResult out;
    out.dropped_columns = sys.dropped;
    out.inner = sys.problem ? solve_accelerated(*sys.problem, config)
                            : detail::empty_solve_result();
    out.x = unscale(out.inner.x, sys, a.cols());
    out.residual_sq = detail::residual_norm_sq(a, b, out.x);
    return out;
}

}  // namespace antilop
