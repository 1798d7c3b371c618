#pragma once

// Nonnegative quadratic program solver:
//
//     minimize f(x) = 1/2 x^T Q x + q^T x   subject to x >= 0
//
// using projected gradient descent with an exact line search restricted to
// the passive variables (coordinates that are either strictly positive or
// pushed inward by the gradient). The gradient is maintained incrementally:
// after a step only the columns of Q whose coordinates actually changed are
// touched, so an iteration costs O(n * |passive|) instead of a full matvec.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "antilop/io.hpp"
#include "antilop/linalg.hpp"

namespace antilop {

/// Symmetric quadratic objective data. Q must be square and exactly
/// symmetric (gram() output qualifies), q the matching linear term.
struct NqpProblem {
    DenseMatrix Q;
    Vector q;

    NqpProblem(DenseMatrix Q_, Vector q_) : Q(std::move(Q_)), q(std::move(q_)) {
        detail::require(Q.rows() == Q.cols(), "NqpProblem: Q must be square");
        detail::require(Q.rows() == q.size(), "NqpProblem: Q and q dimension mismatch");
        for (std::size_t j = 0; j < Q.cols(); ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                detail::require(Q(i, j) == Q(j, i), "NqpProblem: Q must be symmetric");
            }
        }
    }

    std::size_t dim() const noexcept { return q.size(); }
};

enum class Termination {
    EmptyPassiveSet,       // no coordinate can move: exact KKT point
    GradientBelowEpsilon,  // ||masked gradient||^2 < epsilon
    MaxIters,
    TimeCap,
    Stalled,           // best ||masked gradient||^2 not improved for stall_window iters
    ZeroCurvature,     // masked direction has Q-curvature 0: objective unbounded below
};

inline std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::EmptyPassiveSet: return "EmptyPassiveSet";
        case Termination::GradientBelowEpsilon: return "GradientBelowEpsilon";
        case Termination::MaxIters: return "MaxIters";
        case Termination::TimeCap: return "TimeCap";
        case Termination::Stalled: return "Stalled";
        case Termination::ZeroCurvature: return "ZeroCurvature";
    }
    return "Unknown";
}

/// Stopping controls shared by all iterative solvers here. Unset epsilon
/// resolves to 1e-10 * n and unset max_iters to 5 * n, both scaled by the
/// problem dimension at solve time.
struct SolverConfig {
    std::optional<double> epsilon;
    std::optional<std::size_t> max_iters;
    std::optional<std::chrono::duration<double>> time_cap;
    std::size_t stall_window = 50;
    std::size_t trace_every = 1;
    bool nesterov_restart = false;  // accelerated solver only
    // Active-set solver only: absolute componentwise KKT tolerance. Unset
    // resolves to 1e-10 * (1 + ||A^T b||_inf), which tracks the gradient
    // scale of the instance; set it when an absolute objective accuracy is
    // needed on badly scaled problems.
    std::optional<double> active_set_tol;

    double resolve_epsilon(std::size_t n) const {
        if (epsilon) {
            detail::require(*epsilon > 0.0, "SolverConfig: epsilon must be > 0");
            return *epsilon;
        }
        return 1e-10 * static_cast<double>(n);
    }

    std::size_t resolve_max_iters(std::size_t n) const {
        if (max_iters) {
            detail::require(*max_iters >= 1, "SolverConfig: max_iters must be >= 1");
            return *max_iters;
        }
        return 5 * n;
    }
};

/// One sampled iteration. alpha is empty on the final record (no step was
/// taken from it).
struct IterRecord {
    std::size_t iter = 0;
    double f = 0.0;
    double grad_bar_sq = 0.0;
    std::size_t passive_count = 0;
    std::chrono::duration<double> elapsed{0.0};
    std::optional<double> alpha;
};

using SolveTrace = std::vector<IterRecord>;

struct SolveResult {
    Vector x;
    SolveTrace trace;
    Termination termination = Termination::MaxIters;
    /// Gradient Qx + q as maintained incrementally at exit; tests compare it
    /// against a fresh matvec to bound accumulated drift.
    Vector final_grad;
    /// Smallest coordinate value seen across every iterate (feasibility
    /// witness; projection keeps this >= 0).
    double min_iterate = std::numeric_limits<double>::infinity();

    std::size_t iterations() const { return trace.empty() ? 0 : trace.back().iter; }
};

/// Optional per-iteration instrumentation.
struct SolveStats {
    /// Scalar multiplies spent in masked matvecs per stepped iteration.
    std::vector<std::size_t> multiplies_per_iter;
};

/// Thrown when an iterate or objective goes non-finite; carries the trace
/// accumulated so far.
class NumericFailure : public std::runtime_error {
public:
    NumericFailure(const std::string& what, SolveTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}

    const SolveTrace& trace() const noexcept { return trace_; }

private:
    SolveTrace trace_;
};

/// Indices free to move at x: strictly positive, or zero with a negative
/// (inward-pointing) gradient. Returned ascending.
inline std::vector<std::size_t> passive_mask(const Vector& x, const Vector& grad) {
    detail::require(x.size() == grad.size(), "passive_mask: length mismatch");
    std::vector<std::size_t> mask;
    mask.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 || grad[i] < 0.0) mask.push_back(i);
    }
    return mask;
}

/// Exact line-search step along -grad_bar: alpha = ||g||^2 / (g^T Q g).
/// Empty when the curvature g^T Q g is <= 0 (flat or unbounded direction).
/// The mask must cover the support of grad_bar.
inline std::optional<double> exact_step(const DenseMatrix& Q, const Vector& grad_bar,
                                        std::span<const std::size_t> mask,
                                        std::size_t* multiply_count = nullptr) {
    double num = 0.0;
    for (std::size_t i : mask) num += grad_bar[i] * grad_bar[i];
    if (num == 0.0) return std::nullopt;
    const Vector qg = masked_matvec(Q, grad_bar, mask, multiply_count);
    double denom = 0.0;
    for (std::size_t i : mask) denom += grad_bar[i] * qg[i];
    if (!(denom > 0.0)) return std::nullopt;
    return num / denom;
}

inline std::optional<double> exact_step(const DenseMatrix& Q, const Vector& grad_bar) {
    std::vector<std::size_t> mask;
    for (std::size_t i = 0; i < grad_bar.size(); ++i) {
        if (grad_bar[i] != 0.0) mask.push_back(i);
    }
    return exact_step(Q, grad_bar, mask);
}

inline double objective(const NqpProblem& p, const Vector& x) {
    detail::require(x.size() == p.dim(), "objective: dimension mismatch");
    return 0.5 * dot(x, matvec(p.Q, x)) + dot(p.q, x);
}

/// KKT residual at x: max over coordinates of |grad_i| where x_i > 0 and of
/// max(0, -grad_i) where x_i == 0. Infinity if x is infeasible.
inline double kkt_error(const NqpProblem& p, const Vector& x) {
    detail::require(x.size() == p.dim(), "kkt_error: dimension mismatch");
    const Vector grad = [&] {
        Vector g = matvec(p.Q, x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += p.q[i];
        return g;
    }();
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.0) return std::numeric_limits<double>::infinity();
        if (x[i] > 0.0) {
            err = std::max(err, std::abs(grad[i]));
        } else {
            err = std::max(err, std::max(0.0, -grad[i]));
        }
    }
    return err;
}

/// Projected gradient descent with exact masked line search. Starts from 0
/// (or `start`, which must be feasible). Stop tests run in this order:
/// empty passive set, gradient tolerance, max_iters, time cap, stall.
/// Steps that would raise f after clamping (the clamp can overshoot when it
/// zeroes coordinates) are halved until they descend, so recorded objective
/// values are nonincreasing.
inline SolveResult solve_nqp(const NqpProblem& p, const SolverConfig& config = {},
                             const std::optional<Vector>& start = std::nullopt,
                             SolveStats* stats = nullptr) {
    using clock = std::chrono::steady_clock;
    const std::size_t n = p.dim();
    const double eps = config.resolve_epsilon(n);
    const std::size_t max_iters = config.resolve_max_iters(n);
    const std::size_t trace_every = std::max<std::size_t>(1, config.trace_every);

    Vector x(n);
    Vector grad = p.q;
    if (start) {
        detail::require(start->size() == n, "solve_nqp: start dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            detail::require((*start)[i] >= 0.0, "solve_nqp: start must be nonnegative");
        }
        x = *start;
        grad = matvec(p.Q, x);
        for (std::size_t i = 0; i < n; ++i) grad[i] += p.q[i];
    }

    SolveResult result;
    result.min_iterate = n ? *std::min_element(x.begin(), x.end()) : 0.0;

    Vector grad_bar(n);
    Vector delta(n);
    Vector cand(n);
    std::vector<std::size_t> changed;
    changed.reserve(n);

    double best_gbs = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    const auto t0 = clock::now();

    for (std::size_t k = 0;; ++k) {
        const auto mask = passive_mask(x, grad);
        double gbs = 0.0;
        for (std::size_t i : mask) gbs += grad[i] * grad[i];
        // f = 1/2 x^T (grad + q) since grad = Qx + q.
        const double f = 0.5 * (dot(x, grad) + dot(p.q, x));
        const std::chrono::duration<double> elapsed = clock::now() - t0;

        if (!std::isfinite(f) || !std::isfinite(gbs)) {
            throw NumericFailure("solve_nqp: non-finite objective or gradient", result.trace);
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
        } else if (gbs < best_gbs) {
            best_gbs = gbs;
            since_best = 0;
        } else if (++since_best >= config.stall_window) {
            stop = Termination::Stalled;
        }

        if (!stop) {
            for (std::size_t i : mask) grad_bar[i] = grad[i];
            std::size_t mults = 0;
            const auto step = exact_step(p.Q, grad_bar, mask, &mults);
            for (std::size_t i : mask) grad_bar[i] = 0.0;
            if (!step) stop = Termination::ZeroCurvature;

            if (!stop) {
                // The clamp below can overshoot: when it zeroes coordinates,
                // the realized move is no longer the ray the step length was
                // optimal for, and f can increase. The contract promises
                // nonincreasing f on every recorded iterate, so the step is
                // halved until the (exactly quadratic) change
                // grad^T d + 1/2 d^T Q d is nonpositive. The full step is
                // kept unchanged whenever it already descends.
                double alpha = *step;
                for (int tries = 0;; ++tries) {
                    changed.clear();
                    for (std::size_t i : mask) {
                        double xi = x[i] - alpha * grad[i];
                        if (xi < 0.0) xi = 0.0;
                        if (xi != x[i]) {
                            cand[i] = xi;
                            delta[i] = xi - x[i];
                            changed.push_back(i);
                        }
                    }
                    if (changed.empty()) break;  // too small to move any coordinate
                    const Vector gd = masked_matvec(p.Q, delta, changed, &mults);
                    double df = 0.0;
                    for (std::size_t i : changed) df += (grad[i] + 0.5 * gd[i]) * delta[i];
                    if (df <= 0.0 || tries >= 60) {
                        for (std::size_t i : changed) {
                            x[i] = cand[i];
                            delta[i] = 0.0;
                        }
                        for (std::size_t i = 0; i < n; ++i) grad[i] += gd[i];
                        break;
                    }
                    for (std::size_t i : changed) delta[i] = 0.0;
                    alpha *= 0.5;
                }
                if (k % trace_every == 0) {
                    result.trace.push_back({k, f, gbs, mask.size(), elapsed, alpha});
                }
                if (stats) stats->multiplies_per_iter.push_back(mults);
                if (n) {
                    result.min_iterate =
                        std::min(result.min_iterate, *std::min_element(x.begin(), x.end()));
                }
                continue;
            }
        }

        result.trace.push_back({k, f, gbs, mask.size(), elapsed, std::nullopt});
        result.termination = *stop;
        break;
    }

    result.x = std::move(x);
    result.final_grad = std::move(grad);
    return result;
}

// ---------------------------------------------------------------------------
// Trace serialization: one CSV row per sampled iteration, alpha blank on the
// final record. elapsed is reported in milliseconds.

inline void write_trace_csv(std::ostream& os, const SolveTrace& trace) {
    os << "iter,elapsed_ms,f,grad_bar_sq,passive_count,alpha\n";
    for (const auto& r : trace) {
        os << r.iter << "," << fmt_g17(r.elapsed.count() * 1e3) << "," << fmt_g17(r.f) << ","
           << fmt_g17(r.grad_bar_sq) << "," << r.passive_count << ","
           << (r.alpha ? fmt_g17(*r.alpha) : std::string()) << "\n";
    }
}

inline void write_trace_csv_file(const std::filesystem::path& p, const SolveTrace& trace) {
    auto f = detail::open_out(p);
    write_trace_csv(f, trace);
}

}  // namespace antilop
