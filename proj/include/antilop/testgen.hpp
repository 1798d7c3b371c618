#pragma once

// Synthetic NNLS instance families. Six kinds crossing the entry sign law
// with the column length law:
//
//   kind  entries            column lengths
//   T1    nonnegative        all 1 (unit columns)
//   T2    mixed sign         uniform in [0.5, 2]
//   T3    nonnegative        10^u, u uniform in [-2, 2]
//   T4    mixed sign         all 1
//   T5    nonnegative        uniform in [0.5, 2]
//   T6    mixed sign         10^u, u uniform in [-2, 2]
//
// Nonnegative entries are uniform in [0, 1), mixed-sign in [-1, 1). A
// sparsity fraction s zeroes round(s*d) positions per column (and round(s*n)
// in the planted solution), chosen without replacement. Each column k is
// drawn from its own counter-based substream of one SplitMix64 seed, so
// generation is bit-reproducible across platforms and insensitive to
// evaluation order. The planted solution x_star follows the kind's sign
// law and b = A x_star, so the nonnegative kinds have a feasible planted
// solution and optimal objective exactly 0, while the mixed kinds plant a
// signed x_star that no feasible point can reproduce in general.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "antilop/io.hpp"
#include "antilop/linalg.hpp"

#include "json.hpp"

namespace antilop::testgen {

/// SplitMix64: 64-bit counter stream with a strong output mix. Chosen for
/// portability: the sequence is defined purely by integer arithmetic.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform index in [0, bound). Slight modulo bias is irrelevant at the
    /// bounds used here and keeps the stream consumption fixed at one draw.
    std::size_t index_below(std::size_t bound) {
        return static_cast<std::size_t>(next() % bound);
    }

private:
    std::uint64_t state_;
};

/// Substream `stream` of a master seed: columns use streams 0..n-1, the
/// planted solution uses stream n. Seeding applies the SplitMix64 output mix
/// to seed + stream * golden so neighbouring streams start far apart.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return SplitMix64(z ^ (z >> 31));
}

/// Identifies the generation scheme in saved metadata; bump when the
/// drawing order changes.
inline constexpr std::string_view kGeneratorId = "splitmix64-colsub/1";

enum class TestKind { T1, T2, T3, T4, T5, T6 };

inline constexpr std::array<TestKind, 6> kAllKinds = {TestKind::T1, TestKind::T2, TestKind::T3,
                                                      TestKind::T4, TestKind::T5, TestKind::T6};

inline std::string_view to_string(TestKind k) {
    switch (k) {
        case TestKind::T1: return "T1";
        case TestKind::T2: return "T2";
        case TestKind::T3: return "T3";
        case TestKind::T4: return "T4";
        case TestKind::T5: return "T5";
        case TestKind::T6: return "T6";
    }
    return "?";
}

inline TestKind parse_kind(std::string_view s) {
    for (TestKind k : kAllKinds) {
        if (s == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown test kind: " + std::string(s));
}

/// Mixed-sign kinds draw entries in [-1, 1); the rest in [0, 1).
inline bool is_mixed_kind(TestKind k) {
    return k == TestKind::T2 || k == TestKind::T4 || k == TestKind::T6;
}

inline bool is_nonnegative_kind(TestKind k) { return !is_mixed_kind(k); }

struct TestCaseSpec {
    TestKind kind = TestKind::T1;
    std::size_t n = 400;   // columns / variables
    std::size_t d = 600;   // rows
    double sparsity = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        detail::require(n >= 2, "TestCaseSpec: n must be >= 2");
        detail::require(d >= n, "TestCaseSpec: d must be >= n");
        detail::require(sparsity >= 0.0 && sparsity <= 0.4,
                        "TestCaseSpec: sparsity must be in [0, 0.4]");
    }
};

struct TestInstance {
    TestCaseSpec spec;
    DenseMatrix A;
    Vector x_star;
    Vector b;
    std::optional<double> f_star_known;  // 0 for nonnegative kinds

    TestInstance() : A(1, 1, 0.0) {}
};

namespace gen_detail {

inline double draw_entry(SplitMix64& rng, bool mixed) {
    return mixed ? rng.uniform(-1.0, 1.0) : rng.uniform01();
}

inline double draw_length(SplitMix64& rng, TestKind kind) {
    switch (kind) {
        case TestKind::T1:
        case TestKind::T4:
            return 1.0;
        case TestKind::T2:
        case TestKind::T5:
            return rng.uniform(0.5, 2.0);
        case TestKind::T3:
        case TestKind::T6:
            return std::pow(10.0, rng.uniform(-2.0, 2.0));
    }
    return 1.0;
}

/// Zero `count` positions of `v` chosen without replacement (partial
/// Fisher-Yates over an index array).
inline void zero_positions(SplitMix64& rng, std::vector<double>& v, std::size_t count) {
    if (count == 0) return;
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t j = t + rng.index_below(idx.size() - t);
        std::swap(idx[t], idx[j]);
        v[idx[t]] = 0.0;
    }
}

}  // namespace gen_detail

/// Draw one instance. Per column: entries, sparsity zeroing, then a length
/// target; the column is scaled to that Euclidean length (redrawn, up to 64
/// times, in the unlikely event it comes out identically zero).
inline TestInstance generate(const TestCaseSpec& spec) {
    spec.validate();
    const bool mixed = is_mixed_kind(spec.kind);
    const std::size_t zero_per_col =
        static_cast<std::size_t>(std::llround(spec.sparsity * static_cast<double>(spec.d)));
    const std::size_t zero_in_xstar =
        static_cast<std::size_t>(std::llround(spec.sparsity * static_cast<double>(spec.n)));

    TestInstance inst;
    inst.spec = spec;
    inst.A = DenseMatrix(spec.d, spec.n, 0.0);

    std::vector<double> col(spec.d);
    for (std::size_t k = 0; k < spec.n; ++k) {
        SplitMix64 rng = substream(spec.seed, k);
        double norm = 0.0;
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (std::size_t i = 0; i < spec.d; ++i) {
                col[i] = gen_detail::draw_entry(rng, mixed);
            }
            gen_detail::zero_positions(rng, col, zero_per_col);
            norm = 0.0;
            for (double v : col) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > 0.0) break;
        }
        if (norm == 0.0) {
            throw std::runtime_error("generate: could not draw a nonzero column");
        }
        const double target = gen_detail::draw_length(rng, spec.kind);
        const double s = target / norm;
        for (std::size_t i = 0; i < spec.d; ++i) inst.A(i, k) = col[i] * s;
    }

    SplitMix64 rng = substream(spec.seed, spec.n);
    std::vector<double> xs(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) xs[i] = gen_detail::draw_entry(rng, mixed);
    gen_detail::zero_positions(rng, xs, zero_in_xstar);
    inst.x_star = Vector(std::move(xs));

    inst.b = matvec(inst.A, inst.x_star);
    if (is_nonnegative_kind(spec.kind)) inst.f_star_known = 0.0;
    return inst;
}

/// Reference optimum for reporting objective gaps. Nonnegative kinds plant
/// b = A x_star with x_star >= 0, so the optimum is exactly 0. Mixed kinds
/// have no closed form; the convention is the best objective any solver
/// reached on the instance.
inline double reference_fstar(const TestInstance& inst,
                              std::span<const double> candidate_objectives) {
    if (inst.f_star_known) return *inst.f_star_known;
    detail::require(!candidate_objectives.empty(),
                    "reference_fstar: mixed-sign kinds need candidate objectives");
    double best = candidate_objectives[0];
    for (double v : candidate_objectives) best = std::min(best, v);
    return best;
}

// ---------------------------------------------------------------------------
// On-disk layout: A.mtx, b.mtx, xstar.mtx (MatrixMarket array) plus
// meta.json describing the draw. b is stored and reloaded verbatim, never
// regenerated, so a saved case stays fixed even if the generator evolves.

inline void save_instance(const std::filesystem::path& dir, const TestInstance& inst) {
    std::filesystem::create_directories(dir);
    save_matrix(dir / "A.mtx", inst.A);
    save_vector(dir / "b.mtx", inst.b);
    save_vector(dir / "xstar.mtx", inst.x_star);

    nlohmann::json meta;
    meta["kind"] = std::string(to_string(inst.spec.kind));
    meta["n"] = inst.spec.n;
    meta["d"] = inst.spec.d;
    meta["sparsity"] = inst.spec.sparsity;
    meta["seed"] = inst.spec.seed;
    meta["generator"] = std::string(kGeneratorId);
    if (inst.f_star_known) {
        meta["f_star_known"] = *inst.f_star_known;
    } else {
        meta["f_star_known"] = nullptr;
    }
    auto f = detail::open_out(dir / "meta.json");
    f << meta.dump(2) << "\n";
}

inline TestInstance load_instance(const std::filesystem::path& dir) {
    auto mf = detail::open_in(dir / "meta.json");
    nlohmann::json meta = nlohmann::json::parse(mf);

    TestInstance inst;
    inst.spec.kind = parse_kind(meta.at("kind").get<std::string>());
    inst.spec.n = meta.at("n").get<std::size_t>();
    inst.spec.d = meta.at("d").get<std::size_t>();
    inst.spec.sparsity = meta.at("sparsity").get<double>();
    inst.spec.seed = meta.at("seed").get<std::uint64_t>();
    inst.A = load_matrix(dir / "A.mtx");
    inst.b = load_vector(dir / "b.mtx");
    inst.x_star = load_vector(dir / "xstar.mtx");
    if (!meta.at("f_star_known").is_null()) {
        inst.f_star_known = meta.at("f_star_known").get<double>();
    }

    detail::require(inst.A.rows() == inst.spec.d && inst.A.cols() == inst.spec.n,
                    "load_instance: matrix shape does not match metadata");
    detail::require(inst.b.size() == inst.spec.d, "load_instance: b length mismatch");
    detail::require(inst.x_star.size() == inst.spec.n, "load_instance: x_star length mismatch");
    return inst;
}

}  // namespace antilop::testgen
