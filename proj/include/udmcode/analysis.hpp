// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "exact_rank.hpp"
#include "schemes.hpp"

namespace udm {

/// Which v are enumerated: only multiples of s per worker, or every count.
enum class EnumerationMode { block_aligned, full };
/// Per-worker cap: v_i <= ℓ (inclusive) or the literal v_i <= ℓ-1 (strict).
enum class PatternBound { inclusive, strict };

inline std::string_view to_string(EnumerationMode m) { return m == EnumerationMode::full ? "full" : "block-aligned"; }
inline std::string_view to_string(PatternBound b) { return b == PatternBound::strict ? "strict" : "inclusive"; }

inline EnumerationMode enumeration_mode_from_string(std::string_view s) {
    if (s == "block-aligned") return EnumerationMode::block_aligned;
    if (s == "full") return EnumerationMode::full;
    throw ConfigError("unknown enumeration mode '" + std::string(s) + "' (expected block-aligned or full)");
}

/// Per-worker completed-column counts.
struct Pattern {
    std::vector<std::size_t> v;

    [[nodiscard]] std::size_t total() const {
        std::size_t t = 0;
        for (auto x : v) t += x;
        return t;
    }
    [[nodiscard]] std::size_t blocks(std::size_t s) const {
        std::size_t b = 0;
        for (auto x : v) b += x / s;
        return b;
    }
    [[nodiscard]] std::string to_string() const {
        std::string out = "(";
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
        return out + ")";
    }
    friend bool operator==(const Pattern&, const Pattern&) = default;
    friend auto operator<=>(const Pattern&, const Pattern&) = default;
};

/// The set of v with Σ floor(v_i/s) = Q_b under a per-worker cap.
class PatternSpace {
public:
    PatternSpace(std::size_t n, std::size_t ell, std::size_t s, std::size_t q_b,
                 EnumerationMode mode = EnumerationMode::block_aligned, PatternBound bound = PatternBound::inclusive)
        : n_(n), ell_(ell), s_(s), q_b_(q_b), mode_(mode), bound_(bound) {
        if (s_ == 0 || ell_ % s_ != 0)
            throw ConfigError("pattern space: s=" + std::to_string(s_) + " must divide ell=" + std::to_string(ell_));
        const std::size_t cap = bound_ == PatternBound::strict ? ell_ - 1 : ell_;
        for (std::size_t x = 0; x <= cap; ++x)
            if (mode_ == EnumerationMode::full || x % s_ == 0) values_.push_back(x);
        max_blocks_ = cap / s_;
    }

    static PatternSpace for_collection(const GeneratorCollection& c, EnumerationMode mode = EnumerationMode::block_aligned,
                                       PatternBound bound = PatternBound::inclusive) {
        return {c.workers(), c.ell(), c.block_size(), c.q_b(), mode, bound};
    }

    [[nodiscard]] std::size_t workers() const noexcept { return n_; }
    [[nodiscard]] std::size_t ell() const noexcept { return ell_; }
    [[nodiscard]] std::size_t block_size() const noexcept { return s_; }
    [[nodiscard]] std::size_t q_b() const noexcept { return q_b_; }
    [[nodiscard]] EnumerationMode mode() const noexcept { return mode_; }
    [[nodiscard]] PatternBound bound() const noexcept { return bound_; }

    /// False when Q_b·s > N·ℓ, i.e. no pattern can deliver Q_b blocks.
    [[nodiscard]] bool parameters_consistent() const noexcept { return q_b_ * s_ <= n_ * ell_; }

    [[nodiscard]] bool contains(const Pattern& p) const {
        if (p.v.size() != n_) return false;
        for (auto x : p.v)
            if (std::find(values_.begin(), values_.end(), x) == values_.end()) return false;
        return p.blocks(s_) == q_b_;
    }

    /// Number of patterns, by dynamic programming over workers.
    [[nodiscard]] std::uint64_t count() const {
        std::vector<long double> ways(q_b_ + 1, 0.0L);
        ways[0] = 1.0L;
        for (std::size_t w = 0; w < n_; ++w) {
            std::vector<long double> next(q_b_ + 1, 0.0L);
            for (std::size_t b = 0; b <= q_b_; ++b) {
                if (ways[b] == 0) continue;
                for (auto x : values_)
                    if (b + x / s_ <= q_b_) next[b + x / s_] += ways[b];
            }
            ways.swap(next);
        }
        const long double c = ways[q_b_];
        return c > 1.8e19L ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(c);
    }

    /// Visits patterns in lexicographic order. `visit` may return false to stop early.
    template <typename Visit>
    void for_each(Visit&& visit) const {
        Pattern cur{std::vector<std::size_t>(n_, 0)};
        bool stop = false;
        recurse(0, 0, cur, visit, stop);
    }

    [[nodiscard]] std::vector<Pattern> all() const {
        std::vector<Pattern> out;
        for_each([&](const Pattern& p) { out.push_back(p); });
        return out;
    }

private:
    template <typename Visit>
    void recurse(std::size_t worker, std::size_t blocks, Pattern& cur, Visit& visit, bool& stop) const {
        if (stop) return;
        if (worker == n_) {
            if (blocks != q_b_) return;
            if constexpr (std::is_same_v<decltype(visit(cur)), bool>) {
                if (!visit(static_cast<const Pattern&>(cur))) stop = true;
            } else {
                visit(static_cast<const Pattern&>(cur));
            }
            return;
        }
        const std::size_t remaining_workers = n_ - worker - 1;
        for (auto x : values_) {
            const std::size_t b = blocks + x / s_;
            if (b > q_b_) break;
            if (q_b_ - b > remaining_workers * max_blocks_) continue;
            cur.v[worker] = x;
            recurse(worker + 1, b, cur, visit, stop);
            if (stop) return;
        }
        cur.v[worker] = 0;
    }

    std::size_t n_, ell_, s_, q_b_;
    EnumerationMode mode_;
    PatternBound bound_;
    std::vector<std::size_t> values_;
    std::size_t max_blocks_ = 0;
};

/// Δ × Σv matrix of the leading v_k columns of each G_k, in worker order.
template <typename T>
Matrix<T> assemble_g(const std::vector<Matrix<T>>& gs, const Pattern& v) {
    if (v.v.size() != gs.size())
        throw ConfigError("pattern has " + std::to_string(v.v.size()) + " entries for " + std::to_string(gs.size()) + " workers");
    const std::size_t rows = gs.front().rows();
    Matrix<T> out(rows, v.total());
    std::size_t col = 0;
    for (std::size_t k = 0; k < gs.size(); ++k) {
        if (v.v[k] > gs[k].cols())
            throw ConfigError("pattern entry v_" + std::to_string(k) + "=" + std::to_string(v.v[k]) + " exceeds ell=" +
                              std::to_string(gs[k].cols()));
        for (std::size_t j = 0; j < v.v[k]; ++j, ++col)
            for (std::size_t i = 0; i < rows; ++i) out(i, col) = gs[k](i, j);
    }
    return out;
}

inline Eigen::MatrixXd assemble_numeric(const std::vector<Matrix<double>>& gs, const Pattern& v) {
    const Matrix<double> m = assemble_g(gs, v);
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return out;
}

/// Default relative floor below which the smallest singular value counts as zero.
inline constexpr double kSingularTolerance = 1e-12;

/// σ_max / σ_Δ of a Δ×Δ_v matrix with Δ_v >= Δ; infinity when σ_Δ < tol·σ_max.
inline double condition_number(const Eigen::MatrixXd& g, double tol = kSingularTolerance) {
    if (g.rows() == 0) throw ConfigError("condition number of an empty matrix");
    if (g.cols() < g.rows())
        throw ConfigError("condition number needs at least as many columns as rows (" + std::to_string(g.cols()) + " < " +
                          std::to_string(g.rows()) + ")");
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    const auto& sv = svd.singularValues();
    const double hi = sv(0);
    const double lo = sv(g.rows() - 1);
    if (hi == 0.0 || lo < tol * hi) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

enum class RankMethod { automatic, exact, numerical };

struct CertifyOptions {
    EnumerationMode mode = EnumerationMode::block_aligned;
    PatternBound bound = PatternBound::inclusive;
    RankMethod method = RankMethod::automatic;
    double rank_tol = 1e-10;
    std::uint64_t budget = 10'000'000;
};

struct CertificationVerdict {
    bool passed = true;
    std::string method; // exact-field, exact-integer, exact-rational or numerical
    std::uint64_t patterns_checked = 0;
    std::optional<Pattern> failing;
};

namespace detail {

inline std::string rank_method_label(const GeneratorCollection& c, RankMethod m) {
    if (m == RankMethod::numerical) {
        if (!c.is_numeric()) throw ConfigError("numerical rank is only available for real or integer-lift collections");
        return "numerical";
    }
    switch (c.domain()) {
    case Domain::real: return "exact-rational";
    case Domain::integer_lift: return "exact-integer";
    default: return "exact-field";
    }
}

inline bool numerical_full_row_rank(const Eigen::MatrixXd& g, double tol) {
    if (g.cols() < g.rows()) return false;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    const auto& sv = svd.singularValues();
    return sv(0) > 0.0 && sv(g.rows() - 1) > tol * sv(0);
}

inline void check_budget(std::uint64_t count, std::uint64_t budget) {
    if (count > budget)
        throw ConfigError("pattern budget exceeded: " + std::to_string(count) + " patterns > budget " +
                          std::to_string(budget) + "; use block-aligned mode or raise the budget");
}

} // namespace detail

/// Whether the pattern's selected-column matrix has full row rank Δ.
inline bool pattern_full_rank(const GeneratorCollection& c, const Pattern& v, RankMethod method = RankMethod::automatic,
                              double rank_tol = 1e-10) {
    if (v.total() < c.delta()) return false;
    if (method == RankMethod::numerical) {
        if (!c.is_numeric()) throw ConfigError("numerical rank is only available for real or integer-lift collections");
        return detail::numerical_full_row_rank(assemble_numeric(c.numeric_matrices(), v), rank_tol);
    }
    switch (c.domain()) {
    case Domain::real: return rational_rank(assemble_g(c.rational_matrices(), v)) == c.delta();
    case Domain::integer_lift: return integer_rank(assemble_g(c.integer_matrices(), v)) == c.delta();
    default: return field_rank(*c.field(), assemble_g(c.field_matrices(), v)) == c.delta();
    }
}

/// Checks rank Δ for every pattern of the space; stops at the first failure.
inline CertificationVerdict certify_full_rank(const GeneratorCollection& c, const CertifyOptions& opt = {}) {
    const PatternSpace space = PatternSpace::for_collection(c, opt.mode, opt.bound);
    detail::check_budget(space.count(), opt.budget);
    CertificationVerdict verdict;
    verdict.method = detail::rank_method_label(c, opt.method);
    space.for_each([&](const Pattern& v) {
        ++verdict.patterns_checked;
        if (pattern_full_rank(c, v, opt.method, opt.rank_tol)) return true;
        verdict.passed = false;
        verdict.failing = v;
        return false;
    });
    return verdict;
}

/// Worst-case number of products computed before Q_b blocks arrive:
/// Δ(1 + (N-1)(s-1)/Δ) = Δ + (N-1)(s-1).
inline double worst_case_load(std::size_t n, std::size_t delta, std::size_t s) {
    return static_cast<double>(delta + (n - 1) * (s - 1));
}

/// The same worst case when per-worker storage ℓ caps the unreported partial blocks:
/// a worker holding every one of its ℓ/s blocks has no partial block left to waste.
/// Returns nullopt when N workers cannot deliver Q_b blocks at all.
inline std::optional<std::size_t> attainable_worst_case_load(std::size_t n, std::size_t ell, std::size_t s, std::size_t q_b) {
    if (s == 0 || ell % s != 0) throw ConfigError("s must divide ell");
    const std::size_t per_worker = ell / s;
    if (q_b == 0 || n == 0 || q_b > n * per_worker) return std::nullopt;
    // the stopping worker takes up to per_worker blocks, the others keep one block free for a partial
    const std::size_t roomy = per_worker + (n - 1) * (per_worker - 1);
    const std::size_t full_others = q_b > roomy ? q_b - roomy : 0;
    return q_b * s + (n - 1 - full_others) * (s - 1);
}

struct AnalyzeOptions {
    EnumerationMode mode = EnumerationMode::block_aligned;
    PatternBound bound = PatternBound::inclusive;
    RankMethod method = RankMethod::automatic;
    double rank_tol = 1e-10;
    double kappa_tol = kSingularTolerance;
    std::uint64_t budget = 10'000'000;
    unsigned threads = 0; // 0: hardware concurrency
    bool certify = true;
};

struct AnalysisReport {
    std::string scheme;
    Domain domain = Domain::real;
    std::string field;
    std::vector<std::string> betas;
    std::string beta_source;
    std::size_t workers = 0, delta = 0, ell = 0, block_size = 1, q_b = 0;
    EnumerationMode mode = EnumerationMode::block_aligned;
    PatternBound bound = PatternBound::inclusive;
    std::uint64_t pattern_count = 0;
    std::optional<CertificationVerdict> verdict;
    std::optional<double> max_kappa; // absent for finite-field collections
    std::optional<double> avg_kappa;
    std::uint64_t infinite_count = 0;
    double density = 0.0;
    double worst_case_load = 0.0;
};

namespace detail {

struct PatternResult {
    double kappa = 0.0;
    bool full_rank = true;
};

template <typename Work>
void run_batch(std::size_t size, unsigned threads, Work&& work) {
    if (threads <= 1 || size < 64) {
        for (std::size_t i = 0; i < size; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < size; i += threads) work(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

/// κ of every pattern in enumeration order (infinite for numerically singular ones).
inline std::vector<double> pattern_condition_numbers(const GeneratorCollection& c, const AnalyzeOptions& opt = {}) {
    const PatternSpace space = PatternSpace::for_collection(c, opt.mode, opt.bound);
    detail::check_budget(space.count(), opt.budget);
    std::vector<double> out;
    const auto& gs = c.numeric_matrices();
    space.for_each([&](const Pattern& v) { out.push_back(condition_number(assemble_numeric(gs, v), opt.kappa_tol)); });
    return out;
}

/// Max/avg κ over the pattern space, exact certification, density and worst-case load.
/// Patterns are processed in fixed-size batches and reduced in enumeration order, so the
/// result does not depend on the thread count.
inline AnalysisReport analyze(const GeneratorCollection& c, const AnalyzeOptions& opt = {}) {
    const PatternSpace space = PatternSpace::for_collection(c, opt.mode, opt.bound);
    AnalysisReport rep;
    const auto& prov = c.provenance();
    rep.scheme = prov.construction;
    rep.domain = c.domain();
    rep.field = prov.field;
    rep.betas = prov.betas;
    rep.beta_source = prov.beta_source;
    rep.workers = c.workers();
    rep.delta = c.delta();
    rep.ell = c.ell();
    rep.block_size = c.block_size();
    rep.q_b = c.q_b();
    rep.mode = opt.mode;
    rep.bound = opt.bound;
    rep.density = c.density();
    rep.worst_case_load = worst_case_load(c.workers(), c.delta(), c.block_size());
    rep.pattern_count = space.count();
    detail::check_budget(rep.pattern_count, opt.budget);

    CertificationVerdict verdict;
    if (opt.certify) verdict.method = detail::rank_method_label(c, opt.method);
    const bool numeric = c.is_numeric();
    const unsigned threads = opt.threads ? opt.threads : std::max(1U, std::thread::hardware_concurrency());

    double max_kappa = 0.0;
    double sum_kappa = 0.0;
    std::uint64_t finite = 0;
    std::vector<Pattern> batch;
    constexpr std::size_t kBatch = 4096;
    auto flush = [&] {
        std::vector<detail::PatternResult> results(batch.size());
        detail::run_batch(batch.size(), threads, [&](std::size_t i) {
            auto& r = results[i];
            if (numeric) r.kappa = condition_number(assemble_numeric(c.numeric_matrices(), batch[i]), opt.kappa_tol);
            if (opt.certify) r.full_rank = pattern_full_rank(c, batch[i], opt.method, opt.rank_tol);
        });
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto& r = results[i];
            if (opt.certify) {
                ++verdict.patterns_checked;
                if (!r.full_rank && verdict.passed) {
                    verdict.passed = false;
                    verdict.failing = batch[i];
                }
            }
            if (!numeric) continue;
            if (std::isinf(r.kappa)) {
                ++rep.infinite_count;
                max_kappa = r.kappa;
                continue;
            }
            max_kappa = std::max(max_kappa, r.kappa);
            sum_kappa += r.kappa;
            ++finite;
        }
        batch.clear();
    };
    space.for_each([&](const Pattern& v) {
        batch.push_back(v);
        if (batch.size() == kBatch) flush();
    });
    flush();

    if (opt.certify) rep.verdict = verdict;
    if (numeric && rep.pattern_count > 0) {
        rep.max_kappa = max_kappa;
        rep.avg_kappa = finite ? sum_kappa / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    }
    return rep;
}

} // namespace udm
