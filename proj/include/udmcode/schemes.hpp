// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "companion.hpp"
#include "exact_rank.hpp"
#include "gf.hpp"
#include "matrix.hpp"

namespace udm {

enum class Domain { real, integer_lift, prime_field, extension_field };

inline std::string_view to_string(Domain d) {
    switch (d) {
    case Domain::real: return "real";
    case Domain::integer_lift: return "integer-lift";
    case Domain::prime_field: return "prime-field";
    case Domain::extension_field: return "extension-field";
    }
    return "?";
}

inline Domain domain_from_string(std::string_view s) {
    if (s == "real") return Domain::real;
    if (s == "integer-lift") return Domain::integer_lift;
    if (s == "prime-field") return Domain::prime_field;
    if (s == "extension-field") return Domain::extension_field;
    throw ConfigError("unknown domain '" + std::string(s) + "'");
}

/// Where a collection came from; serialized alongside the matrices.
struct Provenance {
    std::string construction;
    std::string field;            // canonical field spec, empty for real constructions
    std::string beta_source;
    std::vector<std::string> betas;
    std::optional<std::uint64_t> seed;
    std::string note;
};

/// N generator matrices of shape Δ×ℓ over one domain, with reporting block size s.
/// Immutable once built; the factories validate shapes and s | Δ, s | ℓ.
class GeneratorCollection {
public:
    static GeneratorCollection real(std::vector<Matrix<Rational>> ms, std::size_t s, Provenance prov) {
        GeneratorCollection c(Domain::real, std::nullopt, s, std::move(prov));
        c.check_shapes(ms);
        c.numeric_.reserve(ms.size());
        for (const auto& m : ms)
            c.numeric_.push_back(m.map([](const Rational& v) { return v.convert_to<double>(); }));
        c.rational_ = std::move(ms);
        return c;
    }

    static GeneratorCollection integer(std::vector<IntMatrix> ms, std::size_t s, Provenance prov) {
        GeneratorCollection c(Domain::integer_lift, std::nullopt, s, std::move(prov));
        c.check_shapes(ms);
        for (const auto& m : ms) c.numeric_.push_back(m.map([](std::int64_t v) { return static_cast<double>(v); }));
        c.integer_ = std::move(ms);
        return c;
    }

    static GeneratorCollection over_field(const GfContext& ctx, std::vector<Matrix<GfElement>> ms, Provenance prov) {
        GeneratorCollection c(ctx.is_prime_field() ? Domain::prime_field : Domain::extension_field, ctx, 1,
                              std::move(prov));
        c.check_shapes(ms);
        for (const auto& m : ms)
            for (const auto& e : m.data())
                if (!ctx.contains(e)) throw FieldError("generator entry does not belong to the declared field");
        c.field_matrices_ = std::move(ms);
        return c;
    }

    [[nodiscard]] std::size_t workers() const noexcept { return n_; }
    [[nodiscard]] std::size_t delta() const noexcept { return delta_; }
    [[nodiscard]] std::size_t ell() const noexcept { return ell_; }
    [[nodiscard]] std::size_t block_size() const noexcept { return s_; }
    [[nodiscard]] std::size_t q_b() const noexcept { return delta_ / s_; }
    [[nodiscard]] Domain domain() const noexcept { return domain_; }
    [[nodiscard]] const std::optional<GfContext>& field() const noexcept { return field_; }
    [[nodiscard]] const Provenance& provenance() const noexcept { return prov_; }
    [[nodiscard]] bool is_numeric() const noexcept {
        return domain_ == Domain::real || domain_ == Domain::integer_lift;
    }

    /// Floating-point view; available for real and integer-lift domains.
    [[nodiscard]] const std::vector<Matrix<double>>& numeric_matrices() const {
        if (!is_numeric()) throw ConfigError("collection over a finite field has no real-valued view; embed it first");
        return numeric_;
    }
    [[nodiscard]] const std::vector<Matrix<Rational>>& rational_matrices() const {
        if (domain_ != Domain::real) throw ConfigError("rational view requested for a non-real collection");
        return rational_;
    }
    [[nodiscard]] const std::vector<IntMatrix>& integer_matrices() const {
        if (domain_ != Domain::integer_lift) throw ConfigError("integer view requested for a non-integer collection");
        return integer_;
    }
    [[nodiscard]] const std::vector<Matrix<GfElement>>& field_matrices() const {
        if (!field_) throw ConfigError("field view requested for a collection without a field");
        return field_matrices_;
    }

    /// Fraction of nonzero entries over all N·Δ·ℓ generator entries.
    [[nodiscard]] double density() const {
        std::size_t nnz = 0;
        switch (domain_) {
        case Domain::real:
            for (const auto& m : rational_) nnz += std::count_if(m.data().begin(), m.data().end(), [](const Rational& v) { return v != 0; });
            break;
        case Domain::integer_lift:
            for (const auto& m : integer_) nnz += std::count_if(m.data().begin(), m.data().end(), [](std::int64_t v) { return v != 0; });
            break;
        default:
            for (const auto& m : field_matrices_)
                nnz += std::count_if(m.data().begin(), m.data().end(), [](GfElement e) { return e.packed != 0; });
        }
        return static_cast<double>(nnz) / static_cast<double>(n_ * delta_ * ell_);
    }

    [[nodiscard]] GeneratorCollection with_block_size(std::size_t s) const {
        GeneratorCollection c = *this;
        c.s_ = s;
        c.check_block_size();
        return c;
    }

private:
    GeneratorCollection(Domain d, std::optional<GfContext> f, std::size_t s, Provenance prov)
        : domain_(d), field_(std::move(f)), s_(s), prov_(std::move(prov)) {}

    template <typename T>
    void check_shapes(const std::vector<Matrix<T>>& ms) {
        if (ms.empty()) throw ConfigError("a collection needs at least one worker matrix");
        n_ = ms.size();
        delta_ = ms.front().rows();
        ell_ = ms.front().cols();
        if (delta_ == 0 || ell_ == 0) throw ConfigError("generator matrices must be non-empty");
        for (const auto& m : ms)
            if (m.rows() != delta_ || m.cols() != ell_)
                throw ConfigError("all generator matrices must share the shape " + std::to_string(delta_) + "x" +
                                  std::to_string(ell_));
        check_block_size();
    }

    void check_block_size() const {
        if (s_ == 0 || delta_ % s_ != 0 || ell_ % s_ != 0)
            throw ConfigError("block size s=" + std::to_string(s_) + " must divide both delta=" + std::to_string(delta_) +
                              " and ell=" + std::to_string(ell_));
    }

    Domain domain_;
    std::optional<GfContext> field_;
    std::size_t n_ = 0;
    std::size_t delta_ = 0;
    std::size_t ell_ = 0;
    std::size_t s_ = 1;
    Provenance prov_;
    std::vector<Matrix<Rational>> rational_;
    std::vector<IntMatrix> integer_;
    std::vector<Matrix<GfElement>> field_matrices_;
    std::vector<Matrix<double>> numeric_;
};

inline std::string rational_string(const Rational& r) { return r.str(); }

/// `count` equally spaced points from lo to hi inclusive, as exact rationals.
inline std::vector<Rational> equispaced_points(std::size_t count, const Rational& lo = Rational(-1),
                                               const Rational& hi = Rational(1)) {
    if (count == 0) return {};
    if (count == 1) return {lo};
    std::vector<Rational> out;
    out.reserve(count);
    for (std::size_t m = 0; m < count; ++m)
        out.push_back(lo + (hi - lo) * Rational(static_cast<long long>(m), static_cast<long long>(count - 1)));
    return out;
}

namespace detail {

inline void require_positive(std::size_t n, std::size_t delta, std::size_t ell) {
    if (n == 0 || delta == 0 || ell == 0) throw ConfigError("N, delta and ell must all be positive");
}

template <typename T, typename Less = std::less<T>>
void require_distinct(const std::vector<T>& values, const char* what) {
    std::set<T, Less> seen;
    for (const auto& v : values)
        if (!seen.insert(v).second) throw ConfigError(std::string("duplicate evaluation point in ") + what);
}

struct GfLess {
    bool operator()(GfElement a, GfElement b) const { return a.packed < b.packed; }
};

inline BigInt binomial(std::size_t n, std::size_t k) {
    if (k > n) return BigInt(0);
    BigInt r = 1;
    for (std::size_t t = 0; t < k; ++t) r = r * (n - t) / (t + 1);
    return r;
}

inline std::vector<std::string> beta_strings(const std::vector<Rational>& b) {
    std::vector<std::string> out;
    for (const auto& v : b) out.push_back(rational_string(v));
    return out;
}

inline std::vector<std::string> beta_strings(const GfContext& ctx, const std::vector<GfElement>& b) {
    std::vector<std::string> out;
    for (const auto& v : b) out.push_back(ctx.to_string(v));
    return out;
}

} // namespace detail

/// G_k(i,j) = β_{k,j}^i with β_{k,j} = betas[k·ℓ + j].
inline GeneratorCollection make_rs_real(std::size_t n, std::size_t delta, std::size_t ell, std::vector<Rational> betas,
                                        std::string beta_source = "explicit") {
    detail::require_positive(n, delta, ell);
    if (betas.size() != n * ell)
        throw ConfigError("rs-real needs N*ell = " + std::to_string(n * ell) + " evaluation points, got " +
                          std::to_string(betas.size()));
    detail::require_distinct(betas, "rs-real");
    std::vector<Matrix<Rational>> ms;
    for (std::size_t k = 0; k < n; ++k) {
        Matrix<Rational> g(delta, ell);
        for (std::size_t j = 0; j < ell; ++j) {
            Rational power = 1;
            for (std::size_t i = 0; i < delta; ++i) {
                g(i, j) = power;
                power *= betas[k * ell + j];
            }
        }
        ms.push_back(std::move(g));
    }
    return GeneratorCollection::real(std::move(ms), 1,
                                     {"rs-real", "", std::move(beta_source), detail::beta_strings(betas), std::nullopt, ""});
}

/// G*(i,j) = 1 iff i = Δ-1-j: unit vectors climbing from the bottom row.
inline Matrix<Rational> gstar_matrix(std::size_t delta, std::size_t ell) {
    if (ell > delta) throw ConfigError("G* needs ell <= delta");
    Matrix<Rational> g(delta, ell, Rational(0));
    for (std::size_t j = 0; j < ell; ++j) g(delta - 1 - j, j) = 1;
    return g;
}

/// G_k(i,j) = C(i,j) β_k^{i-j} for i >= j with integer binomials. With `use_gstar`, the
/// last worker gets G* instead and only the first N-1 points are used (N-1 or N may be given).
inline GeneratorCollection make_udm_real(std::size_t n, std::size_t delta, std::size_t ell, std::vector<Rational> betas,
                                         bool use_gstar, std::string beta_source = "explicit") {
    detail::require_positive(n, delta, ell);
    const std::size_t needed = use_gstar ? n - 1 : n;
    if (betas.size() != n && betas.size() != needed)
        throw ConfigError("udm-real needs " + std::to_string(needed) + " evaluation points, got " +
                          std::to_string(betas.size()));
    if (betas.size() > needed) betas.resize(needed);
    detail::require_distinct(betas, "udm-real");
    std::vector<Matrix<Rational>> ms;
    for (std::size_t k = 0; k < needed; ++k) {
        Matrix<Rational> g(delta, ell, Rational(0));
        for (std::size_t i = 0; i < delta; ++i)
            for (std::size_t j = 0; j <= std::min(i, ell - 1); ++j) {
                Rational power = 1;
                for (std::size_t t = 0; t < i - j; ++t) power *= betas[k];
                g(i, j) = Rational(detail::binomial(i, j)) * power;
            }
        ms.push_back(std::move(g));
    }
    if (use_gstar) ms.push_back(gstar_matrix(delta, ell));
    return GeneratorCollection::real(std::move(ms), 1,
                                     {use_gstar ? "udm-real-with-gstar" : "udm-real", "", std::move(beta_source),
                                      detail::beta_strings(betas), std::nullopt, ""});
}

/// Hasse-derivative evaluations over GF(p^n): G_k(i,j) = (C(i,j) mod p) β_k^{i-j}.
inline GeneratorCollection make_udm_ff(const GfContext& ctx, std::size_t n, std::size_t delta, std::size_t ell,
                                       std::vector<GfElement> betas, std::string beta_source = "explicit") {
    detail::require_positive(n, delta, ell);
    if (ctx.order() < n + 1)
        throw ConfigError("field too small: the UDM construction requires p^n >= N+1 (" + std::to_string(ctx.order()) +
                          " < " + std::to_string(n + 1) + ")");
    if (betas.size() != n)
        throw ConfigError("udm-ff needs N = " + std::to_string(n) + " evaluation points, got " + std::to_string(betas.size()));
    for (auto b : betas)
        if (ctx.is_zero(b)) throw ConfigError("udm-ff evaluation points must be nonzero");
    detail::require_distinct<GfElement, detail::GfLess>(betas, "udm-ff");
    std::vector<Matrix<GfElement>> ms;
    for (std::size_t k = 0; k < n; ++k) {
        Matrix<GfElement> g(delta, ell, ctx.zero());
        for (std::size_t i = 0; i < delta; ++i)
            for (std::size_t j = 0; j <= std::min(i, ell - 1); ++j)
                g(i, j) = ctx.scale(ctx.pow(betas[k], i - j), binom_mod_p(i, j, ctx.p()));
        ms.push_back(std::move(g));
    }
    return GeneratorCollection::over_field(
        ctx, std::move(ms), {"udm-ff", ctx.spec_string(), std::move(beta_source), detail::beta_strings(ctx, betas), std::nullopt, ""});
}

/// G_k(i,j) = β_{k,j}^i over GF(p^n), β_{k,j} = betas[k·ℓ + j].
inline GeneratorCollection make_rs_ff(const GfContext& ctx, std::size_t n, std::size_t delta, std::size_t ell,
                                      std::vector<GfElement> betas, std::string beta_source = "explicit") {
    detail::require_positive(n, delta, ell);
    if (ctx.order() < n * ell + 1)
        throw ConfigError("field too small: the RS construction requires p^n >= N*ell+1 (" + std::to_string(ctx.order()) +
                          " < " + std::to_string(n * ell + 1) + ")");
    if (betas.size() != n * ell)
        throw ConfigError("rs-ff needs N*ell = " + std::to_string(n * ell) + " evaluation points, got " +
                          std::to_string(betas.size()));
    detail::require_distinct<GfElement, detail::GfLess>(betas, "rs-ff");
    std::vector<Matrix<GfElement>> ms;
    for (std::size_t k = 0; k < n; ++k) {
        Matrix<GfElement> g(delta, ell, ctx.zero());
        for (std::size_t j = 0; j < ell; ++j) {
            GfElement power = ctx.one();
            for (std::size_t i = 0; i < delta; ++i) {
                g(i, j) = power;
                power = ctx.mul(power, betas[k * ell + j]);
            }
        }
        ms.push_back(std::move(g));
    }
    return GeneratorCollection::over_field(
        ctx, std::move(ms), {"rs-ff", ctx.spec_string(), std::move(beta_source), detail::beta_strings(ctx, betas), std::nullopt, ""});
}

/// Expands every field entry into its companion block ζ(entry) and lifts to integers:
/// shape nΔ×nℓ, block size n·s.
inline GeneratorCollection embed_companion(const GeneratorCollection& coll) {
    if (!coll.field()) throw ConfigError("companion embedding needs a collection over a finite field");
    const CompanionRep rep(*coll.field());
    std::vector<IntMatrix> ms;
    for (const auto& m : coll.field_matrices()) ms.push_back(integer_lift(rep.expand(m)));
    Provenance prov = coll.provenance();
    const std::string base = prov.construction.substr(0, prov.construction.find('-'));
    prov.construction = base + "-companion";
    return GeneratorCollection::integer(std::move(ms), coll.block_size() * rep.degree(), std::move(prov));
}

/// Entrywise lift of a prime-field collection into {0, ..., q-1}.
inline GeneratorCollection embed_natural(const GeneratorCollection& coll) {
    if (coll.domain() != Domain::prime_field) throw ConfigError("natural embedding needs a collection over a prime field");
    std::vector<IntMatrix> ms;
    for (const auto& m : coll.field_matrices())
        ms.push_back(m.map([](GfElement e) { return static_cast<std::int64_t>(e.packed); }));
    Provenance prov = coll.provenance();
    const std::string base = prov.construction.substr(0, prov.construction.find('-'));
    prov.construction = base + "-natural-embed";
    return GeneratorCollection::integer(std::move(ms), coll.block_size(), std::move(prov));
}

/// α^0, α^1, ..., α^{count-1}; equals the first `count` nonzero entries of GfContext::enumerate().
inline std::vector<GfElement> alpha_powers(const GfContext& ctx, std::size_t count) {
    if (count > ctx.order() - 1) throw ConfigError("not enough nonzero field elements");
    std::vector<GfElement> out;
    GfElement cur = ctx.one();
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(cur);
        cur = ctx.mul(cur, ctx.alpha());
    }
    return out;
}

/// Three hand-picked real 3×2 matrices, N=3, Δ=3, ℓ=2, satisfying strong full rank.
inline GeneratorCollection hand_built_collection() {
    auto make = [](std::initializer_list<int> v) {
        Matrix<Rational> g(3, 2);
        auto it = v.begin();
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j) g(i, j) = *it++;
        return g;
    };
    std::vector<Matrix<Rational>> ms{make({1, 0, 0, 1, 0, 1}), make({0, 1, 1, 0, 0, 1}), make({0, 1, 0, 1, 1, 0})};
    return GeneratorCollection::real(std::move(ms), 1, {"hand-built-3x2", "", "fixed", {}, std::nullopt, "hand-given 3x2 matrices"});
}

/// Hasse-derivative matrices with binomials reduced mod 2 but evaluated at the real points
/// β=(1,-1), Δ=4, ℓ=2. Distinct β alone do not give full rank: pattern (2,2) is singular.
inline GeneratorCollection mod2_hasse_counterexample() {
    const std::vector<int> betas{1, -1};
    std::vector<Matrix<Rational>> ms;
    for (int b : betas) {
        Matrix<Rational> g(4, 2);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j <= std::min<std::size_t>(i, 1); ++j) {
                int power = 1;
                for (std::size_t t = 0; t < i - j; ++t) power *= b;
                g(i, j) = static_cast<int>(binom_mod_p(i, j, 2)) * power;
            }
        ms.push_back(std::move(g));
    }
    return GeneratorCollection::real(std::move(ms), 1, {"mod2-hasse-real", "", "explicit", {"1", "-1"}, std::nullopt,
                                                         "binomials mod 2 at real points"});
}

} // namespace udm
