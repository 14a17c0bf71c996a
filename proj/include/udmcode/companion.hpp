// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exact_rank.hpp"
#include "gf.hpp"
#include "matrix.hpp"

namespace udm {

/// Matrix over GF(p), entries kept in [0, p).
using PrimeMatrix = Matrix<std::uint32_t>;
/// Matrix over the integers.
using IntMatrix = Matrix<std::int64_t>;

inline PrimeMatrix prime_identity(std::size_t n) {
    PrimeMatrix out(n, n, 0);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1;
    return out;
}

inline PrimeMatrix prime_multiply(const PrimeMatrix& a, const PrimeMatrix& b, std::uint32_t p) {
    if (a.cols() != b.rows()) throw ConfigError("prime_multiply: shape mismatch");
    PrimeMatrix out(a.rows(), b.cols(), 0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const std::uint64_t aik = a(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) = static_cast<std::uint32_t>((out(i, j) + aik * b(k, j)) % p);
        }
    return out;
}

inline PrimeMatrix prime_add(const PrimeMatrix& a, const PrimeMatrix& b, std::uint32_t p) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("prime_add: shape mismatch");
    PrimeMatrix out(a.rows(), a.cols());
    for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = (a.data()[k] + b.data()[k]) % p;
    return out;
}

inline PrimeMatrix prime_scale(const PrimeMatrix& a, std::uint32_t c, std::uint32_t p) {
    return a.map([c, p](std::uint32_t v) { return static_cast<std::uint32_t>(std::uint64_t{v} * c % p); });
}

inline std::vector<std::uint32_t> prime_apply(const PrimeMatrix& a, const std::vector<std::uint32_t>& v,
                                              std::uint32_t p) {
    if (a.cols() != v.size()) throw ConfigError("prime_apply: shape mismatch");
    std::vector<std::uint32_t> out(a.rows(), 0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::uint64_t acc = 0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += std::uint64_t{a(i, j)} * v[j];
        out[i] = static_cast<std::uint32_t>(acc % p);
    }
    return out;
}

/// Entrywise embedding of GF(p) entries into {0, ..., p-1} ⊂ Z.
inline IntMatrix integer_lift(const PrimeMatrix& m) {
    return m.map([](std::uint32_t v) { return static_cast<std::int64_t>(v); });
}

/// Companion matrix C of the field's primitive polynomial: ones on the subdiagonal and
/// (-π_0, ..., -π_{n-1}) mod p in the last column. The powers {0, I, C, ..., C^{q-2}}
/// form a copy of GF(p^n) inside the n×n matrices over GF(p).
class CompanionRep {
public:
    explicit CompanionRep(GfContext ctx) : ctx_(std::move(ctx)), c_(companion_of(ctx_)) {
        build_powers();
        if (auto problem = invariant_violation()) throw ConfigError("companion matrix invariant violated: " + *problem);
    }

    /// Uses `c` as the companion matrix without checking it (negative controls).
    static CompanionRep with_matrix(GfContext ctx, PrimeMatrix c) {
        if (c.rows() != ctx.n() || c.cols() != ctx.n()) throw ConfigError("companion matrix must be n×n");
        return CompanionRep(std::move(ctx), std::move(c));
    }

    [[nodiscard]] const GfContext& field() const noexcept { return ctx_; }
    [[nodiscard]] const PrimeMatrix& matrix() const noexcept { return c_; }
    [[nodiscard]] std::size_t degree() const noexcept { return ctx_.n(); }

    /// a(C) = a_0 I + a_1 C + ... + a_{n-1} C^{n-1} over GF(p).
    [[nodiscard]] PrimeMatrix zeta(GfElement a) const {
        const auto coeffs = ctx_.coeffs(a);
        const std::uint32_t p = ctx_.p();
        PrimeMatrix out(ctx_.n(), ctx_.n(), 0);
        for (std::size_t t = 0; t < coeffs.size(); ++t)
            if (coeffs[t] != 0) out = prime_add(out, prime_scale(powers_[t], coeffs[t], p), p);
        return out;
    }

    /// Γ: coordinate vector of `a` in the basis 1, α, ..., α^{n-1}.
    [[nodiscard]] std::vector<std::uint32_t> gamma(GfElement a) const { return ctx_.coeffs(a); }
    [[nodiscard]] GfElement gamma_inverse(const std::vector<std::uint32_t>& v) const { return ctx_.from_coeffs(v); }

    /// Replaces every entry by its n×n block ζ(entry).
    [[nodiscard]] PrimeMatrix expand(const Matrix<GfElement>& m) const {
        const std::size_t n = ctx_.n();
        PrimeMatrix out(m.rows() * n, m.cols() * n, 0);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) {
                if (ctx_.is_zero(m(i, j))) continue;
                const PrimeMatrix block = zeta(m(i, j));
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b) out(i * n + a, j * n + b) = block(a, b);
            }
        return out;
    }

    /// Shape, π(C) = 0, and multiplicative order exactly p^n - 1. Returns the first
    /// violation, if any.
    [[nodiscard]] std::optional<std::string> invariant_violation() const {
        const std::uint32_t p = ctx_.p();
        const std::size_t n = ctx_.n();
        if (!(c_ == companion_of(ctx_))) return "matrix does not have companion shape for " + ctx_.polynomial_string();
        // π(C) = C^n + Σ π_i C^i
        PrimeMatrix acc(n, n, 0);
        PrimeMatrix power = prime_identity(n);
        for (std::size_t t = 0; t < n; ++t) {
            acc = prime_add(acc, prime_scale(power, ctx_.pi()[t], p), p);
            power = prime_multiply(power, c_, p);
        }
        acc = prime_add(acc, power, p);
        if (!(acc == PrimeMatrix(n, n, 0))) return "pi(C) != 0";
        const std::uint64_t group = ctx_.order() - 1;
        if (!(matrix_power(group) == prime_identity(n))) return "C^(q-1) != I";
        for (auto r : distinct_prime_factors(group))
            if (matrix_power(group / r) == prime_identity(n))
                return "C has order dividing " + std::to_string(group / r);
        return std::nullopt;
    }

    [[nodiscard]] PrimeMatrix matrix_power(std::uint64_t e) const {
        const std::uint32_t p = ctx_.p();
        PrimeMatrix result = prime_identity(ctx_.n());
        PrimeMatrix base = c_;
        while (e > 0) {
            if (e & 1U) result = prime_multiply(result, base, p);
            base = prime_multiply(base, base, p);
            e >>= 1;
        }
        return result;
    }

    static PrimeMatrix companion_of(const GfContext& ctx) {
        const std::size_t n = ctx.n();
        const std::uint32_t p = ctx.p();
        PrimeMatrix c(n, n, 0);
        for (std::size_t i = 1; i < n; ++i) c(i, i - 1) = 1;
        for (std::size_t i = 0; i < n; ++i) c(i, n - 1) = (p - ctx.pi()[i]) % p;
        return c;
    }

private:
    CompanionRep(GfContext ctx, PrimeMatrix c) : ctx_(std::move(ctx)), c_(std::move(c)) { build_powers(); }

    void build_powers() {
        powers_.clear();
        powers_.push_back(prime_identity(ctx_.n()));
        for (std::size_t t = 1; t < ctx_.n(); ++t) powers_.push_back(prime_multiply(powers_.back(), c_, ctx_.p()));
    }

    GfContext ctx_;
    PrimeMatrix c_;
    std::vector<PrimeMatrix> powers_;
};

struct HomomorphismVerdict {
    bool passed = true;
    std::size_t pairs_checked = 0;
    std::string failed_law; // "additive", "multiplicative" or "mixed"
    std::optional<std::pair<GfElement, GfElement>> witness;
};

/// Exhaustively checks ζ(a+b) = ζ(a)+ζ(b), ζ(ab) = ζ(a)ζ(b) and ζ(a)Γ(b) = Γ(ab).
inline HomomorphismVerdict zeta_homomorphism_check(const CompanionRep& rep) {
    const GfContext& ctx = rep.field();
    if (ctx.order() > 1024) throw ConfigError("zeta_homomorphism_check: field too large to enumerate pairs");
    const std::uint32_t p = ctx.p();
    const auto elems = ctx.enumerate();
    std::vector<PrimeMatrix> z;
    z.reserve(elems.size());
    for (auto e : elems) z.push_back(rep.zeta(e));

    HomomorphismVerdict verdict;
    auto fail = [&](const char* law, GfElement a, GfElement b) {
        verdict.passed = false;
        verdict.failed_law = law;
        verdict.witness = std::make_pair(a, b);
        return verdict;
    };
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (std::size_t j = 0; j < elems.size(); ++j) {
            const GfElement a = elems[i];
            const GfElement b = elems[j];
            ++verdict.pairs_checked;
            if (!(rep.zeta(ctx.add(a, b)) == prime_add(z[i], z[j], p))) return fail("additive", a, b);
            if (!(rep.zeta(ctx.mul(a, b)) == prime_multiply(z[i], z[j], p))) return fail("multiplicative", a, b);
            if (prime_apply(z[i], rep.gamma(b), p) != rep.gamma(ctx.mul(a, b))) return fail("mixed", a, b);
        }
    return verdict;
}

} // namespace udm
