// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace udm {

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::vector<std::uint64_t> distinct_prime_factors(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d != 0) continue;
        out.push_back(d);
        while (n % d == 0) n /= d;
    }
    if (n > 1) out.push_back(n);
    return out;
}

/// Binomial coefficient C(k, i) reduced modulo the prime p, via Lucas' theorem.
/// Returns 0 when k < i.
inline std::uint32_t binom_mod_p(std::uint64_t k, std::uint64_t i, std::uint32_t p) {
    if (!is_prime(p)) throw ConfigError("binom_mod_p: modulus " + std::to_string(p) + " is not prime");
    if (i > k) return 0;
    std::uint64_t result = 1;
    while (k > 0 || i > 0) {
        const std::uint64_t kd = k % p;
        const std::uint64_t id = i % p;
        if (id > kd) return 0;
        // C(kd, id) mod p with kd < p: multiplicative formula over GF(p)
        std::uint64_t num = 1;
        std::uint64_t den = 1;
        for (std::uint64_t t = 0; t < id; ++t) {
            num = num * ((kd - t) % p) % p;
            den = den * ((t + 1) % p) % p;
        }
        // den is a product of values in [1, p), invertible; inverse by Fermat
        std::uint64_t inv = 1;
        std::uint64_t base = den;
        for (std::uint64_t e = p - 2; e > 0; e >>= 1) {
            if (e & 1U) inv = inv * base % p;
            base = base * base % p;
        }
        result = result * (num * inv % p) % p;
        k /= p;
        i /= p;
    }
    return static_cast<std::uint32_t>(result);
}

/// An element of GF(p^n) in polynomial-basis form a_0 + a_1 α + ... + a_{n-1} α^{n-1}.
/// The coefficient vector is packed base p (a_0 least significant); `field` tags the
/// owning context so elements from different fields are never mixed silently.
struct GfElement {
    std::uint32_t packed = 0;
    std::uint64_t field = 0;

    friend bool operator==(const GfElement&, const GfElement&) = default;
};

/// The field GF(p^n) defined by a primitive polynomial π(x) = x^n + π_{n-1}x^{n-1} + ... + π_0.
/// Immutable after construction; every operation is a const member.
class GfContext {
public:
    static constexpr std::uint64_t kMaxOrder = std::uint64_t{1} << 20;
    static constexpr std::size_t kMaxDegree = 20;

    /// `pi` holds π_0..π_{n-1} (the monic leading coefficient is implicit).
    GfContext(std::uint32_t p, std::uint32_t n, std::vector<std::uint32_t> pi)
        : p_(p), n_(n), pi_(std::move(pi)) {
        if (!is_prime(p_)) throw ConfigError("field characteristic " + std::to_string(p_) + " is not prime");
        if (n_ < 1) throw ConfigError("field extension degree must be at least 1");
        std::uint64_t q = 1;
        for (std::uint32_t t = 0; t < n_; ++t) {
            q *= p_;
            if (q > kMaxOrder)
                throw ConfigError("field size " + std::to_string(p_) + "^" + std::to_string(n_) +
                                  " exceeds the supported limit of 2^20 elements");
        }
        order_ = static_cast<std::uint32_t>(q);
        if (pi_.size() != n_)
            throw ConfigError("primitive polynomial must have " + std::to_string(n_) +
                              " non-leading coefficients, got " + std::to_string(pi_.size()));
        for (auto c : pi_)
            if (c >= p_) throw ConfigError("primitive polynomial coefficient out of range [0, p)");
        powers_[0] = 1;
        for (std::uint32_t t = 1; t <= n_; ++t) powers_[t] = powers_[t - 1] * p_;
        tag_ = compute_tag();
        if (!alpha_is_primitive())
            throw ConfigError("polynomial " + polynomial_string() + " is not primitive over GF(" +
                              std::to_string(p_) + ")");
    }

    /// Built-in polynomial for the fields used in the reference tables, otherwise the
    /// lexicographically smallest primitive polynomial. Prime fields use x - g for the
    /// smallest primitive root g.
    static GfContext builtin(std::uint32_t p, std::uint32_t n) {
        struct Entry {
            std::uint32_t p, n;
            std::vector<std::uint32_t> pi;
        };
        static const std::vector<Entry> table = {
            {2, 2, {1, 1}},          // x^2+x+1
            {2, 3, {1, 1, 0}},       // x^3+x+1
            {2, 4, {1, 1, 0, 0}},    // x^4+x+1
            {2, 5, {1, 0, 1, 0, 0}}, // x^5+x^2+1
            {3, 2, {2, 2}},          // x^2+2x+2
            {3, 3, {1, 2, 0}},       // x^3+2x+1
            {3, 4, {2, 0, 0, 2}},    // x^4+2x^3+2
            {5, 2, {2, 4}},          // x^2+4x+2
            {5, 3, {3, 3, 0}},       // x^3+3x+3
        };
        if (!is_prime(p)) throw ConfigError("field characteristic " + std::to_string(p) + " is not prime");
        for (const auto& e : table)
            if (e.p == p && e.n == n) return GfContext(p, n, e.pi);
        if (n == 1) {
            for (std::uint32_t g = 1; g < p; ++g)
                if (is_primitive_root(g, p)) return GfContext(p, 1, {(p - g) % p});
        }
        return search_primitive(p, n);
    }

    /// Parses "p", "p^n", or "p^n/<pi>" where <pi> lists π coefficients low-to-high as
    /// base-p digits (n digits, or n+1 with a trailing monic 1); comma-separated
    /// lists are accepted for p > 10.
    static GfContext parse(std::string_view spec) {
        auto fail = [&](const std::string& why) -> ConfigError {
            return ConfigError("bad field spec '" + std::string(spec) + "': " + why);
        };
        auto to_uint = [&](std::string_view s) {
            std::uint32_t v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) throw fail("expected an integer");
            return v;
        };
        std::string_view head = spec;
        std::string_view poly;
        if (auto slash = spec.find('/'); slash != std::string_view::npos) {
            head = spec.substr(0, slash);
            poly = spec.substr(slash + 1);
        }
        std::uint32_t p = 0;
        std::uint32_t n = 1;
        if (auto caret = head.find('^'); caret != std::string_view::npos) {
            p = to_uint(head.substr(0, caret));
            n = to_uint(head.substr(caret + 1));
        } else {
            p = to_uint(head);
        }
        if (poly.empty()) return builtin(p, n);

        std::vector<std::uint32_t> digits;
        if (poly.find(',') != std::string_view::npos) {
            std::size_t start = 0;
            while (start <= poly.size()) {
                auto comma = poly.find(',', start);
                if (comma == std::string_view::npos) comma = poly.size();
                digits.push_back(to_uint(poly.substr(start, comma - start)));
                start = comma + 1;
            }
        } else {
            if (p > 10) throw fail("use comma-separated coefficients when p > 10");
            for (char c : poly) {
                if (c < '0' || c > '9') throw fail("non-digit in polynomial");
                digits.push_back(static_cast<std::uint32_t>(c - '0'));
            }
        }
        if (digits.size() == n + 1) {
            if (digits.back() != 1) throw fail("polynomial must be monic (last digit 1)");
            digits.pop_back();
        }
        if (digits.size() != n) throw fail("expected " + std::to_string(n) + " or " + std::to_string(n + 1) + " coefficients");
        return GfContext(p, n, std::move(digits));
    }

    [[nodiscard]] std::uint32_t p() const noexcept { return p_; }
    [[nodiscard]] std::uint32_t n() const noexcept { return n_; }
    [[nodiscard]] std::uint32_t order() const noexcept { return order_; }
    [[nodiscard]] const std::vector<std::uint32_t>& pi() const noexcept { return pi_; }
    [[nodiscard]] std::uint64_t tag() const noexcept { return tag_; }
    [[nodiscard]] bool is_prime_field() const noexcept { return n_ == 1; }

    /// Canonical "p^n/digits" string, digits low-to-high including the monic 1.
    [[nodiscard]] std::string spec_string() const {
        if (n_ == 1) return std::to_string(p_);
        std::string out = std::to_string(p_) + "^" + std::to_string(n_) + "/";
        for (std::size_t t = 0; t < pi_.size(); ++t) {
            if (p_ > 10 && t > 0) out += ',';
            out += std::to_string(pi_[t]);
        }
        if (p_ > 10) out += ',';
        out += '1';
        return out;
    }

    [[nodiscard]] std::string polynomial_string() const {
        std::string out = "x^" + std::to_string(n_);
        for (std::size_t t = n_; t-- > 0;) {
            if (pi_[t] == 0) continue;
            out += " + ";
            if (pi_[t] != 1 || t == 0) out += std::to_string(pi_[t]);
            if (t >= 1) out += "x";
            if (t >= 2) out += "^" + std::to_string(t);
        }
        return out;
    }

    friend bool operator==(const GfContext& a, const GfContext& b) {
        return a.p_ == b.p_ && a.n_ == b.n_ && a.pi_ == b.pi_;
    }

    [[nodiscard]] GfElement zero() const noexcept { return {0, tag_}; }
    [[nodiscard]] GfElement one() const noexcept { return {1, tag_}; }

    /// The root of π, i.e. x mod π.
    [[nodiscard]] GfElement alpha() const noexcept {
        if (n_ == 1) return {(p_ - pi_[0]) % p_, tag_};
        return {p_, tag_};
    }

    [[nodiscard]] GfElement from_coeffs(std::span<const std::uint32_t> coeffs) const {
        if (coeffs.size() > n_) throw FieldError("too many coefficients for GF(" + std::to_string(order_) + ")");
        std::uint32_t packed = 0;
        for (std::size_t t = 0; t < coeffs.size(); ++t) {
            if (coeffs[t] >= p_) throw FieldError("coefficient out of range [0, p)");
            packed += coeffs[t] * powers_[t];
        }
        return {packed, tag_};
    }

    /// Integer k interpreted in the prime subfield.
    [[nodiscard]] GfElement from_int(std::int64_t k) const noexcept {
        const auto pp = static_cast<std::int64_t>(p_);
        return {static_cast<std::uint32_t>(((k % pp) + pp) % pp), tag_};
    }

    /// Element whose packed base-p value is `packed` (0 <= packed < p^n).
    [[nodiscard]] GfElement from_packed(std::uint32_t packed) const {
        if (packed >= order_) throw FieldError("packed value out of range for GF(" + std::to_string(order_) + ")");
        return {packed, tag_};
    }

    [[nodiscard]] std::vector<std::uint32_t> coeffs(GfElement a) const {
        check(a);
        std::vector<std::uint32_t> out(n_);
        for (std::uint32_t t = 0; t < n_; ++t) {
            out[t] = a.packed % p_;
            a.packed /= p_;
        }
        return out;
    }

    [[nodiscard]] bool contains(GfElement a) const noexcept { return a.field == tag_ && a.packed < order_; }
    [[nodiscard]] bool is_zero(GfElement a) const {
        check(a);
        return a.packed == 0;
    }

    [[nodiscard]] GfElement add(GfElement a, GfElement b) const {
        check(a);
        check(b);
        if (n_ == 1) return {(a.packed + b.packed) % p_, tag_};
        std::uint32_t out = 0;
        for (std::uint32_t t = 0; t < n_; ++t) {
            out += ((a.packed % p_ + b.packed % p_) % p_) * powers_[t];
            a.packed /= p_;
            b.packed /= p_;
        }
        return {out, tag_};
    }

    [[nodiscard]] GfElement neg(GfElement a) const {
        check(a);
        std::uint32_t out = 0;
        for (std::uint32_t t = 0; t < n_; ++t) {
            out += ((p_ - a.packed % p_) % p_) * powers_[t];
            a.packed /= p_;
        }
        return {out, tag_};
    }

    [[nodiscard]] GfElement sub(GfElement a, GfElement b) const { return add(a, neg(b)); }

    /// Polynomial product reduced modulo π.
    [[nodiscard]] GfElement mul(GfElement a, GfElement b) const {
        check(a);
        check(b);
        if (n_ == 1)
            return {static_cast<std::uint32_t>(std::uint64_t{a.packed} * b.packed % p_), tag_};
        std::array<std::uint64_t, kMaxDegree> da{};
        std::array<std::uint64_t, kMaxDegree> db{};
        for (std::uint32_t t = 0; t < n_; ++t) {
            da[t] = a.packed % p_;
            db[t] = b.packed % p_;
            a.packed /= p_;
            b.packed /= p_;
        }
        std::array<std::uint64_t, 2 * kMaxDegree> prod{};
        for (std::uint32_t i = 0; i < n_; ++i) {
            if (da[i] == 0) continue;
            for (std::uint32_t j = 0; j < n_; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % p_;
        }
        // x^n = -(π_0 + ... + π_{n-1} x^{n-1})
        for (std::uint32_t d = 2 * n_ - 2; d >= n_; --d) {
            const std::uint64_t c = prod[d];
            if (c == 0) continue;
            prod[d] = 0;
            for (std::uint32_t t = 0; t < n_; ++t)
                prod[d - n_ + t] = (prod[d - n_ + t] + (p_ - pi_[t]) * c) % p_;
        }
        std::uint32_t out = 0;
        for (std::uint32_t t = 0; t < n_; ++t) out += static_cast<std::uint32_t>(prod[t]) * powers_[t];
        return {out, tag_};
    }

    /// Multiplication by an integer of the prime subfield.
    [[nodiscard]] GfElement scale(GfElement a, std::int64_t k) const { return mul(a, from_int(k)); }

    [[nodiscard]] GfElement pow(GfElement a, std::uint64_t e) const {
        check(a);
        GfElement result = one();
        while (e > 0) {
            if (e & 1U) result = mul(result, a);
            a = mul(a, a);
            e >>= 1;
        }
        return result;
    }

    [[nodiscard]] GfElement alpha_pow(std::uint64_t k) const { return pow(alpha(), k % (order_ - 1)); }

    [[nodiscard]] GfElement inv(GfElement a) const {
        if (is_zero(a)) throw FieldError("inverse of zero in GF(" + std::to_string(order_) + ")");
        return pow(a, order_ - 2);
    }

    /// 0, 1, α, α², ..., α^{q-2}.
    [[nodiscard]] std::vector<GfElement> enumerate() const {
        std::vector<GfElement> out;
        out.reserve(order_);
        out.push_back(zero());
        GfElement cur = one();
        const GfElement a = alpha();
        for (std::uint32_t k = 0; k + 1 < order_; ++k) {
            out.push_back(cur);
            cur = mul(cur, a);
        }
        return out;
    }

    /// Human-readable polynomial in `a`, e.g. "1+a^2" or "2+a" (coefficients mod p).
    [[nodiscard]] std::string to_string(GfElement e) const {
        const auto c = coeffs(e);
        std::string out;
        for (std::uint32_t t = 0; t < n_; ++t) {
            if (c[t] == 0) continue;
            if (!out.empty()) out += "+";
            if (t == 0) {
                out += std::to_string(c[t]);
                continue;
            }
            if (c[t] != 1) out += std::to_string(c[t]);
            out += "a";
            if (t > 1) out += "^" + std::to_string(t);
        }
        return out.empty() ? "0" : out;
    }

private:
    void check(GfElement a) const {
        if (a.field != tag_ || a.packed >= order_)
            throw FieldError("element does not belong to GF(" + std::to_string(p_) + "^" + std::to_string(n_) +
                             ") with polynomial " + polynomial_string());
    }

    [[nodiscard]] std::uint64_t compute_tag() const {
        // FNV-1a over (p, n, pi); never 0 so default-constructed elements are foreign
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xFFU;
                h *= 1099511628211ULL;
            }
        };
        mix(p_);
        mix(n_);
        for (auto c : pi_) mix(c);
        return h == 0 ? 1 : h;
    }

    [[nodiscard]] bool alpha_is_primitive() const {
        const GfElement a = alpha();
        if (a.packed == 0) return false;
        const std::uint64_t group = order_ - 1;
        if (pow(a, group) != one()) return false;
        for (auto r : distinct_prime_factors(group))
            if (pow(a, group / r) == one()) return false;
        return true;
    }

    static bool is_primitive_root(std::uint64_t g, std::uint64_t p) {
        if (p == 2) return g == 1;
        auto powmod = [p](std::uint64_t b, std::uint64_t e) {
            std::uint64_t r = 1;
            b %= p;
            while (e > 0) {
                if (e & 1U) r = r * b % p;
                b = b * b % p;
                e >>= 1;
            }
            return r;
        };
        for (auto r : distinct_prime_factors(p - 1))
            if (powmod(g, (p - 1) / r) == 1) return false;
        return true;
    }

    static GfContext search_primitive(std::uint32_t p, std::uint32_t n) {
        std::vector<std::uint32_t> pi(n, 0);
        for (;;) {
            if (pi[0] != 0) {
                try {
                    return GfContext(p, n, pi);
                } catch (const ConfigError&) {
                }
            }
            std::size_t t = 0;
            while (t < n && ++pi[t] == p) pi[t++] = 0;
            if (t == n) throw ConfigError("no primitive polynomial found for GF(" + std::to_string(p) + "^" + std::to_string(n) + ")");
        }
    }

    std::uint32_t p_;
    std::uint32_t n_;
    std::vector<std::uint32_t> pi_;
    std::uint32_t order_ = 0;
    std::array<std::uint32_t, kMaxDegree + 1> powers_{};
    std::uint64_t tag_ = 0;
};

/// i-th Hasse derivative of u(x) = Σ u_k x^k: Σ_{k>=i} C(k,i) u_k x^{k-i}, with C(k,i) taken mod p.
inline std::vector<GfElement> hasse_derivative(const GfContext& ctx, std::span<const GfElement> u, std::size_t order) {
    std::vector<GfElement> out;
    if (u.size() <= order) return out;
    out.reserve(u.size() - order);
    for (std::size_t k = order; k < u.size(); ++k)
        out.push_back(ctx.scale(u[k], binom_mod_p(k, order, ctx.p())));
    return out;
}

/// Horner evaluation of Σ u_k x^k.
inline GfElement evaluate_polynomial(const GfContext& ctx, std::span<const GfElement> u, GfElement x) {
    GfElement acc = ctx.zero();
    for (std::size_t k = u.size(); k-- > 0;) acc = ctx.add(ctx.mul(acc, x), u[k]);
    return acc;
}

} // namespace udm
