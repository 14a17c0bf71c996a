// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include <boost/multiprecision/cpp_int.hpp>

#include "gf.hpp"
#include "matrix.hpp"

namespace udm {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Rank over GF(p^n) by Gaussian elimination.
inline std::size_t field_rank(const GfContext& ctx, Matrix<GfElement> m) {
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
        std::size_t pivot = rank;
        while (pivot < m.rows() && ctx.is_zero(m(pivot, col))) ++pivot;
        if (pivot == m.rows()) continue;
        m.swap_rows(pivot, rank);
        const GfElement inv = ctx.inv(m(rank, col));
        for (std::size_t j = col; j < m.cols(); ++j) m(rank, j) = ctx.mul(m(rank, j), inv);
        for (std::size_t i = rank + 1; i < m.rows(); ++i) {
            const GfElement f = m(i, col);
            if (ctx.is_zero(f)) continue;
            for (std::size_t j = col; j < m.cols(); ++j) m(i, j) = ctx.sub(m(i, j), ctx.mul(f, m(rank, j)));
        }
        ++rank;
    }
    return rank;
}

/// Rank over GF(p) of a matrix with entries in [0, p).
inline std::size_t prime_field_rank(Matrix<std::uint32_t> m, std::uint32_t p) {
    auto inv_mod = [p](std::uint64_t a) {
        std::uint64_t r = 1;
        for (std::uint64_t e = p - 2; e > 0; e >>= 1) {
            if (e & 1U) r = r * a % p;
            a = a * a % p;
        }
        return r;
    };
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
        std::size_t pivot = rank;
        while (pivot < m.rows() && m(pivot, col) % p == 0) ++pivot;
        if (pivot == m.rows()) continue;
        m.swap_rows(pivot, rank);
        const std::uint64_t inv = inv_mod(m(rank, col) % p);
        for (std::size_t j = col; j < m.cols(); ++j) m(rank, j) = static_cast<std::uint32_t>(m(rank, j) * inv % p);
        for (std::size_t i = rank + 1; i < m.rows(); ++i) {
            const std::uint64_t f = m(i, col) % p;
            if (f == 0) continue;
            for (std::size_t j = col; j < m.cols(); ++j)
                m(i, j) = static_cast<std::uint32_t>((m(i, j) + (p - f) * m(rank, j)) % p);
        }
        ++rank;
    }
    return rank;
}

inline bool field_nonsingular(const GfContext& ctx, const Matrix<GfElement>& m) {
    return m.rows() == m.cols() && field_rank(ctx, m) == m.rows();
}

namespace detail {

template <typename T>
struct BareissResult {
    std::size_t rank = 0;
    int sign = 1;
    T last_pivot{1};
};

// Fraction-free elimination. After pivoting on k columns every remaining entry is a
// (k+1)-minor of the input, so each division by the previous pivot is exact.
// `combine(pivot, a_ij, a_ic, a_rj, prev)` returns (pivot*a_ij - a_ic*a_rj)/prev or
// nullopt when the representation overflows.
template <typename T, typename Combine>
std::optional<BareissResult<T>> bareiss(Matrix<T> m, Combine combine) {
    BareissResult<T> res;
    T prev{1};
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t pivot = r;
        while (pivot < m.rows() && m(pivot, c) == 0) ++pivot;
        if (pivot == m.rows()) continue;
        if (pivot != r) {
            m.swap_rows(pivot, r);
            res.sign = -res.sign;
        }
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            for (std::size_t j = c + 1; j < m.cols(); ++j) {
                auto v = combine(m(r, c), m(i, j), m(i, c), m(r, j), prev);
                if (!v) return std::nullopt;
                m(i, j) = std::move(*v);
            }
            m(i, c) = T{0};
        }
        prev = m(r, c);
        ++r;
    }
    res.rank = r;
    res.last_pivot = prev;
    return res;
}

inline std::optional<BareissResult<std::int64_t>> bareiss_checked(const Matrix<std::int64_t>& m) {
    return bareiss(m, [](std::int64_t piv, std::int64_t aij, std::int64_t aic, std::int64_t arj,
                         std::int64_t prev) -> std::optional<std::int64_t> {
        const __int128 num = static_cast<__int128>(piv) * aij - static_cast<__int128>(aic) * arj;
        const __int128 q = num / prev;
        if (q > std::numeric_limits<std::int64_t>::max() || q < std::numeric_limits<std::int64_t>::min())
            return std::nullopt;
        return static_cast<std::int64_t>(q);
    });
}

inline BareissResult<BigInt> bareiss_big(const Matrix<std::int64_t>& m) {
    auto big = m.map([](std::int64_t v) { return BigInt(v); });
    auto res = bareiss(std::move(big), [](const BigInt& piv, const BigInt& aij, const BigInt& aic,
                                          const BigInt& arj, const BigInt& prev) -> std::optional<BigInt> {
        BigInt num = piv * aij - aic * arj;
        return BigInt(num / prev);
    });
    return *res;
}

} // namespace detail

/// Exact rank over the integers (equivalently over Q). Tries 64-bit storage with
/// 128-bit intermediates first and falls back to arbitrary precision on overflow.
inline std::size_t integer_rank(const Matrix<std::int64_t>& m) {
    if (auto fast = detail::bareiss_checked(m)) return fast->rank;
    return detail::bareiss_big(m).rank;
}

/// Exact determinant of a square integer matrix.
inline BigInt integer_determinant(const Matrix<std::int64_t>& m) {
    if (m.rows() != m.cols()) throw ConfigError("determinant of a non-square matrix");
    if (m.rows() == 0) return BigInt(1);
    if (auto fast = detail::bareiss_checked(m)) {
        if (fast->rank < m.rows()) return BigInt(0);
        return BigInt(fast->sign) * BigInt(fast->last_pivot);
    }
    auto big = detail::bareiss_big(m);
    if (big.rank < m.rows()) return BigInt(0);
    return BigInt(big.sign) * big.last_pivot;
}

/// Exact rank over Q.
inline std::size_t rational_rank(Matrix<Rational> m) {
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
        std::size_t pivot = rank;
        while (pivot < m.rows() && m(pivot, col) == 0) ++pivot;
        if (pivot == m.rows()) continue;
        m.swap_rows(pivot, rank);
        for (std::size_t i = rank + 1; i < m.rows(); ++i) {
            if (m(i, col) == 0) continue;
            const Rational f = m(i, col) / m(rank, col);
            for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= f * m(rank, j);
        }
        ++rank;
    }
    return rank;
}

/// The exact rational value of a finite double.
inline Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw ConfigError("non-finite real value");
    int exp = 0;
    const double mant = std::frexp(v, &exp);
    // mant * 2^53 is an integer for every finite double
    const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r(scaled);
    if (exp > 0) r *= Rational(BigInt(1) << exp);
    if (exp < 0) r /= Rational(BigInt(1) << -exp);
    return r;
}

} // namespace udm
