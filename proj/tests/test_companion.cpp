// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include <udmcode/companion.hpp>
#include <udmcode/exact_rank.hpp>

using udm::BigInt;
using udm::CompanionRep;
using udm::GfContext;
using udm::GfElement;
using udm::IntMatrix;
using udm::PrimeMatrix;

namespace {

PrimeMatrix rows3(std::initializer_list<std::uint32_t> v) {
    PrimeMatrix m(3, 3);
    auto it = v.begin();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = *it++;
    return m;
}

// Laplace expansion along the first row; the independent determinant oracle.
BigInt cofactor_det(const IntMatrix& m) {
    const std::size_t n = m.rows();
    if (n == 0) return 1;
    if (n == 1) return m(0, 0);
    BigInt total = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (m(0, c) == 0) continue;
        IntMatrix minor(n - 1, n - 1);
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0, jj = 0; j < n; ++j)
                if (j != c) minor(i - 1, jj++) = m(i, j);
        const BigInt term = BigInt(m(0, c)) * cofactor_det(minor);
        total += (c % 2 == 0) ? term : BigInt(-term);
    }
    return total;
}

std::vector<std::uint32_t> mat_vec(const PrimeMatrix& a, const std::vector<std::uint32_t>& v, std::uint32_t p) {
    return udm::prime_apply(a, v, p);
}

} // namespace

TEST(Companion, Gf8Matrix) {
    const CompanionRep rep(GfContext::builtin(2, 3));
    EXPECT_EQ(rep.matrix(), rows3({0, 0, 1, 1, 0, 1, 0, 1, 0}));
    EXPECT_EQ(rep.zeta(rep.field().alpha()), rep.matrix());
    EXPECT_EQ(rep.zeta(rep.field().zero()), PrimeMatrix(3, 3, 0));
    EXPECT_EQ(rep.zeta(rep.field().one()), udm::prime_identity(3));
}

TEST(Companion, ZetaOfAlphaPowerIsMatrixPower) {
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 3}, {3, 2}, {2, 5}, {5, 2}, {3, 3}}) {
        const CompanionRep rep(GfContext::builtin(p, n));
        for (std::uint64_t l = 0; l + 1 < rep.field().order(); ++l)
            ASSERT_EQ(rep.zeta(rep.field().alpha_pow(l)), rep.matrix_power(l)) << p << "^" << n << " l=" << l;
    }
}

TEST(Companion, InvariantsHoldForBuiltins) {
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{
             {2, 2}, {2, 3}, {2, 4}, {2, 5}, {3, 2}, {3, 3}, {3, 4}, {5, 2}, {5, 3}, {7, 1}, {19, 1}}) {
        const CompanionRep rep(GfContext::builtin(p, n));
        EXPECT_FALSE(rep.invariant_violation().has_value());
        EXPECT_EQ(udm::prime_field_rank(rep.matrix(), p), n) << "C must be nonsingular";
    }
}

TEST(Companion, HomomorphismExhaustiveGf8Gf9) {
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 3}, {3, 2}}) {
        const CompanionRep rep(GfContext::builtin(p, n));
        const auto v = udm::zeta_homomorphism_check(rep);
        EXPECT_TRUE(v.passed) << v.failed_law;
        EXPECT_EQ(v.pairs_checked, static_cast<std::size_t>(rep.field().order()) * rep.field().order());
    }
}

TEST(Companion, CorruptedMatrixFailsWithWitness) {
    const auto f = GfContext::builtin(2, 3);
    PrimeMatrix c = CompanionRep::companion_of(f);
    std::swap(c(0, 0), c(0, 2));
    ASSERT_FALSE(c == CompanionRep::companion_of(f));
    const auto rep = CompanionRep::with_matrix(f, c);
    EXPECT_TRUE(rep.invariant_violation().has_value());
    const auto v = udm::zeta_homomorphism_check(rep);
    EXPECT_FALSE(v.passed);
    EXPECT_TRUE(v.witness.has_value());
    EXPECT_FALSE(v.failed_law.empty());
}

TEST(Companion, MultiplicationByAlpha) {
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 3}, {3, 2}, {2, 4}, {5, 2}, {3, 3}}) {
        const CompanionRep rep(GfContext::builtin(p, n));
        const auto& f = rep.field();
        for (auto b : f.enumerate())
            ASSERT_EQ(rep.gamma(f.mul(f.alpha(), b)), mat_vec(rep.matrix(), rep.gamma(b), p));
    }
}

TEST(Companion, GammaRoundTrip) {
    const CompanionRep rep(GfContext::builtin(3, 3));
    for (auto b : rep.field().enumerate()) EXPECT_EQ(rep.gamma_inverse(rep.gamma(b)), b);
}

TEST(Companion, ExpandBlocks) {
    const CompanionRep rep(GfContext::builtin(2, 3));
    const auto& f = rep.field();
    udm::Matrix<GfElement> one(1, 1, f.one());
    EXPECT_EQ(rep.expand(one), udm::prime_identity(3));
    udm::Matrix<GfElement> zero(2, 3, f.zero());
    EXPECT_EQ(rep.expand(zero), PrimeMatrix(6, 9, 0));

    // G_k for β = α^k over GF(8); blocks I,0,0 / C^k,I,0 / C^2k,0,I / C^3k,C^2k,C^k
    for (std::uint64_t k = 0; k < 6; ++k) {
        const GfElement b = f.alpha_pow(k);
        udm::Matrix<GfElement> g(4, 3, f.zero());
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j <= std::min<std::size_t>(i, 2); ++j)
                g(i, j) = f.scale(f.pow(b, i - j), udm::binom_mod_p(i, j, 2));
        const PrimeMatrix e = rep.expand(g);
        auto block = [&](std::size_t bi, std::size_t bj) {
            PrimeMatrix out(3, 3);
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t c = 0; c < 3; ++c) out(a, c) = e(bi * 3 + a, bj * 3 + c);
            return out;
        };
        const PrimeMatrix id = udm::prime_identity(3), z(3, 3, 0);
        EXPECT_EQ(block(0, 0), id);
        EXPECT_EQ(block(0, 1), z);
        EXPECT_EQ(block(1, 0), rep.matrix_power(k));
        EXPECT_EQ(block(1, 1), id);
        EXPECT_EQ(block(2, 0), rep.matrix_power(2 * k));
        EXPECT_EQ(block(2, 1), z);
        EXPECT_EQ(block(2, 2), id);
        EXPECT_EQ(block(3, 0), rep.matrix_power(3 * k));
        EXPECT_EQ(block(3, 1), rep.matrix_power(2 * k));
        EXPECT_EQ(block(3, 2), rep.matrix_power(k));
    }
}

TEST(Companion, IntegerLiftIsEntrywise) {
    PrimeMatrix m(1, 3);
    m(0, 0) = 0;
    m(0, 1) = 2;
    m(0, 2) = 18;
    const IntMatrix z = udm::integer_lift(m);
    EXPECT_EQ(z(0, 0), 0);
    EXPECT_EQ(z(0, 1), 2);
    EXPECT_EQ(z(0, 2), 18);
}

TEST(ExactRank, BareissMatchesCofactorOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 1 + trial % 6;
        const std::int64_t range = trial % 3 == 0 ? 1 : (trial % 3 == 1 ? 5 : 1000);
        std::uniform_int_distribution<std::int64_t> d(-range, range);
        IntMatrix m(n, n);
        for (auto& v : m.data()) v = d(rng);
        if (trial % 7 == 0 && n > 1) // force dependence
            for (std::size_t j = 0; j < n; ++j) m(n - 1, j) = m(0, j) * 2 - m(1 % n, j);
        const BigInt want = cofactor_det(m);
        ASSERT_EQ(udm::integer_determinant(m), want) << "trial " << trial;
        EXPECT_EQ(udm::integer_rank(m) == n, want != 0);
    }
}

TEST(ExactRank, BigIntegerFallbackOnOverflow) {
    IntMatrix m(4, 4);
    const std::int64_t big = std::int64_t{1} << 40;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m(i, j) = (i == j) ? big + static_cast<std::int64_t>(i) : static_cast<std::int64_t>(i * 4 + j);
    EXPECT_FALSE(udm::detail::bareiss_checked(m).has_value());
    EXPECT_EQ(udm::integer_determinant(m), cofactor_det(m));
    EXPECT_EQ(udm::integer_rank(m), 4U);
}

TEST(ExactRank, RectangularRanks) {
    IntMatrix m(3, 5, 0);
    for (std::size_t j = 0; j < 5; ++j) {
        m(0, j) = static_cast<std::int64_t>(j + 1);
        m(1, j) = static_cast<std::int64_t>(2 * (j + 1));
        m(2, j) = static_cast<std::int64_t>(j * j);
    }
    EXPECT_EQ(udm::integer_rank(m), 2U);
    udm::Matrix<udm::Rational> r(2, 2);
    r(0, 0) = udm::Rational(1, 3);
    r(0, 1) = udm::Rational(2, 3);
    r(1, 0) = udm::Rational(1, 2);
    r(1, 1) = 1;
    EXPECT_EQ(udm::rational_rank(r), 1U);
    EXPECT_EQ(udm::prime_field_rank(PrimeMatrix(2, 2, 1), 2), 1U);
}

TEST(ExactRank, RationalFromDoubleIsExact) {
    EXPECT_EQ(udm::rational_from_double(0.5), udm::Rational(1, 2));
    EXPECT_EQ(udm::rational_from_double(-3.0), udm::Rational(-3));
    const double third = 1.0 / 3.0;
    EXPECT_EQ(udm::rational_from_double(third).convert_to<double>(), third);
    EXPECT_NE(udm::rational_from_double(third), udm::Rational(1, 3));
}

// Random square matrices: nonsingular over GF(p^n) exactly when the expanded
// GF(p) matrix is nonsingular, and then the integer lift is nonsingular too. The integer
// determinant agrees with the GF(p) verdict after reduction mod p.
TEST(LiftNonsingularity, FieldExpandedAndIntegerVerdicts) {
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 2}, {2, 3}, {3, 2}}) {
        const CompanionRep rep(GfContext::builtin(p, n));
        const auto& f = rep.field();
        const auto els = f.enumerate();
        std::mt19937_64 rng(2024 + p * 10 + n);
        std::uniform_int_distribution<std::size_t> pick(0, els.size() - 1);
        std::size_t singular = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t m = 1 + trial % 4;
            udm::Matrix<GfElement> b(m, m);
            for (auto& e : b.data()) e = els[pick(rng)];
            const bool field_ok = udm::field_nonsingular(f, b);
            const PrimeMatrix expanded = rep.expand(b);
            const bool prime_ok = udm::prime_field_rank(expanded, p) == expanded.rows();
            const BigInt det = udm::integer_determinant(udm::integer_lift(expanded));
            ASSERT_EQ(field_ok, prime_ok) << "trial " << trial;
            ASSERT_EQ(prime_ok, det % p != 0) << "trial " << trial;
            if (field_ok) ASSERT_NE(det, 0) << "trial " << trial;
            singular += field_ok ? 0 : 1;
        }
        EXPECT_GT(singular, 0U) << "sample should include singular matrices";
    }
}

// The converse of the lift direction does not hold: a singular GF(2) matrix can have a
// nonzero (even) integer determinant.
TEST(LiftNonsingularity, LiftConverseCounterexample) {
    PrimeMatrix m(3, 3, 0);
    m(0, 0) = m(0, 1) = 1;
    m(1, 1) = m(1, 2) = 1;
    m(2, 0) = m(2, 2) = 1;
    EXPECT_LT(udm::prime_field_rank(m, 2), 3U);
    EXPECT_EQ(udm::integer_determinant(udm::integer_lift(m)), 2);
}
