// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>

#include <udmcode/coding.hpp>
#include <udmcode/scheme_config.hpp>

using udm::BlockMatrix;
using udm::CodedJob;
using udm::DeterministicSchedule;
using udm::StochasticSchedule;

namespace {

udm::GeneratorCollection scheme(udm::Construction c, std::size_t n, std::size_t delta, std::size_t ell,
                                const char* field = nullptr) {
    udm::SchemeConfig s;
    s.construction = c;
    s.workers = n;
    s.delta = delta;
    s.ell = ell;
    if (field) s.field = field;
    return udm::construct(s);
}

Eigen::MatrixXd random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double fill = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::bernoulli_distribution keep(fill);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (keep(rng)) m(i, j) = d(rng);
    return m;
}

Eigen::VectorXd random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = d(rng);
    return v;
}

double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
    return (got - want).norm() / std::max(want.norm(), 1e-300);
}

// Adversarial order search: every interleaving of single products, stopping once Q_b
// blocks are held. Returns the largest product count at the stopping moment.
std::size_t exhaustive_worst_load(std::size_t n, std::size_t ell, std::size_t s, std::size_t q_b) {
    std::map<std::vector<std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::vector<std::size_t>&)> go = [&](std::vector<std::size_t>& c) -> std::size_t {
        std::size_t blocks = 0, total = 0;
        for (auto x : c) {
            blocks += x / s;
            total += x;
        }
        if (blocks >= q_b) return total;
        if (auto it = memo.find(c); it != memo.end()) return it->second;
        std::size_t best = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (c[k] == ell) continue;
            ++c[k];
            best = std::max(best, go(c));
            --c[k];
        }
        memo[c] = best;
        return best;
    };
    std::vector<std::size_t> start(n, 0);
    return go(start);
}

} // namespace

TEST(Encode, UnitColumnsCopyBlockRows) {
    const auto coll = udm::hand_built_collection();
    const Eigen::MatrixXd a = random_matrix(6, 4, 1);
    const CodedJob job(BlockMatrix(a), random_vector(4, 2), coll);
    ASSERT_EQ(job.block_height(), 2U);
    const auto enc = udm::encode(job);
    ASSERT_EQ(enc.size(), 3U);
    // worker 0: column 0 is A_0
    EXPECT_EQ(enc[0][0].dense(), a.middleRows(0, 2));
    // worker 1: A_1 and A_0 + A_2
    EXPECT_EQ(enc[1][0].dense(), a.middleRows(2, 2));
    EXPECT_EQ(enc[1][1].dense(), a.middleRows(0, 2) + a.middleRows(4, 2));
}

TEST(Encode, ZeroGeneratorColumnGivesZeroBlock) {
    std::vector<udm::Matrix<udm::Rational>> ms(2, udm::Matrix<udm::Rational>(2, 2));
    ms[0](0, 0) = 1;
    ms[0](1, 1) = 1;
    ms[1](0, 0) = 1; // column 1 of worker 1 stays zero
    const auto coll = udm::GeneratorCollection::real(ms, 1, {"hand", "", "", {}, std::nullopt, ""});
    const CodedJob job(BlockMatrix(random_matrix(4, 3, 3)), random_vector(3, 4), coll);
    const auto enc = udm::encode(job);
    EXPECT_EQ(enc[1][1].nnz(), 0U);
    EXPECT_TRUE(enc[1][1].dense().isZero());
}

TEST(Encode, DeltaOneIsVerbatim) {
    const auto coll = scheme(udm::Construction::rs_real, 3, 1, 1);
    const Eigen::MatrixXd a = random_matrix(5, 4, 5);
    const CodedJob job(BlockMatrix(a), random_vector(4, 6), coll);
    const auto enc = udm::encode(job);
    for (const auto& w : enc) EXPECT_EQ(w[0].dense(), a);
}

TEST(Encode, ShapeMismatchAndFieldCollectionsRejected) {
    const auto coll = udm::hand_built_collection();
    EXPECT_THROW(CodedJob(BlockMatrix(random_matrix(6, 4, 1)), random_vector(5, 2), coll), udm::ConfigError);
    const auto ff = scheme(udm::Construction::udm_ff, 6, 4, 3, "2^3");
    EXPECT_THROW(CodedJob(BlockMatrix(random_matrix(8, 4, 1)), random_vector(4, 2), ff), udm::ConfigError);
}

TEST(WorkerStep, EmitsEverySProducts) {
    const auto coll = scheme(udm::Construction::udm_companion, 6, 4, 3, "2^3");
    ASSERT_EQ(coll.block_size(), 3U);
    ASSERT_EQ(coll.ell(), 9U);
    const CodedJob job(BlockMatrix(random_matrix(24, 5, 7)), random_vector(5, 8), coll);
    const auto enc = udm::encode(job);
    udm::WorkerState st;
    st.worker = 2;
    std::vector<std::size_t> emitted_after;
    for (std::size_t j = 0; j < 9; ++j) {
        const auto out = udm::worker_step(st, enc[2], job.x(), 3);
        EXPECT_EQ(out.column, j);
        if (out.emission) {
            emitted_after.push_back(j);
            EXPECT_EQ(out.emission->worker, 2U);
            EXPECT_EQ(out.emission->first_column, j - 2);
            EXPECT_EQ(out.batch.size(), 3U);
            for (std::size_t t = 0; t < 3; ++t) EXPECT_TRUE(out.batch[t].isApprox(enc[2][j - 2 + t].apply(job.x())));
        }
    }
    EXPECT_EQ(emitted_after, (std::vector<std::size_t>{2, 5, 8}));
    EXPECT_THROW((void)udm::worker_step(st, enc[2], job.x(), 3), udm::ConfigError);
}

// Every certified pattern decodes back to Ax.
TEST(Decode, RoundTripOverEveryPattern) {
    using C = udm::Construction;
    for (const auto& coll : {scheme(C::rs_real, 6, 4, 3), scheme(C::udm_real, 6, 4, 3), scheme(C::udm_natural_embed, 6, 4, 3),
                             scheme(C::udm_companion, 6, 4, 3, "2^3"), scheme(C::udm_companion, 4, 4, 3, "3^2")}) {
        const std::size_t rows = 3 * coll.delta();
        const Eigen::MatrixXd a = random_matrix(rows, 7, 11);
        const Eigen::VectorXd x = random_vector(7, 12);
        const Eigen::VectorXd want = a * x;
        const CodedJob job(BlockMatrix(a), x, coll);
        const auto enc = udm::encode(job);
        udm::PatternSpace::for_collection(coll).for_each([&](const udm::Pattern& v) {
            udm::SimulateOptions opt;
            opt.stop_at_threshold = false;
            const auto trace = udm::simulate(job, enc, DeterministicSchedule{v.v}, opt);
            EXPECT_EQ(trace.pattern, v);
            const auto dec = udm::decode(trace, job);
            EXPECT_LE(relative_error(dec.ax, want), 1e-12 * dec.kappa) << coll.provenance().construction << v.to_string();
            return true;
        });
    }
}

TEST(Decode, PaddingWhenDeltaDoesNotDivideRows) {
    const auto coll = scheme(udm::Construction::udm_real, 6, 4, 3);
    const Eigen::MatrixXd a = random_matrix(10, 6, 21);
    const Eigen::VectorXd x = random_vector(6, 22);
    const CodedJob job(BlockMatrix(a), x, coll);
    EXPECT_EQ(job.block_height(), 3U);
    EXPECT_EQ(job.padded_rows(), 12U);
    EXPECT_TRUE(job.block_row(3).dense().bottomRows(2).isZero());
    const auto trace = udm::simulate(job, DeterministicSchedule{{3, 0, 0, 1, 0, 0}});
    const auto dec = udm::decode(trace, job);
    ASSERT_EQ(dec.ax.size(), 10);
    EXPECT_LE(relative_error(dec.ax, a * x), 1e-12 * dec.kappa);
}

TEST(Decode, SparseInputStaysSparse) {
    const auto coll = scheme(udm::Construction::udm_companion, 6, 4, 3, "2^3");
    const Eigen::MatrixXd dense = random_matrix(48, 40, 31, 0.05);
    const Eigen::VectorXd x = random_vector(40, 32);
    udm::SparseMatrix sp = dense.sparseView();
    const CodedJob job(BlockMatrix(sp), x, coll);
    ASSERT_TRUE(job.sparse_path());
    const auto enc = udm::encode(job);
    for (const auto& w : enc)
        for (const auto& b : w) EXPECT_TRUE(b.is_sparse());
    const auto dec = udm::decode(udm::simulate(job, enc, DeterministicSchedule{{9, 0, 0, 0, 3, 0}}), job);
    EXPECT_LE(relative_error(dec.ax, dense * x), 1e-12 * dec.kappa);
    // the same matrix passed densely goes through the sparse path too
    EXPECT_TRUE(CodedJob(BlockMatrix(dense), x, coll).sparse_path());
    EXPECT_FALSE(CodedJob(BlockMatrix(random_matrix(48, 40, 33)), x, coll).sparse_path());
}

TEST(Simulate, InOrderProcessingAndStopCondition) {
    const auto coll = scheme(udm::Construction::udm_companion, 6, 4, 3, "2^3");
    const CodedJob job(BlockMatrix(random_matrix(24, 5, 41)), random_vector(5, 42), coll);
    const auto enc = udm::encode(job);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> rate(0.1, 5.0);
        std::vector<double> rates(6);
        for (auto& r : rates) r = rate(rng);
        const auto trace = udm::simulate(job, enc, StochasticSchedule{rates, seed});
        for (const auto& cols : trace.returned)
            for (std::size_t t = 0; t < cols.size(); ++t) ASSERT_EQ(cols[t], t);
        ASSERT_GE(trace.pattern.blocks(3), coll.q_b());
        // one emission earlier the threshold was not reached
        auto before = trace.pattern;
        before.v[trace.emissions.back().worker] -= trace.emissions.back().count;
        ASSERT_LT(before.blocks(3), coll.q_b());
        for (std::size_t e = 1; e < trace.emissions.size(); ++e)
            ASSERT_LE(trace.emissions[e - 1].time, trace.emissions[e].time);
        ASSERT_LE(trace.total_products, udm::worst_case_load(6, coll.delta(), 3));
    }
}

TEST(Simulate, StochasticIsSeedDeterministic) {
    const auto coll = scheme(udm::Construction::rs_real, 6, 4, 3);
    const CodedJob job(BlockMatrix(random_matrix(8, 3, 51)), random_vector(3, 52), coll);
    const StochasticSchedule sch{{1.0, 2.0, 0.5, 1.5, 3.0, 0.7}, 9};
    const auto a = udm::simulate(job, sch);
    const auto b = udm::simulate(job, sch);
    EXPECT_EQ(a.pattern, b.pattern);
    EXPECT_EQ(a.emissions.size(), b.emissions.size());
    for (std::size_t e = 0; e < a.emissions.size(); ++e) EXPECT_EQ(a.emissions[e].time, b.emissions[e].time);
}

TEST(Simulate, InfeasibleSchedules) {
    const auto coll = scheme(udm::Construction::udm_companion, 6, 4, 3, "2^3");
    const CodedJob job(BlockMatrix(random_matrix(24, 5, 61)), random_vector(5, 62), coll);
    EXPECT_THROW((void)udm::simulate(job, DeterministicSchedule{{2, 2, 2, 2, 2, 2}}), udm::DecodeError);
    EXPECT_THROW((void)udm::simulate(job, DeterministicSchedule{{10, 0, 0, 0, 0, 0}}), udm::ConfigError);
    EXPECT_THROW((void)udm::simulate(job, DeterministicSchedule{{9, 9}}), udm::ConfigError);
    EXPECT_THROW((void)udm::simulate(job, StochasticSchedule{{1, 0, 0, 0, 0, 0}, 1}), udm::DecodeError);
    EXPECT_NO_THROW((void)udm::simulate(job, StochasticSchedule{{1, 0, 0, 0, 0, 1}, 1}));
    // too few blocks to decode
    auto trace = udm::simulate(job, DeterministicSchedule{{9, 3, 0, 0, 0, 0}});
    trace.pattern.v[1] = 0;
    EXPECT_THROW((void)udm::decode(trace, job), udm::DecodeError);
}

TEST(Decode, SingularPatternIsReported) {
    const auto coll = udm::mod2_hasse_counterexample();
    const CodedJob job(BlockMatrix(random_matrix(8, 3, 71)), random_vector(3, 72), coll);
    const auto trace = udm::simulate(job, DeterministicSchedule{{2, 2}});
    EXPECT_THROW((void)udm::decode(trace, job), udm::DecodeError);
}

TEST(Load, ClosedFormMatchesExhaustiveSearch) {
    for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t s = 1; s <= 3; ++s)
            for (std::size_t ell = s; ell <= 6; ell += s)
                for (std::size_t q_b = 1; q_b <= n * (ell / s); ++q_b) {
                    const auto want = exhaustive_worst_load(n, ell, s, q_b);
                    ASSERT_EQ(udm::attainable_worst_case_load(n, ell, s, q_b), std::optional<std::size_t>(want))
                        << n << " " << ell << " " << s << " " << q_b;
                    ASSERT_LE(static_cast<double>(want), udm::worst_case_load(n, q_b * s, s));
                    // with room for a partial block everywhere the bound is exact
                    if (q_b <= (ell / s - 1) * (n - 1) + ell / s)
                        ASSERT_EQ(static_cast<double>(want), udm::worst_case_load(n, q_b * s, s));
                }
}

TEST(Load, RoundRobinNeverExceedsWorstCase) {
    const auto coll = scheme(udm::Construction::udm_companion, 6, 4, 3, "2^3");
    const CodedJob job(BlockMatrix(random_matrix(24, 4, 81)), random_vector(4, 82), coll);
    const auto enc = udm::encode(job);
    const auto bound = *udm::attainable_worst_case_load(6, 9, 3, 4);
    std::size_t seen_max = 0;
    std::mt19937_64 rng(83);
    std::uniform_int_distribution<std::size_t> pick(0, 9);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::size_t> budgets(6);
        std::size_t blocks = 0;
        for (auto& b : budgets) {
            b = pick(rng);
            blocks += b / 3;
        }
        if (blocks < 4) continue;
        const auto trace = udm::simulate(job, enc, DeterministicSchedule{budgets});
        ASSERT_LE(trace.total_products, bound);
        seen_max = std::max(seen_max, trace.total_products);
    }
    EXPECT_GT(seen_max, 12U);
}
