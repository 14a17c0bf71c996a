// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "analysis.hpp"
#include "schemes.hpp"

namespace udm {

using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Below this nonzero fraction the input matrix is kept in sparse form.
inline constexpr double kSparseThreshold = 0.25;

/// A dense or sparse real matrix: a block-row A_i or an encoded submatrix Â_{k,j}.
class BlockMatrix {
public:
    BlockMatrix() = default;
    explicit BlockMatrix(DenseMatrix m) : m_(std::move(m)) {}
    explicit BlockMatrix(SparseMatrix m) : m_(std::move(m)) {}

    [[nodiscard]] bool is_sparse() const noexcept { return std::holds_alternative<SparseMatrix>(m_); }
    [[nodiscard]] Eigen::Index rows() const {
        return std::visit([](const auto& m) { return m.rows(); }, m_);
    }
    [[nodiscard]] Eigen::Index cols() const {
        return std::visit([](const auto& m) { return m.cols(); }, m_);
    }
    [[nodiscard]] std::size_t nnz() const {
        if (is_sparse()) {
            const auto& s = std::get<SparseMatrix>(m_);
            std::size_t count = 0;
            for (Eigen::Index r = 0; r < s.outerSize(); ++r)
                for (SparseMatrix::InnerIterator it(s, r); it; ++it)
                    if (it.value() != 0.0) ++count;
            return count;
        }
        const auto& d = std::get<DenseMatrix>(m_);
        return static_cast<std::size_t>((d.array() != 0.0).count());
    }
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        return std::visit([&](const auto& m) -> Eigen::VectorXd { return m * x; }, m_);
    }
    [[nodiscard]] DenseMatrix dense() const {
        if (is_sparse()) return DenseMatrix(std::get<SparseMatrix>(m_));
        return std::get<DenseMatrix>(m_);
    }
    [[nodiscard]] const SparseMatrix& sparse() const { return std::get<SparseMatrix>(m_); }
    [[nodiscard]] const DenseMatrix& dense_ref() const { return std::get<DenseMatrix>(m_); }

private:
    std::variant<DenseMatrix, SparseMatrix> m_;
};

/// Input A (r×c), vector x, and a real or integer-lift collection. A is zero-padded at the
/// bottom to a multiple of Δ; decoded results are truncated back to r rows.
class CodedJob {
public:
    CodedJob(const BlockMatrix& a, Eigen::VectorXd x, GeneratorCollection coll)
        : x_(std::move(x)), coll_(std::move(coll)) {
        if (!coll_.is_numeric())
            throw ConfigError("coded multiplication needs a real or integer-lift collection; embed the field scheme first");
        if (a.cols() != x_.size())
            throw ConfigError("shape mismatch: A has " + std::to_string(a.cols()) + " columns but x has " +
                              std::to_string(x_.size()) + " entries");
        if (a.rows() == 0) throw ConfigError("A must have at least one row");
        rows_ = static_cast<std::size_t>(a.rows());
        cols_ = static_cast<std::size_t>(a.cols());
        const std::size_t delta = coll_.delta();
        height_ = (rows_ + delta - 1) / delta;
        const double density = static_cast<double>(a.nnz()) / static_cast<double>(rows_ * cols_);
        sparse_ = density < kSparseThreshold;

        if (sparse_) {
            std::vector<std::vector<Eigen::Triplet<double>>> parts(delta);
            auto place = [&](Eigen::Index r, Eigen::Index c, double v) {
                if (v == 0.0) return;
                const auto block = static_cast<std::size_t>(r) / height_;
                parts[block].emplace_back(static_cast<Eigen::Index>(static_cast<std::size_t>(r) % height_), c, v);
            };
            if (a.is_sparse()) {
                const auto& sm = a.sparse();
                for (Eigen::Index r = 0; r < sm.outerSize(); ++r)
                    for (SparseMatrix::InnerIterator it(sm, r); it; ++it) place(it.row(), it.col(), it.value());
            } else {
                const auto& dm = a.dense_ref();
                for (Eigen::Index r = 0; r < dm.rows(); ++r)
                    for (Eigen::Index c = 0; c < dm.cols(); ++c) place(r, c, dm(r, c));
            }
            for (auto& part : parts) {
                SparseMatrix block(static_cast<Eigen::Index>(height_), a.cols());
                block.setFromTriplets(part.begin(), part.end());
                blocks_.emplace_back(std::move(block));
            }
        } else {
            const DenseMatrix full = a.dense();
            for (std::size_t i = 0; i < delta; ++i) {
                const auto start = static_cast<Eigen::Index>(i * height_);
                const auto h = static_cast<Eigen::Index>(height_);
                const Eigen::Index real_rows = std::max<Eigen::Index>(0, std::min<Eigen::Index>(h, a.rows() - start));
                DenseMatrix d = DenseMatrix::Zero(h, a.cols());
                if (real_rows > 0) d.topRows(real_rows) = full.middleRows(start, real_rows);
                blocks_.emplace_back(std::move(d));
            }
        }
        for (const auto& g : coll_.numeric_matrices()) {
            DenseMatrix e(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j)
                    e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g(i, j);
            generators_.push_back(std::move(e));
        }
    }

    [[nodiscard]] const GeneratorCollection& collection() const noexcept { return coll_; }
    [[nodiscard]] const Eigen::VectorXd& x() const noexcept { return x_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    /// Height t of each block-row after padding.
    [[nodiscard]] std::size_t block_height() const noexcept { return height_; }
    [[nodiscard]] std::size_t padded_rows() const noexcept { return height_ * coll_.delta(); }
    [[nodiscard]] bool sparse_path() const noexcept { return sparse_; }
    [[nodiscard]] const BlockMatrix& block_row(std::size_t i) const { return blocks_.at(i); }
    [[nodiscard]] const std::vector<DenseMatrix>& generators() const noexcept { return generators_; }

private:
    Eigen::VectorXd x_;
    GeneratorCollection coll_;
    std::size_t rows_ = 0, cols_ = 0, height_ = 0;
    bool sparse_ = false;
    std::vector<BlockMatrix> blocks_;
    std::vector<DenseMatrix> generators_;
};

/// Encoded submatrices, indexed [worker][column].
using EncodedWorkers = std::vector<std::vector<BlockMatrix>>;

/// Â_{k,j} = Σ_i G_k(i,j) A_i. Only scalar multiples and sums of block-rows; zero
/// generator entries are skipped.
inline EncodedWorkers encode(const CodedJob& job) {
    const auto& gens = job.generators();
    const auto t = static_cast<Eigen::Index>(job.block_height());
    const auto c = static_cast<Eigen::Index>(job.cols());
    EncodedWorkers out(gens.size());
    for (std::size_t k = 0; k < gens.size(); ++k) {
        const DenseMatrix& g = gens[k];
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            if (job.sparse_path()) {
                SparseMatrix acc(t, c);
                for (Eigen::Index i = 0; i < g.rows(); ++i) {
                    const double w = g(i, j);
                    if (w == 0.0) continue;
                    acc += w * job.block_row(static_cast<std::size_t>(i)).sparse();
                }
                acc.prune(0.0);
                acc.makeCompressed();
                out[k].emplace_back(std::move(acc));
            } else {
                DenseMatrix acc = DenseMatrix::Zero(t, c);
                for (Eigen::Index i = 0; i < g.rows(); ++i) {
                    const double w = g(i, j);
                    if (w == 0.0) continue;
                    acc.noalias() += w * job.block_row(static_cast<std::size_t>(i)).dense_ref();
                }
                out[k].emplace_back(std::move(acc));
            }
        }
    }
    return out;
}

/// One worker's progress: it computes Â_{k,0}x, Â_{k,1}x, ... strictly in order and
/// reports after every s products.
struct WorkerState {
    std::size_t worker = 0;
    std::size_t computed = 0;
    std::size_t reported = 0;
    std::vector<Eigen::VectorXd> unreported;
};

/// A batch of consecutive products sent to the master.
struct Emission {
    std::size_t worker = 0;
    std::size_t first_column = 0;
    std::size_t count = 0;
    double time = 0.0; // step counter (deterministic) or simulated clock (stochastic)
};

struct StepOutcome {
    std::size_t column = 0;
    std::optional<Emission> emission;
    std::vector<Eigen::VectorXd> batch;
};

/// Computes the worker's next product; emits the pending block when it reaches s products.
inline StepOutcome worker_step(WorkerState& state, const std::vector<BlockMatrix>& worker_blocks, const Eigen::VectorXd& x,
                               std::size_t s, double time = 0.0) {
    if (state.computed >= worker_blocks.size())
        throw ConfigError("worker " + std::to_string(state.worker) + " has already processed all " +
                          std::to_string(worker_blocks.size()) + " submatrices");
    StepOutcome out;
    out.column = state.computed;
    state.unreported.push_back(worker_blocks[state.computed].apply(x));
    ++state.computed;
    if (state.unreported.size() == s) {
        out.emission = Emission{state.worker, state.reported, s, time};
        out.batch = std::move(state.unreported);
        state.unreported.clear();
        state.reported += s;
    }
    return out;
}

/// Each worker may compute at most budgets[k] products; workers advance round-robin.
struct DeterministicSchedule {
    std::vector<std::size_t> budgets;
};

/// Exponential per-product delays with per-worker rates (rate <= 0: the worker never progresses).
struct StochasticSchedule {
    std::vector<double> rates;
    std::uint64_t seed = 0;
};

using Schedule = std::variant<DeterministicSchedule, StochasticSchedule>;

struct SimulateOptions {
    /// Stop as soon as Σ floor(v_i/s) >= Q_b; otherwise run the schedule to the end.
    bool stop_at_threshold = true;
};

struct DecodeResult {
    Eigen::VectorXd ax;
    double residual = 0.0;
    double kappa = 0.0;
    Pattern pattern;
};

struct WorkerTrace {
    std::string schedule;                           // "deterministic" or "stochastic"
    std::vector<std::size_t> computed;              // products computed per worker
    std::vector<std::vector<std::size_t>> returned; // column indices received per worker, in order
    std::vector<std::vector<Eigen::VectorXd>> results;
    std::vector<Emission> emissions;                // global arrival order
    Pattern pattern;                                // received counts v_i
    std::size_t total_products = 0;
    std::optional<DecodeResult> decoded;
};

namespace detail {

inline void require_decodable(std::size_t blocks, std::size_t q_b, const std::string& what) {
    if (blocks < q_b)
        throw DecodeError("infeasible schedule: " + what + " deliver only " + std::to_string(blocks) + " blocks, " +
                          std::to_string(q_b) + " needed");
}

inline void record(WorkerTrace& trace, StepOutcome& step) {
    if (!step.emission) return;
    const Emission& e = *step.emission;
    for (std::size_t t = 0; t < e.count; ++t) {
        trace.returned[e.worker].push_back(e.first_column + t);
        trace.results[e.worker].push_back(std::move(step.batch[t]));
    }
    trace.pattern.v[e.worker] += e.count;
    trace.emissions.push_back(e);
}

} // namespace detail

/// Runs the workers until the master holds Q_b blocks (or the schedule ends).
inline WorkerTrace simulate(const CodedJob& job, const EncodedWorkers& encoded, const Schedule& schedule,
                            const SimulateOptions& opt = {}) {
    const auto& coll = job.collection();
    const std::size_t n = coll.workers();
    const std::size_t s = coll.block_size();
    const std::size_t q_b = coll.q_b();
    const std::size_t ell = coll.ell();

    WorkerTrace trace;
    trace.computed.assign(n, 0);
    trace.returned.assign(n, {});
    trace.results.assign(n, {});
    trace.pattern.v.assign(n, 0);
    std::vector<WorkerState> states(n);
    for (std::size_t k = 0; k < n; ++k) states[k].worker = k;
    auto done = [&] { return opt.stop_at_threshold && trace.pattern.blocks(s) >= q_b; };
    auto step = [&](std::size_t k, double time) {
        auto outcome = worker_step(states[k], encoded[k], job.x(), s, time);
        ++trace.computed[k];
        ++trace.total_products;
        detail::record(trace, outcome);
    };

    if (const auto* det = std::get_if<DeterministicSchedule>(&schedule)) {
        trace.schedule = "deterministic";
        if (det->budgets.size() != n)
            throw ConfigError("schedule lists " + std::to_string(det->budgets.size()) + " budgets for " + std::to_string(n) +
                              " workers");
        std::size_t blocks = 0;
        for (auto b : det->budgets) {
            if (b > ell) throw ConfigError("schedule budget " + std::to_string(b) + " exceeds ell=" + std::to_string(ell));
            blocks += b / s;
        }
        detail::require_decodable(blocks, q_b, "the budgets");
        double clock = 0.0;
        for (bool progressed = true; progressed && !done();) {
            progressed = false;
            for (std::size_t k = 0; k < n && !done(); ++k) {
                if (trace.computed[k] >= det->budgets[k]) continue;
                step(k, clock);
                clock += 1.0;
                progressed = true;
            }
        }
        return trace;
    }

    const auto& sto = std::get<StochasticSchedule>(schedule);
    trace.schedule = "stochastic";
    if (sto.rates.size() != n)
        throw ConfigError("schedule lists " + std::to_string(sto.rates.size()) + " rates for " + std::to_string(n) + " workers");
    std::size_t alive_blocks = 0;
    for (auto r : sto.rates)
        if (r > 0.0) alive_blocks += ell / s;
    detail::require_decodable(alive_blocks, q_b, "the live workers");
    std::mt19937_64 rng(sto.seed);
    std::vector<double> next(n, std::numeric_limits<double>::infinity());
    auto draw = [&](std::size_t k) {
        std::exponential_distribution<double> d(sto.rates[k]);
        return d(rng);
    };
    for (std::size_t k = 0; k < n; ++k)
        if (sto.rates[k] > 0.0) next[k] = draw(k);
    while (!done()) {
        std::size_t k = n;
        for (std::size_t w = 0; w < n; ++w)
            if (std::isfinite(next[w]) && (k == n || next[w] < next[k])) k = w;
        if (k == n) break;
        const double now = next[k];
        step(k, now);
        next[k] = trace.computed[k] < ell ? now + draw(k) : std::numeric_limits<double>::infinity();
    }
    return trace;
}

inline WorkerTrace simulate(const CodedJob& job, const Schedule& schedule, const SimulateOptions& opt = {}) {
    return simulate(job, encode(job), schedule, opt);
}

/// Recovers Ax from the received products: stacks r_{k,j} into R, assembles G for the
/// received pattern and solves Gᵀ Y = R (least squares when more than Δ columns arrived)
/// with a column-pivoted QR factorization.
inline DecodeResult decode(const WorkerTrace& trace, const CodedJob& job) {
    const auto& coll = job.collection();
    const std::size_t delta = coll.delta();
    if (trace.pattern.blocks(coll.block_size()) < coll.q_b())
        throw DecodeError("not decodable: received " + std::to_string(trace.pattern.blocks(coll.block_size())) +
                          " blocks, " + std::to_string(coll.q_b()) + " needed");
    const Eigen::MatrixXd g = assemble_numeric(coll.numeric_matrices(), trace.pattern);
    const auto t = static_cast<Eigen::Index>(job.block_height());
    Eigen::MatrixXd rhs(g.cols(), t);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < trace.results.size(); ++k)
        for (const auto& r : trace.results[k]) rhs.row(row++) = r.transpose();

    const Eigen::MatrixXd gt = g.transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gt);
    DecodeResult out;
    out.pattern = trace.pattern;
    out.kappa = condition_number(g);
    if (qr.rank() < static_cast<Eigen::Index>(delta) || std::isinf(out.kappa))
        throw DecodeError("received pattern " + trace.pattern.to_string() +
                          " gives a rank-deficient system; the collection is not certified for it");
    const Eigen::MatrixXd y = qr.solve(rhs);
    out.residual = (gt * y - rhs).norm();
    Eigen::VectorXd full(static_cast<Eigen::Index>(delta) * t);
    for (std::size_t i = 0; i < delta; ++i) full.segment(static_cast<Eigen::Index>(i) * t, t) = y.row(static_cast<Eigen::Index>(i)).transpose();
    out.ax = full.head(static_cast<Eigen::Index>(job.rows()));
    return out;
}

} // namespace udm
