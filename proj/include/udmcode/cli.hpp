// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "analysis.hpp"
#include "coding.hpp"
#include "io.hpp"
#include "scheme_config.hpp"
#include "tables.hpp"

namespace udm::cli {

enum ExitCode : int { success = 0, certification_failure = 2, infeasible_decode = 3, config_error = 4 };

struct CliConfig {
    std::string subcommand;
    std::string scheme_file;
    // inline scheme description, used when no --scheme file is given
    std::string construction;
    std::string field;
    std::string beta_source;
    std::size_t workers = 0, delta = 0, ell = 0;
    std::optional<std::uint64_t> seed;
    std::string mode = "block-aligned";
    bool strict_psi = false;
    std::uint64_t budget = 10'000'000;
    double rank_tol = 1e-10;
    std::string out;
    unsigned threads = 0;
    bool json = false;
    // analyze
    int table = 0;
    bool no_certify = false;
    // verify
    bool numerical = false;
    // multiply / simulate
    std::string matrix_file;
    std::string sparse_file;
    std::string vector_file;
    std::vector<std::size_t> budgets;
    std::vector<double> rates;
    bool all_workers = false;
    std::size_t rows = 96, cols = 48;
    double fill = 1.0;
};

namespace detail {

struct LoadedScheme {
    std::optional<SchemeConfig> config;
    GeneratorCollection collection;
};

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
}

inline bool inline_scheme_given(const CliConfig& c) {
    return !c.construction.empty() || !c.field.empty() || !c.beta_source.empty() || c.workers || c.delta || c.ell;
}

/// A --scheme file holds either a scheme config or a collection written by `construct`.
inline LoadedScheme load_scheme(const CliConfig& c) {
    if (!c.scheme_file.empty() && inline_scheme_given(c))
        throw ConfigError("give either --scheme or inline scheme flags, not both");
    if (!c.scheme_file.empty()) {
        json j = read_json_file(c.scheme_file);
        // a construct output file wraps the collection in its envelope
        if (j.is_object() && j.value("command", "") == "construct" && j.contains("result")) j = j["result"];
        if (j.is_object() && j.contains("meta")) return {std::nullopt, collection_from_json(j)};
        SchemeConfig cfg = scheme_config_from_json(j);
        if (c.seed) cfg.seed = *c.seed;
        return {cfg, construct(cfg)};
    }
    if (c.construction.empty()) throw ConfigError("no scheme: pass --scheme <file> or --construction with -N, --delta, --ell");
    json j;
    j["construction"] = c.construction;
    j["N"] = c.workers;
    j["delta"] = c.delta;
    j["ell"] = c.ell;
    if (!c.field.empty()) j["field"] = c.field;
    if (!c.beta_source.empty()) j["beta_source"] = c.beta_source;
    if (c.seed) j["seed"] = *c.seed;
    SchemeConfig cfg = scheme_config_from_json(j);
    return {cfg, construct(cfg)};
}

inline AnalyzeOptions analyze_options(const CliConfig& c) {
    AnalyzeOptions opt;
    opt.mode = enumeration_mode_from_string(c.mode);
    opt.bound = c.strict_psi ? PatternBound::strict : PatternBound::inclusive;
    opt.rank_tol = c.rank_tol;
    opt.budget = c.budget;
    opt.threads = c.threads;
    opt.certify = !c.no_certify;
    return opt;
}

inline json options_json(const CliConfig& c) {
    json j;
    j["mode"] = c.mode;
    j["pattern_bound"] = c.strict_psi ? "strict" : "inclusive";
    j["budget"] = c.budget;
    j["rank_tol"] = c.rank_tol;
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

/// Resolved configuration plus its hash; every artifact carries both.
inline json envelope(const std::string& command, json config, json result) {
    json out;
    out["command"] = command;
    out["config"] = std::move(config);
    out["config_hash"] = fnv1a_hex(out["config"].dump());
    out["result"] = std::move(result);
    return out;
}

inline json scheme_config_json(const LoadedScheme& s) {
    json j;
    j["scheme"] = s.config ? to_json(*s.config) : json(nullptr);
    j["collection"] = collection_meta(s.collection);
    return j;
}

inline void emit_file(const CliConfig& c, const std::string& name, const std::string& text) {
    if (c.out.empty()) return;
    std::filesystem::create_directories(c.out);
    write_text((std::filesystem::path(c.out) / name).string(), text);
}

inline std::string percent(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

inline int cmd_construct(const CliConfig& c, std::ostream& out) {
    const LoadedScheme s = load_scheme(c);
    const auto& coll = s.collection;
    json cfg = scheme_config_json(s);
    const json doc = envelope("construct", cfg, to_json(coll));
    emit_file(c, "collection.json", doc.dump(2) + "\n");
    for (std::size_t k = 0; k < coll.workers(); ++k) emit_file(c, "worker_" + std::to_string(k) + ".csv", worker_csv(coll, k));
    if (c.json) {
        out << doc.dump(2) << '\n';
        return success;
    }
    out << coll.provenance().construction << ": N=" << coll.workers() << ", " << coll.delta() << "x" << coll.ell()
        << " " << to_string(coll.domain()) << " matrices, s=" << coll.block_size() << ", Q_b=" << coll.q_b()
        << ", density " << percent(coll.density()) << '\n';
    if (coll.field()) out << "field: " << coll.field()->spec_string() << " (" << coll.field()->polynomial_string() << ")\n";
    else if (!coll.provenance().field.empty()) {
        const GfContext base = GfContext::parse(coll.provenance().field);
        out << "field: " << base.spec_string() << " (" << base.polynomial_string() << "), integer lift\n";
    }
    if (!coll.provenance().betas.empty())
        out << "betas (" << coll.provenance().beta_source << "): " << join(coll.provenance().betas, ", ") << '\n';
    out << "config hash: " << doc["config_hash"].get<std::string>() << '\n';
    return success;
}

inline int cmd_analyze(const CliConfig& c, std::ostream& out) {
    const AnalyzeOptions opt = analyze_options(c);
    std::vector<AnalysisReport> reports;
    std::vector<std::string> labels;
    json cfg;
    if (c.table) {
        if (!c.scheme_file.empty() || inline_scheme_given(c)) throw ConfigError("--table replaces --scheme; give only one");
        json schemes = json::array();
        for (const auto& row : comparison_table(c.table)) {
            SchemeConfig sc = row.config;
            if (c.seed) sc.seed = *c.seed;
            const GeneratorCollection coll = construct(sc);
            reports.push_back(analyze(coll, opt));
            labels.push_back(row.label);
            schemes.push_back({{"label", row.label}, {"scheme", to_json(sc)}, {"collection", collection_meta(coll)}});
        }
        cfg["table"] = c.table;
        cfg["schemes"] = std::move(schemes);
    } else {
        const LoadedScheme s = load_scheme(c);
        reports.push_back(analyze(s.collection, opt));
        labels.push_back("");
        cfg = scheme_config_json(s);
    }
    cfg["options"] = options_json(c);
    cfg["options"]["certify"] = opt.certify;

    json result = json::array();
    bool failed = false;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        json r = to_json(reports[i]);
        if (!labels[i].empty()) r["label"] = labels[i];
        result.push_back(std::move(r));
        if (reports[i].verdict && !reports[i].verdict->passed) failed = true;
    }
    const json doc = envelope("analyze", cfg, {{"reports", result}});
    const std::string table = format_table(reports, labels);
    emit_file(c, "report.json", doc.dump(2) + "\n");
    emit_file(c, "table.txt", table);
    if (c.json) {
        out << doc.dump(2) << '\n';
    } else {
        out << table;
        out << "patterns: " << c.mode << ", " << (c.strict_psi ? "v_i <= ell-1" : "v_i <= ell") << "; config hash "
            << doc["config_hash"].get<std::string>() << '\n';
        for (std::size_t i = 0; i < reports.size(); ++i)
            if (reports[i].verdict && !reports[i].verdict->passed)
                out << "FAIL " << (labels[i].empty() ? reports[i].scheme : labels[i]) << ": pattern "
                    << reports[i].verdict->failing->to_string() << " is rank-deficient\n";
    }
    return failed ? certification_failure : success;
}

inline int cmd_verify(const CliConfig& c, std::ostream& out) {
    const LoadedScheme s = load_scheme(c);
    CertifyOptions opt;
    opt.mode = enumeration_mode_from_string(c.mode);
    opt.bound = c.strict_psi ? PatternBound::strict : PatternBound::inclusive;
    opt.rank_tol = c.rank_tol;
    opt.budget = c.budget;
    opt.method = RankMethod::exact;
    if (c.numerical) {
        if (s.collection.domain() != Domain::real)
            throw ConfigError("--numerical is only allowed for real collections; field and integer collections are certified exactly");
        opt.method = RankMethod::numerical;
    }
    const PatternSpace space = PatternSpace::for_collection(s.collection, opt.mode, opt.bound);
    if (!space.parameters_consistent())
        throw ConfigError("no pattern can deliver Q_b blocks under this pattern bound (N*floor(bound/s) < Q_b)");
    const CertificationVerdict v = certify_full_rank(s.collection, opt);
    json cfg = scheme_config_json(s);
    cfg["options"] = options_json(c);
    cfg["options"]["method"] = v.method;
    const json doc = envelope("verify", cfg, to_json(v));
    emit_file(c, "verdict.json", doc.dump(2) + "\n");
    if (c.json) {
        out << doc.dump(2) << '\n';
    } else if (v.passed) {
        out << "PASS: " << v.patterns_checked << " patterns full rank (" << v.method << ", " << c.mode << ", "
            << (c.strict_psi ? "v_i <= ell-1" : "v_i <= ell") << ", s=" << s.collection.block_size() << ")\n";
    } else {
        out << "FAIL: pattern " << v.failing->to_string() << " is rank-deficient (" << v.method << ", after "
            << v.patterns_checked << " patterns)\n";
    }
    return v.passed ? success : certification_failure;
}

inline Schedule make_schedule(const CliConfig& c, const GeneratorCollection& coll) {
    if (!c.budgets.empty() && !c.rates.empty()) throw ConfigError("give either --budgets or --rates, not both");
    if (!c.rates.empty()) {
        if (c.rates.size() != coll.workers())
            throw ConfigError("--rates needs one value per worker (" + std::to_string(coll.workers()) + ")");
        return StochasticSchedule{c.rates, c.seed.value_or(0)};
    }
    if (!c.budgets.empty()) {
        if (c.budgets.size() != coll.workers())
            throw ConfigError("--budgets needs one value per worker (" + std::to_string(coll.workers()) + ")");
        return DeterministicSchedule{c.budgets};
    }
    return DeterministicSchedule{std::vector<std::size_t>(coll.workers(), coll.ell())};
}

inline json schedule_json(const Schedule& s) {
    if (const auto* d = std::get_if<DeterministicSchedule>(&s)) return {{"kind", "deterministic"}, {"budgets", d->budgets}};
    const auto& st = std::get<StochasticSchedule>(s);
    return {{"kind", "stochastic"}, {"rates", st.rates}, {"seed", st.seed}};
}

inline BlockMatrix random_matrix(std::size_t rows, std::size_t cols, double fill, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (fill >= 1.0) {
        DenseMatrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = value(rng);
        return BlockMatrix(std::move(a));
    }
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = value(rng);
            if (coin(rng) < fill) t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), v);
        }
    SparseMatrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    a.setFromTriplets(t.begin(), t.end());
    return BlockMatrix(std::move(a));
}

/// Shared by multiply and simulate: encode, run the schedule, decode.
inline int run_job(const CliConfig& c, std::ostream& out, const std::string& command, bool random_inputs) {
    if (c.fill <= 0.0 || c.fill > 1.0) throw ConfigError("--fill must lie in (0, 1]");
    const LoadedScheme s = load_scheme(c);
    json cfg = scheme_config_json(s);
    cfg["options"] = options_json(c);

    std::optional<BlockMatrix> a;
    Eigen::VectorXd x;
    std::mt19937_64 rng(c.seed.value_or(0));
    if (!c.matrix_file.empty() && !c.sparse_file.empty()) throw ConfigError("give either --matrix or --sparse, not both");
    if (!c.matrix_file.empty()) a = BlockMatrix(read_dense_csv(c.matrix_file));
    else if (!c.sparse_file.empty()) a = BlockMatrix(read_triplets(c.sparse_file));
    else if (random_inputs) a = random_matrix(c.rows, c.cols, c.fill, rng);
    else throw ConfigError("multiply needs --matrix <csv> or --sparse <triplets>");
    if (!c.vector_file.empty()) {
        x = read_vector(c.vector_file);
    } else if (random_inputs) {
        std::uniform_real_distribution<double> value(-1.0, 1.0);
        x.resize(a->cols());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = value(rng);
    } else {
        throw ConfigError("multiply needs --vector <file>");
    }
    cfg["inputs"] = {{"matrix", c.matrix_file.empty() ? (c.sparse_file.empty() ? "random" : c.sparse_file) : c.matrix_file},
                     {"vector", c.vector_file.empty() ? "random" : c.vector_file},
                     {"rows", a->rows()},
                     {"cols", a->cols()}};
    if (random_inputs && c.matrix_file.empty() && c.sparse_file.empty()) cfg["inputs"]["fill"] = c.fill;

    const CodedJob job(*a, x, s.collection);
    const Schedule schedule = make_schedule(c, s.collection);
    cfg["schedule"] = schedule_json(schedule);
    cfg["schedule"]["stop_at_threshold"] = !c.all_workers;

    json result;
    result["sparse_path"] = job.sparse_path();
    result["block_height"] = job.block_height();
    result["padded_rows"] = job.padded_rows();
    int code = success;
    std::optional<Eigen::VectorXd> ax;
    try {
        WorkerTrace trace = simulate(job, schedule, SimulateOptions{!c.all_workers});
        try {
            trace.decoded = decode(trace, job);
            ax = trace.decoded->ax;
            const Eigen::VectorXd direct = a->apply(x);
            const double norm = direct.norm();
            result["relative_error"] = norm > 0 ? (*ax - direct).norm() / norm : (*ax - direct).norm();
        } catch (const DecodeError& e) {
            result["error"] = e.what();
            code = infeasible_decode;
        }
        result["trace"] = to_json(trace);
    } catch (const DecodeError& e) {
        result["error"] = e.what();
        code = infeasible_decode;
    }
    const json doc = envelope(command, cfg, result);
    emit_file(c, "trace.json", doc.dump(2) + "\n");
    if (ax) emit_file(c, "ax.txt", vector_text(*ax));
    if (c.json) {
        out << doc.dump(2) << '\n';
    } else if (code == success) {
        const auto& tr = result["trace"];
        out << "decoded from pattern " << tr["decode"]["pattern"].dump() << " after " << tr["total_products"].get<std::size_t>()
            << " products; residual " << tr["decode"]["residual"].dump() << ", condition number "
            << tr["decode"]["condition_number"].dump() << ", relative error " << result["relative_error"].dump() << '\n';
        if (command == "multiply" && c.out.empty())
            for (Eigen::Index i = 0; i < ax->size(); ++i) out << format_double((*ax)(i)) << '\n';
    } else {
        out << "decode failed: " << result["error"].get<std::string>() << '\n';
    }
    return code;
}

} // namespace detail

/// Parses argv and runs one subcommand; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Coded matrix-vector multiplication schemes: construct, certify, analyze, simulate"};
    app.require_subcommand(1);
    CliConfig c;

    auto add_scheme = [&](CLI::App* sub) {
        sub->add_option("--scheme", c.scheme_file, "scheme config JSON, or a collection written by construct")
            ->check(CLI::ExistingFile);
        sub->add_option("--construction", c.construction, "inline scheme: construction name");
        sub->add_option("-N,--workers", c.workers, "inline scheme: number of workers");
        sub->add_option("--delta", c.delta, "inline scheme: number of block-rows");
        sub->add_option("--ell", c.ell, "inline scheme: submatrices per worker");
        sub->add_option("--field", c.field, "inline scheme: field spec p^n or p^n/digits");
        sub->add_option("--beta-source", c.beta_source, "inline scheme: default|equispaced|powers-of-alpha|seeded-random");
        sub->add_option("--seed", c.seed, "seed for random evaluation points, schedules and inputs");
        sub->add_option("--out", c.out, "output directory");
        sub->add_flag("--json", c.json, "print the JSON document instead of the summary");
    };
    auto add_patterns = [&](CLI::App* sub) {
        sub->add_option("--mode", c.mode, "pattern enumeration")->check(CLI::IsMember({"block-aligned", "full"}));
        sub->add_flag("--strict-psi", c.strict_psi, "bound patterns by v_i <= ell-1 instead of v_i <= ell");
        sub->add_option("--budget", c.budget, "maximum number of patterns to enumerate");
        sub->add_option("--rank-tol", c.rank_tol, "relative singular-value tolerance for numerical rank");
    };
    auto add_job = [&](CLI::App* sub) {
        sub->add_option("--matrix", c.matrix_file, "dense A as CSV")->check(CLI::ExistingFile);
        sub->add_option("--sparse", c.sparse_file, "sparse A as 'row col value' lines")->check(CLI::ExistingFile);
        sub->add_option("--vector", c.vector_file, "x, one value per line")->check(CLI::ExistingFile);
        sub->add_option("--budgets", c.budgets, "deterministic schedule: products each worker may compute")->delimiter(',');
        sub->add_option("--rates", c.rates, "stochastic schedule: per-worker exponential rates")->delimiter(',');
        sub->add_flag("--all-workers", c.all_workers, "keep running after Q_b blocks arrive and decode from everything");
    };

    auto* construct_cmd = app.add_subcommand("construct", "build a generator collection and write it out");
    add_scheme(construct_cmd);
    auto* analyze_cmd = app.add_subcommand("analyze", "condition numbers, density and certification over all patterns");
    add_scheme(analyze_cmd);
    add_patterns(analyze_cmd);
    analyze_cmd->add_option("--table", c.table, "run a built-in comparison table (1 or 2)")->check(CLI::IsMember({1, 2}));
    analyze_cmd->add_option("--threads", c.threads, "worker threads (0: all cores); results do not depend on it");
    analyze_cmd->add_flag("--no-certify", c.no_certify, "skip exact certification");
    auto* verify_cmd = app.add_subcommand("verify", "certify the s-weak full-rank condition");
    add_scheme(verify_cmd);
    add_patterns(verify_cmd);
    verify_cmd->add_flag("--numerical", c.numerical, "SVD rank instead of exact arithmetic (real collections only)");
    auto* multiply_cmd = app.add_subcommand("multiply", "coded A*x from files");
    add_scheme(multiply_cmd);
    add_job(multiply_cmd);
    auto* simulate_cmd = app.add_subcommand("simulate", "run a straggler schedule on random or given inputs");
    add_scheme(simulate_cmd);
    add_job(simulate_cmd);
    simulate_cmd->add_option("--rows", c.rows, "rows of the random A");
    simulate_cmd->add_option("--cols", c.cols, "columns of the random A");
    simulate_cmd->add_option("--fill", c.fill, "nonzero fraction of the random A");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? success : config_error;
    }

    try {
        if (construct_cmd->parsed()) return detail::cmd_construct(c, out);
        if (analyze_cmd->parsed()) return detail::cmd_analyze(c, out);
        if (verify_cmd->parsed()) return detail::cmd_verify(c, out);
        if (multiply_cmd->parsed()) return detail::run_job(c, out, "multiply", false);
        return detail::run_job(c, out, "simulate", true);
    } catch (const CertificationError& e) {
        err << "error: " << e.what() << '\n';
        return certification_failure;
    } catch (const DecodeError& e) {
        err << "error: " << e.what() << '\n';
        return infeasible_decode;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    } catch (const nlohmann::json::exception& e) {
        err << "error: bad JSON value: " << e.what() << '\n';
        return config_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }
}

} // namespace udm::cli
