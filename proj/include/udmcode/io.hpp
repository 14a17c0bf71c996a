// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "coding.hpp"
#include "scheme_config.hpp"
#include "schemes.hpp"

namespace udm {

using nlohmann::json;

/// 64-bit FNV-1a of a string, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json number_or_string(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline json field_json(const GfContext& ctx) {
    return {{"spec", ctx.spec_string()}, {"p", ctx.p()}, {"n", ctx.n()}, {"pi", ctx.pi()}, {"polynomial", ctx.polynomial_string()}};
}

inline json collection_meta(const GeneratorCollection& c) {
    const auto& prov = c.provenance();
    json meta;
    meta["construction"] = prov.construction;
    meta["domain"] = std::string(to_string(c.domain()));
    meta["N"] = c.workers();
    meta["delta"] = c.delta();
    meta["ell"] = c.ell();
    meta["s"] = c.block_size();
    meta["Q_b"] = c.q_b();
    meta["gamma"] = rational_string(Rational(static_cast<long long>(c.ell()), static_cast<long long>(c.delta())));
    meta["density"] = c.density();
    if (c.field()) meta["field"] = field_json(*c.field());
    else if (!prov.field.empty()) meta["field"] = {{"spec", prov.field}};
    meta["beta_source"] = prov.beta_source;
    meta["betas"] = prov.betas;
    if (prov.seed) meta["seed"] = *prov.seed;
    if (!prov.note.empty()) meta["note"] = prov.note;
    return meta;
}

/// {meta, matrices}: row-major arrays; field elements as coefficient arrays; real
/// collections also carry their exact rational entries.
inline json to_json(const GeneratorCollection& c) {
    json j;
    j["meta"] = collection_meta(c);
    json mats = json::array();
    switch (c.domain()) {
    case Domain::real: {
        json exact = json::array();
        for (const auto& m : c.rational_matrices()) {
            json rows = json::array();
            json erows = json::array();
            for (std::size_t i = 0; i < m.rows(); ++i) {
                json row = json::array();
                json erow = json::array();
                for (const auto& v : m.row(i)) {
                    row.push_back(v.convert_to<double>());
                    erow.push_back(rational_string(v));
                }
                rows.push_back(std::move(row));
                erows.push_back(std::move(erow));
            }
            mats.push_back(std::move(rows));
            exact.push_back(std::move(erows));
        }
        j["matrices"] = std::move(mats);
        j["exact_matrices"] = std::move(exact);
        break;
    }
    case Domain::integer_lift:
        for (const auto& m : c.integer_matrices()) {
            json rows = json::array();
            for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(std::vector<std::int64_t>(m.row(i).begin(), m.row(i).end()));
            mats.push_back(std::move(rows));
        }
        j["matrices"] = std::move(mats);
        break;
    default: {
        const GfContext& ctx = *c.field();
        for (const auto& m : c.field_matrices()) {
            json rows = json::array();
            for (std::size_t i = 0; i < m.rows(); ++i) {
                json row = json::array();
                for (auto e : m.row(i)) row.push_back(ctx.coeffs(e));
                rows.push_back(std::move(row));
            }
            mats.push_back(std::move(rows));
        }
        j["matrices"] = std::move(mats);
    }
    }
    return j;
}

inline GeneratorCollection collection_from_json(const json& j) {
    if (!j.contains("meta") || !j.contains("matrices")) throw ConfigError("collection JSON needs 'meta' and 'matrices'");
    const json& meta = j.at("meta");
    const Domain domain = domain_from_string(meta.at("domain").get<std::string>());
    Provenance prov;
    prov.construction = meta.value("construction", "loaded");
    prov.beta_source = meta.value("beta_source", "");
    if (meta.contains("betas")) prov.betas = meta["betas"].get<std::vector<std::string>>();
    if (meta.contains("seed")) prov.seed = meta["seed"].get<std::uint64_t>();
    prov.note = meta.value("note", "");
    const std::size_t s = meta.value("s", std::size_t{1});
    auto shape_of = [](const json& m) {
        if (!m.is_array() || m.empty() || !m[0].is_array()) throw ConfigError("matrices must be non-empty arrays of rows");
        return std::make_pair(m.size(), m[0].size());
    };
    switch (domain) {
    case Domain::real: {
        std::vector<Matrix<Rational>> ms;
        const bool exact = j.contains("exact_matrices");
        for (const auto& m : exact ? j["exact_matrices"] : j["matrices"]) {
            auto [r, c] = shape_of(m);
            Matrix<Rational> g(r, c);
            for (std::size_t i = 0; i < r; ++i) {
                if (m[i].size() != c) throw ConfigError("ragged matrix row");
                for (std::size_t k = 0; k < c; ++k)
                    g(i, k) = exact ? parse_rational(m[i][k].get<std::string>()) : rational_from_double(m[i][k].get<double>());
            }
            ms.push_back(std::move(g));
        }
        return GeneratorCollection::real(std::move(ms), s, std::move(prov));
    }
    case Domain::integer_lift: {
        std::vector<IntMatrix> ms;
        for (const auto& m : j["matrices"]) {
            auto [r, c] = shape_of(m);
            IntMatrix g(r, c);
            for (std::size_t i = 0; i < r; ++i) {
                if (m[i].size() != c) throw ConfigError("ragged matrix row");
                for (std::size_t k = 0; k < c; ++k) g(i, k) = m[i][k].get<std::int64_t>();
            }
            ms.push_back(std::move(g));
        }
        if (meta.contains("field")) prov.field = meta["field"].value("spec", "");
        return GeneratorCollection::integer(std::move(ms), s, std::move(prov));
    }
    default: {
        const GfContext ctx = GfContext::parse(meta.at("field").at("spec").get<std::string>());
        prov.field = ctx.spec_string();
        std::vector<Matrix<GfElement>> ms;
        for (const auto& m : j["matrices"]) {
            auto [r, c] = shape_of(m);
            Matrix<GfElement> g(r, c);
            for (std::size_t i = 0; i < r; ++i) {
                if (m[i].size() != c) throw ConfigError("ragged matrix row");
                for (std::size_t k = 0; k < c; ++k) g(i, k) = ctx.from_coeffs(m[i][k].get<std::vector<std::uint32_t>>());
            }
            ms.push_back(std::move(g));
        }
        auto coll = GeneratorCollection::over_field(ctx, std::move(ms), std::move(prov));
        return s == 1 ? coll : coll.with_block_size(s);
    }
    }
}

inline json to_json(const Pattern& p) { return p.v; }

inline json to_json(const CertificationVerdict& v) {
    json j;
    j["passed"] = v.passed;
    j["method"] = v.method;
    j["patterns_checked"] = v.patterns_checked;
    j["failing_pattern"] = v.failing ? to_json(*v.failing) : json(nullptr);
    return j;
}

inline json to_json(const AnalysisReport& r) {
    json j;
    j["scheme"] = r.scheme;
    j["domain"] = std::string(to_string(r.domain));
    j["field"] = r.field;
    j["beta_source"] = r.beta_source;
    j["betas"] = r.betas;
    j["N"] = r.workers;
    j["delta"] = r.delta;
    j["ell"] = r.ell;
    j["s"] = r.block_size;
    j["Q_b"] = r.q_b;
    j["mode"] = std::string(to_string(r.mode));
    j["pattern_bound"] = std::string(to_string(r.bound));
    j["pattern_count"] = r.pattern_count;
    j["certification"] = r.verdict ? to_json(*r.verdict) : json(nullptr);
    j["max_condition_number"] = r.max_kappa ? number_or_string(*r.max_kappa) : json(nullptr);
    j["avg_condition_number"] = r.avg_kappa ? number_or_string(*r.avg_kappa) : json(nullptr);
    j["infinite_condition_count"] = r.infinite_count;
    j["density"] = r.density;
    j["worst_case_load"] = r.worst_case_load;
    return j;
}

inline json to_json(const WorkerTrace& t, bool include_products = false) {
    json j;
    j["schedule"] = t.schedule;
    j["computed"] = t.computed;
    j["returned_columns"] = t.returned;
    j["pattern"] = to_json(t.pattern);
    j["total_products"] = t.total_products;
    json em = json::array();
    for (const auto& e : t.emissions)
        em.push_back({{"worker", e.worker}, {"first_column", e.first_column}, {"count", e.count}, {"time", e.time}});
    j["emissions"] = std::move(em);
    if (include_products) {
        json prods = json::array();
        for (const auto& w : t.results) {
            json list = json::array();
            for (const auto& v : w) list.push_back(std::vector<double>(v.data(), v.data() + v.size()));
            prods.push_back(std::move(list));
        }
        j["products"] = std::move(prods);
    }
    if (t.decoded) {
        j["decode"] = {{"pattern", to_json(t.decoded->pattern)},
                       {"residual", number_or_string(t.decoded->residual)},
                       {"condition_number", number_or_string(t.decoded->kappa)}};
    }
    return j;
}

/// κ with two significant figures: "5.0e+03" from 1000 up, "310", "23", "1.2" below.
inline std::string two_significant(double v) {
    if (std::isinf(v)) return "inf";
    if (std::isnan(v)) return "-";
    char buf[32];
    // round once in scientific form so carries (999.6, 9.96) land on the right exponent
    std::snprintf(buf, sizeof buf, "%.1e", v);
    const double rounded = std::strtod(buf, nullptr);
    if (std::fabs(rounded) >= 1000.0) return buf;
    if (rounded == 0.0) return "0";
    const int decimals = std::max(0, 1 - static_cast<int>(std::floor(std::log10(std::fabs(rounded)))));
    std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
    return buf;
}

/// Aligned text table with the columns Scheme, Δ, ℓ, s, Max Cond, Avg Cond, Density.
/// `labels[i]` overrides the scheme name of `reports[i]` when non-empty.
inline std::string format_table(const std::vector<AnalysisReport>& reports, const std::vector<std::string>& labels = {}) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Scheme", "Delta", "ell", "s", "Max Cond", "Avg Cond", "Density"});
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        std::string name = i < labels.size() && !labels[i].empty() ? labels[i] : r.scheme;
        char dens[16];
        std::snprintf(dens, sizeof dens, "%.0f%%", 100.0 * r.density);
        rows.push_back({name, std::to_string(r.delta), std::to_string(r.ell), r.block_size == 1 ? "" : std::to_string(r.block_size),
                        r.max_kappa ? two_significant(*r.max_kappa) : "-", r.avg_kappa ? two_significant(*r.avg_kappa) : "-",
                        dens});
    }
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c) out << "  ";
            if (c == 0) out << std::left << std::setw(static_cast<int>(width[c])) << rows[r][c];
            else out << std::right << std::setw(static_cast<int>(width[c])) << rows[r][c];
        }
        out << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
        }
    }
    return out.str();
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse '" + s + "' as a number");
    }
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return in;
}

inline bool skip_line(const std::string& line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string::npos || line[first] == '#' || line[first] == '%';
}

} // namespace detail

/// Dense matrix from CSV (comma or whitespace separated); '#' lines are comments.
inline DenseMatrix read_dense_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skip_line(line)) continue;
        std::vector<double> row;
        for (const auto& f : detail::split_fields(line)) row.push_back(detail::parse_double(f, path + ":" + std::to_string(lineno)));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": row has " + std::to_string(row.size()) + " values, expected " +
                              std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": no matrix rows");
    DenseMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

/// Sparse matrix from "row col value" lines (0-based). An optional leading line with
/// two integers "rows cols" fixes the shape; otherwise it is inferred from the largest index.
inline SparseMatrix read_triplets(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::Index rows = 0, cols = 0;
    bool fixed = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skip_line(line)) continue;
        const auto f = detail::split_fields(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (f.size() == 2 && entries.empty() && !fixed) {
            rows = static_cast<Eigen::Index>(detail::parse_double(f[0], where));
            cols = static_cast<Eigen::Index>(detail::parse_double(f[1], where));
            fixed = true;
            continue;
        }
        if (f.size() != 3) throw ConfigError(where + ": expected 'row col value'");
        const auto r = static_cast<Eigen::Index>(detail::parse_double(f[0], where));
        const auto c = static_cast<Eigen::Index>(detail::parse_double(f[1], where));
        if (r < 0 || c < 0) throw ConfigError(where + ": negative index");
        if (fixed && (r >= rows || c >= cols)) throw ConfigError(where + ": index outside the declared shape");
        entries.emplace_back(r, c, detail::parse_double(f[2], where));
        if (!fixed) {
            rows = std::max(rows, r + 1);
            cols = std::max(cols, c + 1);
        }
    }
    if (rows == 0 || cols == 0) throw ConfigError(path + ": empty sparse matrix");
    SparseMatrix m(rows, cols);
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
}

/// One value per line.
inline Eigen::VectorXd read_vector(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skip_line(line)) continue;
        const auto f = detail::split_fields(line);
        if (f.size() != 1) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected one value per line");
        values.push_back(detail::parse_double(f[0], path + ":" + std::to_string(lineno)));
    }
    if (values.empty()) throw ConfigError(path + ": empty vector");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

inline std::string vector_text(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += format_double(v(i)) + "\n";
    return out;
}

/// Per-worker CSV of one generator matrix; field entries are written as "1+a^2" strings.
inline std::string worker_csv(const GeneratorCollection& c, std::size_t k) {
    std::ostringstream out;
    auto emit = [&](std::size_t rows, std::size_t cols, auto&& cell) {
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) out << (j ? "," : "") << cell(i, j);
            out << '\n';
        }
    };
    switch (c.domain()) {
    case Domain::real: emit(c.delta(), c.ell(), [&](std::size_t i, std::size_t j) { return format_double(c.numeric_matrices()[k](i, j)); }); break;
    case Domain::integer_lift: emit(c.delta(), c.ell(), [&](std::size_t i, std::size_t j) { return std::to_string(c.integer_matrices()[k](i, j)); }); break;
    default: emit(c.delta(), c.ell(), [&](std::size_t i, std::size_t j) { return c.field()->to_string(c.field_matrices()[k](i, j)); });
    }
    return out.str();
}

} // namespace udm
