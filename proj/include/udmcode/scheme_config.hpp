// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "schemes.hpp"

namespace udm {

enum class Construction {
    rs_real,
    udm_real,
    udm_real_with_gstar,
    rs_ff,
    udm_ff,
    rs_companion,
    udm_companion,
    rs_natural_embed,
    udm_natural_embed,
    udm_random_real,
};

inline constexpr std::pair<Construction, std::string_view> kConstructionNames[] = {
    {Construction::rs_real, "rs-real"},
    {Construction::udm_real, "udm-real"},
    {Construction::udm_real_with_gstar, "udm-real-with-gstar"},
    {Construction::rs_ff, "rs-ff"},
    {Construction::udm_ff, "udm-ff"},
    {Construction::rs_companion, "rs-companion"},
    {Construction::udm_companion, "udm-companion"},
    {Construction::rs_natural_embed, "rs-natural-embed"},
    {Construction::udm_natural_embed, "udm-natural-embed"},
    {Construction::udm_random_real, "udm-random-real"},
};

inline std::string_view to_string(Construction c) {
    for (const auto& [k, name] : kConstructionNames)
        if (k == c) return name;
    return "?";
}

inline Construction construction_from_string(std::string_view s) {
    for (const auto& [k, name] : kConstructionNames)
        if (name == s) return k;
    throw ConfigError("unknown construction '" + std::string(s) + "'");
}

enum class BetaSource { automatic, equispaced, powers_of_alpha, explicit_list, seeded_random };

inline std::string_view to_string(BetaSource b) {
    switch (b) {
    case BetaSource::automatic: return "default";
    case BetaSource::equispaced: return "equispaced";
    case BetaSource::powers_of_alpha: return "powers-of-alpha";
    case BetaSource::explicit_list: return "explicit";
    case BetaSource::seeded_random: return "seeded-random";
    }
    return "?";
}

inline BetaSource beta_source_from_string(std::string_view s) {
    if (s == "default") return BetaSource::automatic;
    if (s == "equispaced") return BetaSource::equispaced;
    if (s == "powers-of-alpha") return BetaSource::powers_of_alpha;
    if (s == "explicit") return BetaSource::explicit_list;
    if (s == "seeded-random") return BetaSource::seeded_random;
    throw ConfigError("unknown beta_source '" + std::string(s) + "'");
}

inline bool is_real_construction(Construction c) {
    return c == Construction::rs_real || c == Construction::udm_real || c == Construction::udm_real_with_gstar ||
           c == Construction::udm_random_real;
}

inline bool is_rs(Construction c) {
    return c == Construction::rs_real || c == Construction::rs_ff || c == Construction::rs_companion ||
           c == Construction::rs_natural_embed;
}

/// Parameters of one scheme. Δ and ℓ are the pre-embedding sizes; companion embeddings
/// multiply both (and s) by the extension degree.
struct SchemeConfig {
    Construction construction = Construction::rs_real;
    std::size_t workers = 0;
    std::size_t delta = 0;
    std::size_t ell = 0;
    std::optional<std::size_t> s;
    std::optional<std::string> gamma;
    std::optional<std::string> field;
    BetaSource beta_source = BetaSource::automatic;
    nlohmann::json betas; // explicit list
    std::uint64_t seed = 0;
    double interval_lo = -1.0;
    double interval_hi = 1.0;
    unsigned max_retries = 16;
};

/// Exact rational from "p/q", a decimal string, or an integer string.
inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    auto bad = [&] { return ConfigError("cannot parse '" + s + "' as a rational number"); };
    if (s.empty()) throw bad();
    // cpp_int reads "0x.." as hex and a leading zero as octal, so only plain decimal digits get through
    auto decimal = [&](std::string t) {
        const bool minus = !t.empty() && t.front() == '-';
        if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.erase(0, 1);
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) throw bad();
        t.erase(0, std::min(t.find_first_not_of('0'), t.size() - 1));
        BigInt v(t);
        return minus ? BigInt(-v) : v;
    };
    try {
        if (auto slash = s.find('/'); slash != std::string::npos) {
            const BigInt den = decimal(s.substr(slash + 1));
            if (den == 0) throw bad();
            return Rational(decimal(s.substr(0, slash)), den);
        }
        if (s.find_first_of("eE") != std::string::npos) return rational_from_double(std::stod(s));
        const bool neg = s.front() == '-';
        std::string body = (neg || s.front() == '+') ? s.substr(1) : s;
        const auto dot = body.find('.');
        std::string digits = body;
        std::size_t scale = 0;
        if (dot != std::string::npos) {
            digits = body.substr(0, dot) + body.substr(dot + 1);
            scale = body.size() - dot - 1;
        }
        BigInt den = 1;
        for (std::size_t t = 0; t < scale; ++t) den *= 10;
        Rational r(decimal(digits), den);
        return neg ? Rational(-r) : r;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw bad();
    }
}

inline SchemeConfig scheme_config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {"construction", "N",    "delta", "ell",      "s",        "gamma",
                                                   "field",        "beta_source", "betas", "seed", "interval", "max_retries"};
    if (!j.is_object()) throw ConfigError("scheme config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown scheme config key '" + key + "'");
    auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw ConfigError(std::string("scheme config is missing '") + key + "'");
        return j.at(key);
    };
    auto positive = [&](const char* key) {
        const auto& v = need(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
            throw ConfigError(std::string("'") + key + "' must be a positive integer");
        return static_cast<std::size_t>(v.get<std::uint64_t>());
    };
    SchemeConfig c;
    c.construction = construction_from_string(need("construction").get<std::string>());
    c.workers = positive("N");
    c.delta = positive("delta");
    c.ell = positive("ell");
    if (j.contains("s")) c.s = positive("s");
    if (j.contains("gamma")) c.gamma = j["gamma"].is_string() ? j["gamma"].get<std::string>() : j["gamma"].dump();
    if (j.contains("field")) c.field = j["field"].get<std::string>();
    if (j.contains("beta_source")) c.beta_source = beta_source_from_string(j["beta_source"].get<std::string>());
    if (j.contains("betas")) {
        c.betas = j["betas"];
        if (!c.betas.is_array()) throw ConfigError("'betas' must be an array");
        if (!j.contains("beta_source")) c.beta_source = BetaSource::explicit_list;
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("interval")) {
        const auto& iv = j["interval"];
        if (!iv.is_array() || iv.size() != 2) throw ConfigError("'interval' must be [lo, hi]");
        c.interval_lo = iv[0].get<double>();
        c.interval_hi = iv[1].get<double>();
        if (!(c.interval_lo < c.interval_hi)) throw ConfigError("'interval' must satisfy lo < hi");
    }
    if (j.contains("max_retries")) c.max_retries = j["max_retries"].get<unsigned>();
    return c;
}

inline nlohmann::json to_json(const SchemeConfig& c) {
    nlohmann::json j;
    j["construction"] = std::string(to_string(c.construction));
    j["N"] = c.workers;
    j["delta"] = c.delta;
    j["ell"] = c.ell;
    if (c.s) j["s"] = *c.s;
    if (c.gamma) j["gamma"] = *c.gamma;
    if (c.field) j["field"] = *c.field;
    j["beta_source"] = std::string(to_string(c.beta_source));
    if (!c.betas.is_null()) j["betas"] = c.betas;
    j["seed"] = c.seed;
    j["interval"] = {c.interval_lo, c.interval_hi};
    j["max_retries"] = c.max_retries;
    return j;
}

namespace detail {

inline std::uint32_t least_prime_at_least(std::uint32_t v) {
    while (!is_prime(v)) ++v;
    return v;
}

inline std::vector<Rational> explicit_real_betas(const nlohmann::json& list) {
    std::vector<Rational> out;
    for (const auto& b : list) {
        if (b.is_string()) out.push_back(parse_rational(b.get<std::string>()));
        else if (b.is_number_integer()) out.emplace_back(b.get<std::int64_t>());
        else if (b.is_number()) out.push_back(rational_from_double(b.get<double>()));
        else throw ConfigError("real evaluation points must be numbers or rational strings");
    }
    return out;
}

inline GfElement parse_field_element(const GfContext& ctx, const nlohmann::json& b) {
    if (b.is_array()) return ctx.from_coeffs(b.get<std::vector<std::uint32_t>>());
    if (b.is_number_unsigned() && ctx.is_prime_field()) return ctx.from_int(b.get<std::int64_t>());
    if (b.is_string()) {
        const auto s = b.get<std::string>();
        for (std::string_view prefix : {"a^", "alpha^"})
            if (s.rfind(prefix, 0) == 0) return ctx.alpha_pow(std::stoull(s.substr(prefix.size())));
        if (s == "0") return ctx.zero();
        if (s == "1") return ctx.one();
        if (s == "a" || s == "alpha") return ctx.alpha();
    }
    throw ConfigError("field elements must be coefficient arrays, 'a^k' strings, or integers for prime fields");
}

inline std::vector<Rational> random_real_betas(std::size_t count, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<Rational> out;
    std::set<double> seen;
    while (out.size() < count) {
        const double v = dist(rng);
        if (seen.insert(v).second) out.push_back(rational_from_double(v));
    }
    return out;
}

inline std::vector<GfElement> random_field_betas(const GfContext& ctx, std::size_t count, std::uint64_t seed) {
    if (count > ctx.order() - 1) throw ConfigError("not enough nonzero field elements");
    std::vector<std::uint32_t> idx(ctx.order() - 1);
    std::iota(idx.begin(), idx.end(), 1U);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<GfElement> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(ctx.from_packed(idx[k]));
    return out;
}

} // namespace detail

/// Draws N distinct β uniformly from [lo, hi), builds the real UDM collection and
/// certifies strong full rank over every pattern (exact rational arithmetic, inclusive
/// full-mode space). Draws again on failure, up to `max_retries` attempts.
inline GeneratorCollection make_udm_random_real(std::size_t n, std::size_t delta, std::size_t ell, std::uint64_t seed,
                                                double lo = -1.0, double hi = 1.0, unsigned max_retries = 16) {
    std::mt19937_64 rng(seed);
    std::optional<Pattern> last_failure;
    for (unsigned attempt = 0; attempt < std::max(1U, max_retries); ++attempt) {
        auto betas = detail::random_real_betas(n, rng, lo, hi);
        auto coll = make_udm_real(n, delta, ell, betas, false, "seeded-random");
        CertifyOptions opt;
        opt.mode = EnumerationMode::full;
        const auto verdict = certify_full_rank(coll, opt);
        if (verdict.passed) {
            Provenance prov = coll.provenance();
            prov.construction = "udm-random-real";
            prov.seed = seed;
            prov.note = "certified after " + std::to_string(attempt + 1) + " draw(s)";
            return GeneratorCollection::real(coll.rational_matrices(), 1, std::move(prov));
        }
        last_failure = verdict.failing;
    }
    throw CertificationError("udm-random-real: no certified draw after " + std::to_string(max_retries) +
                             " attempts; last failing pattern " + (last_failure ? last_failure->to_string() : "?"));
}

/// Builds the collection a config describes, filling in default fields and β.
inline GeneratorCollection construct(const SchemeConfig& c) {
    const std::size_t n = c.workers;
    if (c.gamma) {
        const Rational g = parse_rational(*c.gamma);
        if (g != Rational(static_cast<long long>(c.ell), static_cast<long long>(c.delta)))
            throw ConfigError("gamma=" + *c.gamma + " does not equal ell/delta=" + std::to_string(c.ell) + "/" +
                              std::to_string(c.delta));
    }
    const bool real = is_real_construction(c.construction);
    if (real && c.field) throw ConfigError("construction " + std::string(to_string(c.construction)) + " does not take a field");
    if (real && c.beta_source == BetaSource::powers_of_alpha)
        throw ConfigError("powers-of-alpha evaluation points need a finite-field construction");
    if (!real && c.beta_source == BetaSource::equispaced)
        throw ConfigError("equispaced evaluation points need a real construction");

    auto check_s = [&](const GeneratorCollection& coll) {
        if (c.s && *c.s != coll.block_size())
            throw ConfigError("s=" + std::to_string(*c.s) + " does not match the construction's block size " +
                              std::to_string(coll.block_size()));
        return coll;
    };

    if (real) {
        const bool rs = c.construction == Construction::rs_real;
        const bool gstar = c.construction == Construction::udm_real_with_gstar;
        const std::size_t count = rs ? n * c.ell : (gstar ? n - 1 : n);
        if (c.construction == Construction::udm_random_real) {
            if (c.beta_source != BetaSource::automatic && c.beta_source != BetaSource::seeded_random)
                throw ConfigError("udm-random-real always draws seeded random points");
            return check_s(make_udm_random_real(n, c.delta, c.ell, c.seed, c.interval_lo, c.interval_hi, c.max_retries));
        }
        std::vector<Rational> betas;
        std::string source;
        switch (c.beta_source) {
        case BetaSource::automatic:
        case BetaSource::equispaced:
            betas = equispaced_points(count, rational_from_double(c.interval_lo), rational_from_double(c.interval_hi));
            source = "equispaced";
            break;
        case BetaSource::explicit_list:
            betas = detail::explicit_real_betas(c.betas);
            source = "explicit";
            break;
        case BetaSource::seeded_random: {
            std::mt19937_64 rng(c.seed);
            betas = detail::random_real_betas(count, rng, c.interval_lo, c.interval_hi);
            source = "seeded-random";
            break;
        }
        default: break;
        }
        auto coll = rs ? make_rs_real(n, c.delta, c.ell, betas, source)
                       : make_udm_real(n, c.delta, c.ell, betas, gstar, source);
        if (c.beta_source == BetaSource::seeded_random) {
            Provenance prov = coll.provenance();
            prov.seed = c.seed;
            coll = GeneratorCollection::real(coll.rational_matrices(), 1, std::move(prov));
        }
        return check_s(coll);
    }

    const bool rs = is_rs(c.construction);
    const std::size_t count = rs ? n * c.ell : n;
    const bool natural = c.construction == Construction::rs_natural_embed || c.construction == Construction::udm_natural_embed;
    const bool companion = c.construction == Construction::rs_companion || c.construction == Construction::udm_companion;

    std::optional<GfContext> ctx;
    if (c.field) ctx = GfContext::parse(*c.field);
    else if (companion) throw ConfigError("companion constructions need an explicit extension field, e.g. \"2^3\"");
    else ctx = GfContext::builtin(detail::least_prime_at_least(static_cast<std::uint32_t>(count + 1)), 1);
    if (natural && !ctx->is_prime_field())
        throw ConfigError("natural embedding needs a prime field, got " + ctx->spec_string());

    std::vector<GfElement> betas;
    std::string source;
    switch (c.beta_source) {
    case BetaSource::automatic:
    case BetaSource::powers_of_alpha:
        if (count > ctx->order() - 1)
            throw ConfigError("field too small: " + std::string(rs ? "the RS construction requires p^n >= N*ell+1"
                                                                   : "the UDM construction requires p^n >= N+1") +
                              " (" + std::to_string(ctx->order()) + " < " + std::to_string(count + 1) + ")");
        betas = alpha_powers(*ctx, count);
        source = "powers-of-alpha";
        break;
    case BetaSource::explicit_list:
        for (const auto& b : c.betas) betas.push_back(detail::parse_field_element(*ctx, b));
        source = "explicit";
        break;
    case BetaSource::seeded_random:
        betas = detail::random_field_betas(*ctx, count, c.seed);
        source = "seeded-random";
        break;
    default: break;
    }
    auto base = rs ? make_rs_ff(*ctx, n, c.delta, c.ell, betas, source) : make_udm_ff(*ctx, n, c.delta, c.ell, betas, source);
    if (c.beta_source == BetaSource::seeded_random) {
        Provenance prov = base.provenance();
        prov.seed = c.seed;
        base = GeneratorCollection::over_field(*ctx, base.field_matrices(), std::move(prov));
    }
    if (companion) return check_s(embed_companion(base));
    if (natural) return check_s(embed_natural(base));
    return check_s(base);
}

} // namespace udm
