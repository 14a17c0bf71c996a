// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "scheme_config.hpp"

namespace udm {

struct TableRow {
    std::string label;
    SchemeConfig config;
};

namespace detail {

inline SchemeConfig table_config(Construction c, std::size_t n, std::size_t delta, std::size_t ell, const char* field = nullptr) {
    SchemeConfig cfg;
    cfg.construction = c;
    cfg.workers = n;
    cfg.delta = delta;
    cfg.ell = ell;
    if (field) cfg.field = field;
    return cfg;
}

} // namespace detail

/// N=6, γ=3/4, Q_b=4 comparison (eight rows, default β).
inline std::vector<TableRow> comparison_table_small() {
    using C = Construction;
    using detail::table_config;
    return {
        {"RS based scheme", table_config(C::rs_real, 6, 4, 3)},
        {"RS + Companion Matrix of GF(2^5)", table_config(C::rs_companion, 6, 4, 3, "2^5")},
        {"RS + Embedding from GF(19)", table_config(C::rs_natural_embed, 6, 4, 3)},
        {"RS + Companion Matrix of GF(3^3)", table_config(C::rs_companion, 6, 4, 3, "3^3")},
        {"UDM-based scheme", table_config(C::udm_real, 6, 4, 3)},
        {"UDM + Embedding from GF(7)", table_config(C::udm_natural_embed, 6, 4, 3)},
        {"UDM + Companion Matrix of GF(2^3)", table_config(C::udm_companion, 6, 4, 3, "2^3")},
        {"UDM + Companion Matrix of GF(3^2)", table_config(C::udm_companion, 6, 4, 3, "3^2")},
    };
}

/// N=15, γ=1/2, Q_b=4 comparison of extension fields (six rows).
inline std::vector<TableRow> comparison_table_fields() {
    using C = Construction;
    using detail::table_config;
    return {
        {"RS + Companion Matrix GF(2^5)", table_config(C::rs_companion, 15, 4, 2, "2^5")},
        {"RS + Companion Matrix GF(5^3)", table_config(C::rs_companion, 15, 4, 2, "5^3")},
        {"RS + Companion Matrix GF(3^4)", table_config(C::rs_companion, 15, 4, 2, "3^4")},
        {"UDM + Companion Matrix GF(2^4)", table_config(C::udm_companion, 15, 4, 2, "2^4")},
        {"UDM + Companion Matrix GF(5^2)", table_config(C::udm_companion, 15, 4, 2, "5^2")},
        {"UDM + Companion Matrix GF(3^3)", table_config(C::udm_companion, 15, 4, 2, "3^3")},
    };
}

inline std::vector<TableRow> comparison_table(int which) {
    if (which == 1) return comparison_table_small();
    if (which == 2) return comparison_table_fields();
    throw ConfigError("unknown table " + std::to_string(which) + "; choose 1 or 2");
}

} // namespace udm
