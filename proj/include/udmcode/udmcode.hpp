// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "analysis.hpp"
#include "coding.hpp"
#include "companion.hpp"
#include "error.hpp"
#include "exact_rank.hpp"
#include "gf.hpp"
#include "io.hpp"
#include "matrix.hpp"
#include "scheme_config.hpp"
#include "schemes.hpp"
#include "tables.hpp"
