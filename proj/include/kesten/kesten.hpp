// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "kesten/distributions.hpp"
#include "kesten/empirics.hpp"
#include "kesten/errors.hpp"
#include "kesten/inequality.hpp"
#include "kesten/io.hpp"
#include "kesten/numeric.hpp"
#include "kesten/parallel.hpp"
#include "kesten/process.hpp"
#include "kesten/rng.hpp"
#include "kesten/svg.hpp"
#include "kesten/tailstats.hpp"
#include "kesten/theory.hpp"

namespace kesten {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kesten
