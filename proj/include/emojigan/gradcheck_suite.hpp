// Copyright 2026 The emojigan Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace emojigan {

/// One registered finite-difference check. `run` returns the max relative
/// error reported by grad_check.
struct GradCheckCase {
  std::string name;
  std::string precision;  // "f64" or "f32"
  double tolerance = 1e-6;
  std::function<double()> run;
};

struct GradCheckOutcome {
  std::string name;
  std::string precision;
  double max_rel_err = 0;
  double tolerance = 0;
  bool pass = false;
};

/// Every differentiable op in 64-bit (tolerance 1e-6), plus a small
/// generator-into-discriminator composite checked in both 64-bit (1e-6)
/// and 32-bit (1e-3). Inputs are drawn from `seed` and kept away from
/// activation kinks.
std::vector<GradCheckCase> default_gradcheck_cases(std::uint64_t seed = 0);

std::vector<GradCheckOutcome> run_gradcheck_cases(const std::vector<GradCheckCase>& cases);

/// Runs the cases, prints a table (op, precision, max rel. err, tolerance,
/// status) and one "FAIL <op>" line per failure. Returns 0 iff all pass.
int run_gradcheck_suite(const std::vector<GradCheckCase>& cases, std::ostream& out);

}  // namespace emojigan
