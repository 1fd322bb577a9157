// Copyright 2026 The qmetro developers
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

#include <iosfwd>
#include <string>
#include <vector>

namespace qmetro {

// End-to-end validation suite: fourteen numbered criteria covering the
// analytic reference values, the bound ordering and additivity laws, gap
// persistence under copies, the closed-form asymptotics, random-model
// studies, optimizer uniqueness, and the solver norm identities. The CLI
// `verify` command and the acceptance test binary both run this.

enum class AcceptanceLevel { Fast, Full };

struct AcceptanceOptions {
  AcceptanceLevel level = AcceptanceLevel::Fast;
  int jobs = 1;
  // Criterion numbers to run; empty means all.
  std::vector<int> only;
  // Harness self-test: offsets one reference value so the named criterion
  // must fail. Never set outside tests of the harness itself.
  bool perturb_reference = false;
};

struct CriterionResult {
  int number = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // one-line metric summary
  double seconds = 0.0;
};

// Runs the requested criteria in numeric order. Fast level replaces the
// largest two-copy solve (the 16-dimensional entangled-pair study) with its
// single-copy part; everything else is identical at both levels.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

// One line per criterion plus a summary line.
void print_acceptance(const std::vector<CriterionResult>& results,
                      std::ostream& out);

bool acceptance_passed(const std::vector<CriterionResult>& results);

}  // namespace qmetro
