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

#ifndef QMETRO_CLI_HPP_
#define QMETRO_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace qmetro {

// Entry point of the qmetro tool, callable in process for testing. args is
// argv[1..] in order. Results go to out, diagnostics to err.
//
// Exit codes: 0 on success, 1 on usage or input errors (bad flags, malformed
// model files, domain violations, arity mismatches), 2 when the computation
// ran but a solve degraded (non-optimal solver status, numerical failure);
// partial results are still written in that case.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace qmetro

#endif  // QMETRO_CLI_HPP_
