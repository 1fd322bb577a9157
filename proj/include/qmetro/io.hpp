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

#include <string>

#include "qmetro/model.hpp"

namespace qmetro {

// Model file format:
//
//   {"d": 2, "n": 2, "S": [[[re, im], ...], ...], "derivs": [...],
//    "label": "..."}
//
// Matrices are row-major nested arrays of [re, im] pairs; "derivs" holds n
// matrices of the same shape as "S"; "label" is optional. Unknown keys are
// rejected so typos surface instead of being ignored.

// Parses and validates a model. Throws ParseError naming the offending
// field, or the model constructor's own error if the data is structurally
// sound JSON but not a valid model.
StatisticalModel read_model_json(const std::string& text);

// read_model_json plus file access; syntax errors carry line and column.
StatisticalModel read_model_file(const std::string& path);

// Serializes a model so that read_model_json returns it bit-exactly.
std::string write_model_json(const StatisticalModel& m);

// Shortest decimal form that keeps 12 significant digits, for CSV cells.
std::string csv_double(double v);

}  // namespace qmetro
