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

#include "qmetro/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qmetro/errors.hpp"

namespace qmetro {

namespace {

using Json = nlohmann::ordered_json;

// Desk-scale guards so a corrupt size field cannot trigger a huge
// allocation before validation gets a chance to run.
constexpr int kMaxFileDim = 512;
constexpr int kMaxFileParams = 64;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

std::string type_name(const Json& j) {
  return j.type_name();  // "object", "array", "number", ...
}

int read_int(const Json& j, const std::string& path, int lo, int hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer, got " + type_name(j));
  const long long v = j.get<long long>();
  if (v < lo || v > hi) {
    std::ostringstream msg;
    msg << "value " << v << " outside [" << lo << ", " << hi << "]";
    fail(path, msg.str());
  }
  return static_cast<int>(v);
}

Complex read_cell(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2)
    fail(path, "expected an [re, im] pair, got " + type_name(j));
  if (!j[0].is_number() || !j[1].is_number())
    fail(path, "expected two numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

Matrix read_matrix(const Json& j, const std::string& path, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    std::ostringstream msg;
    msg << "expected " << d << " rows, got "
        << (j.is_array() ? std::to_string(j.size()) : type_name(j));
    fail(path, msg.str());
  }
  Matrix m(d, d);
  for (int r = 0; r < d; ++r) {
    const Json& row = j[r];
    std::ostringstream rp;
    rp << path << "[" << r << "]";
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      std::ostringstream msg;
      msg << "expected " << d << " cells, got "
          << (row.is_array() ? std::to_string(row.size()) : type_name(row));
      fail(rp.str(), msg.str());
    }
    for (int c = 0; c < d; ++c) {
      std::ostringstream cp;
      cp << rp.str() << "[" << c << "]";
      m(r, c) = read_cell(row[c], cp.str());
    }
  }
  return m;
}

Json write_matrix(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::pair<int, int> line_column(const std::string& text, std::size_t index) {
  int line = 1;
  int col = 1;
  const std::size_t stop = std::min(index, text.size());
  for (std::size_t i = 0; i < stop; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

StatisticalModel model_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("top level: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "d" && key != "n" && key != "S" && key != "derivs" &&
        key != "label") {
      throw ParseError("unknown key \"" + key + "\"");
    }
  }
  for (const char* key : {"d", "n", "S", "derivs"}) {
    if (!j.contains(key))
      throw ParseError(std::string("missing key \"") + key + "\"");
  }
  const int d = read_int(j["d"], "d", 1, kMaxFileDim);
  const int n = read_int(j["n"], "n", 1, kMaxFileParams);
  const Matrix state = read_matrix(j["S"], "S", d);
  const Json& dv = j["derivs"];
  if (!dv.is_array() || static_cast<int>(dv.size()) != n) {
    std::ostringstream msg;
    msg << "derivs: expected " << n << " matrices, got "
        << (dv.is_array() ? std::to_string(dv.size()) : type_name(dv));
    throw ParseError(msg.str());
  }
  std::vector<Matrix> derivs;
  derivs.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::ostringstream path;
    path << "derivs[" << i << "]";
    derivs.push_back(read_matrix(dv[i], path.str(), d));
  }
  std::string label;
  if (j.contains("label")) {
    if (!j["label"].is_string())
      throw ParseError("label: expected a string, got " +
                       type_name(j["label"]));
    label = j["label"].get<std::string>();
  }
  return StatisticalModel(state, std::move(derivs), std::move(label));
}

}  // namespace

StatisticalModel read_model_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream msg;
    msg << "syntax error at line " << line << ", column " << col;
    throw ParseError(msg.str());
  }
  return model_from_json(j);
}

StatisticalModel read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return read_model_json(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_model_json(const StatisticalModel& m) {
  Json j;
  j["d"] = m.dim();
  j["n"] = m.params();
  j["S"] = write_matrix(m.state());
  Json dv = Json::array();
  for (const Matrix& deriv : m.derivs()) dv.push_back(write_matrix(deriv));
  j["derivs"] = std::move(dv);
  j["label"] = m.label();
  return j.dump();
}

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace qmetro
