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

#include <stdexcept>
#include <string>

namespace qmetro {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument values: bad dimensions, out-of-domain parameters, malformed input.
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(what) {}
};

// Matrix expected to be positive semidefinite is not (beyond the rank tolerance).
struct NotPsdError : Error {
  explicit NotPsdError(const std::string& what) : Error(what) {}
};

// A tensor construction would exceed the configured dimension cap.
struct SizeLimitError : Error {
  explicit SizeLimitError(const std::string& what) : Error(what) {}
};

// SLD Fisher information matrix is numerically singular.
struct SingularFisherError : Error {
  explicit SingularFisherError(const std::string& what) : Error(what) {}
};

// Model violates a structural requirement (derivative leaking into the
// kernel-kernel block, dependent derivatives, trace defects, ...).
struct ModelInconsistentError : Error {
  explicit ModelInconsistentError(const std::string& what) : Error(what) {}
};

// Operation defined only for a specific number of parameters (e.g. Nagaoka, n = 2).
struct WrongArityError : Error {
  explicit WrongArityError(const std::string& what) : Error(what) {}
};

// State (or a tensor factor of it) is singular where full rank is required.
struct SingularStateError : Error {
  explicit SingularStateError(const std::string& what) : Error(what) {}
};

// Numerical routine failed beyond recovery (eigensolver breakdown, ...).
struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(what) {}
};

// Text that cannot be parsed into the requested structure; the message names
// the offending field (or line/column for syntax problems).
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace qmetro
