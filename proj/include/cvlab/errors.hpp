// Copyright 2026 The cvlab Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvlab {

/// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Input lies outside the mathematical domain of an operation
/// (non-Hermitian where Hermitian is required, negative under a square
/// root, g outside a family's validity range, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A measurement model violates its own invariants, e.g. incompleteness.
class ModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A physically degenerate situation: zero outcome probability or zero
/// postselection probability.
class DegenerateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &message, std::size_t position)
        : std::runtime_error(message + " at position " +
                             std::to_string(position)),
          position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

  private:
    std::size_t position_;
};

/// Expression evaluation failed at a particular g.
class EvalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace cvlab
