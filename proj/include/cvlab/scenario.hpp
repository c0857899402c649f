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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvlab/contextual.hpp"
#include "cvlab/measurement.hpp"

namespace cvlab {

/// How a family's contextual values are obtained.
struct CvConfig {
    enum class Kind { min_norm, pinned, closed_form };
    Kind kind = Kind::min_norm;
    std::vector<PinnedExpr> pins;
    std::vector<ParamExpr> expressions;
};

struct FamilyConfig {
    MeasurementFamily family;
    CvConfig cv;
};

/// Expected value declared inside a scenario and verified by the CLI.
struct Expectation {
    std::string command;
    std::string quantity;
    std::optional<double> g;
    double value = 0.0;
    double tol = 0.0;
};

struct Scenario {
    std::string source;
    std::string label;
    Index dim = 0;
    std::optional<Observable> observable;
    std::map<std::string, FamilyConfig> families;
    std::string default_family;
    std::optional<DensityState> state;
    std::optional<ComplexVector> state_vector;
    std::optional<Postselection> postselection;
    std::vector<double> grid;
    double limit_tol = 1e-10;
    double check_tol = 1e-6;
    double completeness_tol = tolerance::completeness;
    /// "twist" or "positive" when the scenario describes a counterexample
    std::optional<std::string> counterexample;
    std::optional<ComplexMatrix> twist_generator;
    std::vector<Expectation> expectations;

    /// Empty name selects the default family. ScenarioError if unknown.
    [[nodiscard]] const FamilyConfig &family(const std::string &name = {}) const;
};

/// CV family implied by a config: closed form, or solved on demand.
CvFamily make_cv_family(const FamilyConfig &config, const Observable &observable);

/// Reads and validates a TOML scenario. Syntax errors carry file:line;
/// validation errors name the offending key; incomplete families raise
/// ModelError with the defect norm.
Scenario load_scenario(const std::string &path);
Scenario parse_scenario(std::string_view text, const std::string &source = "<string>");

/// Named vector ("plus", "+", "plus_i", "minus", "e1", ...) or a bracket
/// literal such as "[1, i]". Result is normalized.
ComplexVector parse_vector(std::string_view text, Index dim);

/// Named state ("mixed" or any vector name), vector literal (pure state) or
/// matrix literal "[[0.5, 0], [0, 0.5]]" (normalized by its trace).
DensityState parse_state(std::string_view text, Index dim);

/// Matrix literal "[[a, b], [c, d]]" with constant expression entries.
ComplexMatrix parse_matrix(std::string_view text, Index dim);

} // namespace cvlab
