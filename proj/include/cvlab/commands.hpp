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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvlab/scenario.hpp"

namespace cvlab {

/// Exit codes shared by every subcommand.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;  ///< failed check or internal assertion
inline constexpr int bad_input = 2; ///< degenerate or invalid input
} // namespace exit_code

struct CommandFlags {
    std::optional<double> g;
    std::optional<std::string> rho;
    std::optional<std::string> f;
    std::optional<double> tol;
    std::optional<std::string> grid; ///< "g0:ratio:n"
    std::optional<std::string> family;
    /// Suppresses CSV and summary output; only expectation lines are kept.
    bool quiet = false;
    /// Expectations whose quantity was not computed count as failures.
    bool strict = false;
};

/// One reported number, matched against scenario expectations.
struct CommandResult {
    std::string quantity;
    std::optional<double> g;
    double value = 0.0;
};

/// Each command writes CSV plus "#" summary lines to `out` and returns an
/// exit code. Input problems surface as exceptions; run_cli maps them.
int cmd_solve(const Scenario &sc, const CommandFlags &flags, std::ostream &out);
int cmd_limit(const Scenario &sc, const CommandFlags &flags, std::ostream &out);
int cmd_dilate(const Scenario &sc, const CommandFlags &flags, std::ostream &out);
int cmd_diagnose(const Scenario &sc, const CommandFlags &flags, std::ostream &out);

/// `target` is "twist", "positive", their aliases "twist" and "positive", or a
/// scenario path whose `counterexample` key selects the kind.
int cmd_counterexample(const std::string &target, const CommandFlags &flags,
                       std::ostream &out);
int cmd_counterexample(const Scenario &sc, const std::string &kind,
                       const CommandFlags &flags, std::ostream &out);

/// Runs every command named in the scenario's expectations and prints one
/// PASS/FAIL line per expectation.
int cmd_check(const Scenario &sc, const CommandFlags &flags, std::ostream &out);

/// Full command line front end. Never throws.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// "%.17g" rendering used by every CSV table.
std::string format_number(double x);

} // namespace cvlab
