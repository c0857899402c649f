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

#include <functional>
#include <utility>
#include <vector>

namespace cvlab {

struct LimitOptions {
    /// first sample point; subsequent points halve g
    double g0 = 0.1;
    /// no sample is taken below this g
    double min_g = 1e-5;
    int max_depth = 14;
    /// converged once successive diagonal extrapolants differ by less
    double tol = 1e-10;
};

/// Estimate of lim_{g -> 0} f(g).
struct LimitEstimate {
    double value = 0.0;
    /// |difference| between the last two diagonal extrapolants used
    double error_estimate = 0.0;
    /// (g_k, f(g_k)) in evaluation order
    std::vector<std::pair<double, double>> samples;
    /// diagonal Richardson extrapolant after each sample
    std::vector<double> extrapolants;
    bool converged = false;
};

/// Richardson extrapolation on g_k = g0 / 2^k assuming f(g) is a power
/// series in g. When no pair of successive extrapolants meets `tol`, the
/// best pair seen is reported with converged = false.
LimitEstimate richardson_limit(const std::function<double(double)> &f,
                               const LimitOptions &options = {});

} // namespace cvlab
