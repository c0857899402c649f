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
#include <span>
#include <vector>

namespace cvlab {

/// g0, g0*ratio, g0*ratio^2, ... (count points).
std::vector<double> geometric_grid(double g0, double ratio, std::size_t count);

/// Logarithmically spaced points from lo to hi inclusive, with
/// `per_decade` intervals per factor of ten (rounded up).
std::vector<double> log_grid(double lo, double hi, std::size_t per_decade);

/// Least-squares fit of log(y) = intercept + slope * log(x).
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// RMS of the residuals in natural-log units.
    double rms_residual = 0.0;
    std::size_t points = 0;

    [[nodiscard]] bool valid() const { return points >= 2; }
};

/// Points with x <= 0 or y <= 0 are skipped. Fewer than two usable points
/// give a fit with points < 2 and NaN slope.
LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y);

} // namespace cvlab
