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


#include "cvlab/extrapolation.hpp"

#include <cmath>
#include <limits>

#include "cvlab/errors.hpp"

namespace cvlab {

LimitEstimate richardson_limit(const std::function<double(double)> &f,
                               const LimitOptions &options) {
    if (!(options.g0 > 0.0) || !(options.min_g > 0.0) || options.max_depth < 1 ||
        !(options.tol > 0.0)) {
        throw DomainError("invalid limit options");
    }
    if (options.g0 < options.min_g) {
        throw DomainError("g0 lies below the g floor");
    }
    LimitEstimate out;
    out.error_estimate = std::numeric_limits<double>::infinity();
    std::vector<double> previous;
    double g = options.g0;
    for (int k = 0; k <= options.max_depth && g >= options.min_g; ++k, g /= 2.0) {
        const double value = f(g);
        if (!std::isfinite(value)) {
            throw DomainError("non-finite sample at g=" + std::to_string(g));
        }
        out.samples.emplace_back(g, value);

        std::vector<double> row{value};
        double factor = 1.0;
        for (std::size_t m = 1; m <= previous.size(); ++m) {
            factor *= 2.0;
            row.push_back(row[m - 1] + (row[m - 1] - previous[m - 1]) / (factor - 1.0));
        }
        out.extrapolants.push_back(row.back());
        previous = std::move(row);

        if (k == 0) {
            out.value = value;
            continue;
        }
        const std::size_t n = out.extrapolants.size();
        const double diff = std::abs(out.extrapolants[n - 1] - out.extrapolants[n - 2]);
        if (diff < out.error_estimate) {
            out.error_estimate = diff;
            out.value = out.extrapolants[n - 1];
        }
        if (diff < options.tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace cvlab
