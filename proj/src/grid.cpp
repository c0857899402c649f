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

#include "cvlab/grid.hpp"

#include <cmath>
#include <limits>

#include "cvlab/errors.hpp"

namespace cvlab {

std::vector<double> geometric_grid(double g0, double ratio, std::size_t count) {
    if (!(g0 > 0.0) || !(ratio > 0.0) || !std::isfinite(g0) ||
        !std::isfinite(ratio)) {
        throw DomainError("geometric grid needs positive finite g0 and ratio");
    }
    std::vector<double> out;
    out.reserve(count);
    double g = g0;
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(g);
        g *= ratio;
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t per_decade) {
    if (!(lo > 0.0) || !(hi >= lo) || per_decade == 0) {
        throw DomainError("log grid needs 0 < lo <= hi and per_decade > 0");
    }
    const double decades = std::log10(hi / lo);
    const auto intervals = static_cast<std::size_t>(
        std::max(1.0, std::ceil(decades * static_cast<double>(per_decade) - 1e-9)));
    std::vector<double> out;
    out.reserve(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(intervals);
        out.push_back(lo * std::pow(hi / lo, t));
    }
    out.back() = hi;
    return out;
}

LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t k = 0; k < x.size() && k < y.size(); ++k) {
        if (x[k] > 0.0 && y[k] > 0.0 && std::isfinite(x[k]) &&
            std::isfinite(y[k])) {
            lx.push_back(std::log(x[k]));
            ly.push_back(std::log(y[k]));
        }
    }
    LogLogFit fit;
    fit.points = lx.size();
    if (fit.points < 2) {
        fit.slope = std::numeric_limits<double>::quiet_NaN();
        fit.intercept = std::numeric_limits<double>::quiet_NaN();
        fit.rms_residual = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    const double n = static_cast<double>(fit.points);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        const double r = ly[k] - (fit.intercept + fit.slope * lx[k]);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

} // namespace cvlab
