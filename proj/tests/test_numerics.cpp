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


#include <doctest.h>

#include <cmath>

#include "cvlab/errors.hpp"
#include "cvlab/extrapolation.hpp"
#include "cvlab/grid.hpp"

using namespace cvlab;

TEST_SUITE("numerics") {

TEST_CASE("geometric and log grids") {
    const auto g = geometric_grid(0.1, 0.5, 4);
    REQUIRE(g.size() == 4);
    CHECK(g[3] == doctest::Approx(0.0125));
    const auto l = log_grid(0.01, 0.1, 8);
    REQUIRE(l.size() == 9);
    CHECK(l.front() == doctest::Approx(0.01));
    CHECK(l.back() == doctest::Approx(0.1));
    CHECK(l[4] == doctest::Approx(std::sqrt(0.001)));
}

TEST_CASE("log-log fits recover power laws") {
    const auto x = log_grid(0.01, 1.0, 8);
    std::vector<double> y;
    for (double v : x) {
        y.push_back(3.0 * v * v);
    }
    const LogLogFit fit = fit_log_log(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
    CHECK(fit.rms_residual <= 1e-12);
    // nonpositive values are skipped
    y[0] = 0.0;
    CHECK(fit_log_log(x, y).points == x.size() - 1);
}

TEST_CASE("richardson removes polynomial terms") {
    const LimitEstimate e =
        richardson_limit([](double g) { return 2.0 + 3.0 * g - 5.0 * g * g + g * g * g; });
    CHECK(e.converged);
    CHECK(e.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.samples.front().first == 0.1);
    CHECK(e.extrapolants.size() == e.samples.size());
}

TEST_CASE("richardson on a smooth non-polynomial function") {
    const LimitEstimate e = richardson_limit([](double g) { return std::exp(g) / (1.0 + g); });
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("non-convergence is reported, not thrown") {
    LimitOptions opts;
    opts.max_depth = 3;
    const LimitEstimate e =
        richardson_limit([](double g) { return std::sin(1.0 / g); }, opts);
    CHECK_FALSE(e.converged);
    CHECK(e.samples.size() == 4);
}

TEST_CASE("invalid options") {
    LimitOptions opts;
    opts.g0 = 1e-6;
    CHECK_THROWS_AS(richardson_limit([](double) { return 0.0; }, opts), DomainError);
    CHECK_THROWS_AS(richardson_limit([](double g) { return 1.0 / (g - 0.05); }), DomainError);
}

} // TEST_SUITE
