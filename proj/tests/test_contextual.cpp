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

#include "cvlab/contextual.hpp"
#include "cvlab/errors.hpp"
#include "cvlab/families.hpp"
#include "support.hpp"

using namespace cvlab;
using cvlab::testing::relative;
using cvlab::testing::Rng;

namespace {

ComplexMatrix diag2(double a, double b) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

ComplexMatrix weighted_sum(std::span<const double> alphas, std::span<const ComplexMatrix> e) {
    ComplexMatrix s = ComplexMatrix::Zero(e[0].rows(), e[0].cols());
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        s += alphas[j] * e[j];
    }
    return s;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

} // namespace

TEST_SUITE("contextual-values") {

TEST_CASE("observables must be hermitian") {
    ComplexMatrix m = diag2(1, 0);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(Observable{m}, DomainError);
}

TEST_CASE("hermitian coordinates preserve the inner product") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const Index d = 1 + trial % 4;
        const ComplexMatrix a = cvlab::testing::random_hermitian(rng, d);
        const ComplexMatrix b = cvlab::testing::random_hermitian(rng, d);
        const double direct = (a * b).trace().real();
        CHECK(hermitian_coordinates(a).dot(hermitian_coordinates(b)) ==
              doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("projective effects give the eigenvalues") {
    const Observable a(diag2(3.0, -2.0));
    const std::vector<ComplexMatrix> e{diag2(1, 0), diag2(0, 1)};
    const CvSolution s = solve_cv(a, e);
    CHECK(s.solvable);
    CHECK(s.alphas[0] == doctest::Approx(3.0));
    CHECK(s.alphas[1] == doctest::Approx(-2.0));
    CHECK(s.residual <= 1e-12);
}

TEST_CASE("polarization values are plus and minus 1/g") {
    const Observable a(diag2(1, -1));
    for (double g : {0.1, 0.01, 0.001}) {
        const CvSolution s = solve_cv(a, povm(polarization_family(), g));
        CHECK(s.solvable);
        CHECK(relative(s.alphas[0], 1.0 / g) <= 1e-9);
        CHECK(relative(s.alphas[1], -1.0 / g) <= 1e-9);
    }
    CHECK(solve_cv(a, povm(polarization_family(), 0.1)).residual <= 1e-10);
}

TEST_CASE("no solution when the effects cannot separate outcomes") {
    const Observable a(diag2(1, -1));
    const std::vector<ComplexMatrix> e{diag2(0.5, 0.5), diag2(0.5, 0.5)};
    const CvSolution s = solve_cv(a, e);
    CHECK_FALSE(s.solvable);
    CHECK(s.residual == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("pinned solve reproduces the three-outcome values") {
    const Observable a(diag2(1, 0));
    for (double g : {0.1, 0.05, 0.01}) {
        const auto e = povm(three_outcome_family(), g);
        const std::vector<PinnedValue> pin{{0, 1.0 / (g * g)}};
        const CvSolution s = solve_cv(a, e, pin);
        CHECK(s.solvable);
        CHECK(s.alphas[0] == 1.0 / (g * g));
        CHECK(relative(s.alphas[1], 1.0 / (g * g) - 1.0 / (2.0 * g)) <= 1e-9);
        const double want3 =
            -(4 * g * g * g - 12 * g * g + g - 4) / (4 * g * g * (4 * g * g - 1));
        CHECK(relative(s.alphas[2], want3) <= 1e-9);
        const ComplexMatrix back = weighted_sum(s.alphas, e);
        CHECK(relative(back(0, 0).real(), 1.0) <= 1e-9);
        CHECK(std::abs(back(1, 1).real()) <= 1e-9 * s.max_abs_alpha());
    }
}

TEST_CASE("the example values at g = 0.1") {
    const CvFamily cvf = cv_family(three_outcome_family(), Observable(diag2(1, 0)),
                                   std::vector<double>{0.1}, three_outcome_pins());
    const auto alphas = cvf.alphas(0.1);
    CHECK(alphas[0] == doctest::Approx(100.0));
    CHECK(alphas[1] == doctest::Approx(95.0));
    CHECK(alphas[2] == doctest::Approx(-104.58333333333333));
}

TEST_CASE("unpinned solves of the three-outcome family") {
    const Observable a(diag2(1, 0));
    for (double g : {0.1, 0.01, 0.001}) {
        const auto e = povm(three_outcome_family(), g);
        const CvSolution free = solve_cv(a, e);
        CHECK(free.solvable);
        CHECK(free.residual <= 1e-10);
        const std::vector<PinnedValue> pin{{0, 1.0 / (g * g)}};
        const CvSolution pinned = solve_cv(a, e, pin);
        CHECK(pinned.residual <= 1e-10 * pinned.max_abs_alpha());
        CHECK(free.residual <= pinned.residual + 1e-12);
        CHECK(norm2(free.alphas) <= norm2(pinned.alphas));
    }
}

TEST_CASE("min-norm solutions beat other exact solutions") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 2;
        const Instrument inst = cvlab::testing::random_instrument(rng, d, 6);
        const auto e = povm(inst);
        // an observable in the span of the effects, so the system is solvable
        Eigen::VectorXd w = Eigen::VectorXd::Random(6);
        std::vector<double> wv(w.data(), w.data() + w.size());
        const Observable a(weighted_sum(wv, e));
        const CvSolution s = solve_cv(a, e);
        REQUIRE(s.solvable);

        RealMatrix f(4, 6);
        for (Index j = 0; j < 6; ++j) {
            f.col(j) = hermitian_coordinates(e[static_cast<std::size_t>(j)]);
        }
        const RealMatrix null = Eigen::FullPivLU<RealMatrix>(f).kernel();
        for (int k = 0; k < 100; ++k) {
            const Eigen::VectorXd shift = null * Eigen::VectorXd::Random(null.cols());
            std::vector<double> alt(s.alphas);
            for (Index j = 0; j < 6; ++j) {
                alt[static_cast<std::size_t>(j)] += shift(j);
            }
            CHECK((weighted_sum(alt, e) - a.matrix()).norm() <= 1e-8);
            CHECK(norm2(s.alphas) <= norm2(alt) + 1e-12);
        }
    }
}

TEST_CASE("the unconditioned average reproduces the expectation") {
    Rng rng(43);
    const Observable a(diag2(1, -1));
    for (double g : {0.1, 0.01}) {
        const Instrument inst = evaluate_family(polarization_family(), g);
        const CvSolution s = solve_cv(a, povm(inst));
        for (int trial = 0; trial < 100; ++trial) {
            const DensityState rho = cvlab::testing::random_density(rng, 2);
            const auto p = probabilities(inst, rho);
            double avg = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) {
                avg += s.alphas[j] * p[j];
            }
            const double want = (a.matrix() * rho.matrix()).trace().real();
            CHECK(std::abs(avg - want) <= 1e-8 * (1.0 + s.max_abs_alpha()));
        }
    }
}

TEST_CASE("pinning errors") {
    const Observable a(diag2(1, 0));
    const auto e = povm(three_outcome_family(), 0.1);
    const std::vector<PinnedValue> outside{{5, 1.0}};
    CHECK_THROWS_AS(solve_cv(a, e, outside), std::out_of_range);
    const std::vector<PinnedValue> twice{{0, 1.0}, {0, 2.0}};
    CHECK_THROWS_AS(solve_cv(a, e, twice), DomainError);
    const std::vector<ComplexMatrix> wrong{ComplexMatrix::Identity(3, 3)};
    CHECK_THROWS_AS(solve_cv(a, wrong), DimensionError);
}

TEST_CASE("pin specifications") {
    const auto pins = parse_pin_spec("alpha1=1/g^2, alpha3 = 2");
    REQUIRE(pins.size() == 2);
    CHECK(pins[0].index == 0);
    CHECK(to_string(pins[0].value) == "1/g^2");
    CHECK(pins[1].index == 2);
    CHECK_THROWS_AS(parse_pin_spec("beta1=2"), ParseError);
    CHECK_THROWS_AS(parse_pin_spec("alpha0=2"), ParseError);
    CHECK_THROWS_AS(parse_pin_spec("alpha1"), ParseError);
}

TEST_CASE("cv families from the three sources agree") {
    const Observable a(diag2(1, 0));
    const std::vector<double> grid{0.1, 0.05};
    const CvFamily closed = three_outcome_cvs();
    const CvFamily solved = CvFamily::solved(three_outcome_family(), a, three_outcome_pins());
    const CvFamily sampled = cv_family(three_outcome_family(), a, grid, three_outcome_pins());
    CHECK(closed.is_closed_form());
    CHECK(sampled.is_sampled());
    for (double g : grid) {
        const auto x = closed.alphas(g);
        const auto y = solved.alphas(g);
        const auto z = sampled.alphas(g);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(relative(y[j], x[j]) <= 1e-9);
            CHECK(z[j] == y[j]);
        }
    }
    CHECK_THROWS(static_cast<void>(sampled.alphas(0.07)));
}

TEST_CASE("constant values for a g-independent family") {
    const MeasurementFamily fam = MeasurementFamily::singly_indexed(
        "projective", 2, {OperatorTable::constant(diag2(1, 0)), OperatorTable::constant(diag2(0, 1))});
    const std::vector<double> grid = log_grid(0.01, 0.1, 8);
    const CvFamily cvf = cv_family(fam, Observable(diag2(2, 5)), grid);
    for (double g : grid) {
        const auto alphas = cvf.alphas(g);
        CHECK(alphas[0] == doctest::Approx(2.0));
        CHECK(alphas[1] == doctest::Approx(5.0));
    }
    for (const auto &fit : divergence_order(cvf, grid)) {
        CHECK(fit.exponent == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(fit.power_law);
    }
}

TEST_CASE("divergence orders") {
    const std::vector<double> grid = log_grid(1e-3, 1e-2, 8);
    const auto pol = divergence_order(polarization_cvs(), grid);
    REQUIRE(pol.size() == 2);
    CHECK(pol[0].exponent == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pol[1].exponent == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pol[1].coefficient == doctest::Approx(-1.0).epsilon(1e-9));
    const auto three = divergence_order(three_outcome_cvs(), grid);
    REQUIRE(three.size() == 3);
    for (const auto &fit : three) {
        CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.02));
        CHECK(fit.power_law);
    }
    CHECK(three[2].coefficient < 0.0);
}

TEST_CASE("divergence fits need a dense decade") {
    CHECK_THROWS_AS(divergence_order(polarization_cvs(), std::vector<double>{0.1, 0.05}),
                    DomainError);
    CHECK_THROWS_AS(divergence_order(polarization_cvs(), log_grid(0.01, 0.1, 4)), DomainError);
}

TEST_CASE("non power laws are flagged") {
    const CvFamily wobbly = CvFamily::closed_form({parse_expression("exp(1/g)")});
    const auto fits = divergence_order(wobbly, log_grid(0.05, 0.5, 8));
    CHECK_FALSE(fits[0].power_law);
}

} // TEST_SUITE
