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

#include "cvlab/errors.hpp"
#include "cvlab/families.hpp"
#include "cvlab/weak.hpp"
#include "support.hpp"

using namespace cvlab;
using cvlab::testing::Rng;

namespace {

ComplexMatrix diag2(double a, double b) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

ComplexVector vec2(Complex a, Complex b) {
    ComplexVector v(2);
    v << a, b;
    return v / v.norm();
}

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

} // namespace

TEST_SUITE("weak-analysis") {

TEST_CASE("an eigenstate gives its eigenvalue at every g") {
    const DensityState up(diag2(1, 0));
    const Postselection f(vec2(1, 0));
    for (double g : {0.5, 0.1, 0.01}) {
        const auto b =
            conditioned_average(polarization_family(), polarization_cvs(), up, f, g);
        CHECK(b.total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.g == g);
    }
}

TEST_CASE("the three-outcome breakdown sums to the numerator") {
    const ComplexVector h = vec2(1, 1);
    const auto b = conditioned_average(three_outcome_family(), three_outcome_cvs(),
                                       DensityState::pure(h), Postselection(h), 0.1);
    CHECK(std::isfinite(b.total));
    CHECK(b.anticommutator_part + b.commutator_part ==
          doctest::Approx(b.numerator).epsilon(1e-10));
}

TEST_CASE("orthogonal postselection is degenerate") {
    const DensityState up(diag2(1, 0));
    const Postselection down(vec2(0, 1));
    const Instrument proj = Instrument::singly_indexed({diag2(1, 0), diag2(0, 1)});
    const std::vector<double> alphas{1.0, -1.0};
    CHECK_THROWS_AS(conditioned_average(proj, alphas, up.matrix(), down), DegenerateError);
    CHECK_THROWS_AS(weak_value_generalized(Observable(diag2(1, -1)), up, down),
                    DegenerateError);
    CHECK_THROWS_AS(traditional_weak_value(Observable(diag2(1, -1)), vec2(1, 0), vec2(0, 1)),
                    DegenerateError);
}

TEST_CASE("decomposition identity on random draws") {
    Rng rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        const Index d = 1 + trial % 4;
        const Instrument inst =
            cvlab::testing::random_instrument(rng, d, 1 + trial % 4, 1 + trial % 2);
        std::vector<double> alphas;
        for (Index j = 0; j < inst.outcome_count(); ++j) {
            alphas.push_back(std::normal_distribution<double>(0.0, 10.0)(rng));
        }
        const DensityState rho = cvlab::testing::random_density(rng, d);
        const Postselection f(cvlab::testing::random_unit_vector(rng, d));
        const auto b = conditioned_average(inst, alphas, rho.matrix(), f);
        double scale = 1.0;
        for (double a : alphas) {
            scale = std::max(scale, 1.0 + std::abs(a));
        }
        CHECK(std::abs(b.anticommutator_part + b.commutator_part - b.numerator) <=
              1e-10 * scale);
        CHECK(b.total == doctest::Approx(b.numerator / b.denominator));
    }
}

TEST_CASE("conditioned averages ignore the state's normalization") {
    Rng rng(52);
    const Instrument inst = evaluate_family(three_outcome_family(), 0.05);
    const std::vector<double> alphas = three_outcome_cvs().alphas(0.05);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix rho = cvlab::testing::random_density(rng, 2).matrix();
        const Postselection f(cvlab::testing::random_unit_vector(rng, 2));
        const double a = conditioned_average(inst, alphas, rho, f).total;
        const double b = conditioned_average(inst, alphas, ComplexMatrix(7.5 * rho), f).total;
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("commutator part vanishes for the untwisted polarization family") {
    Rng rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const DensityState rho = cvlab::testing::random_density(rng, 2);
        const Postselection f(cvlab::testing::random_unit_vector(rng, 2));
        for (double g : {0.3, 0.01}) {
            const auto b =
                conditioned_average(polarization_family(), polarization_cvs(), rho, f, g);
            CHECK(std::abs(b.commutator_part) <= 1e-12);
        }
    }
}

TEST_CASE("the two hermitian commutator routes agree") {
    Rng rng(54);
    for (int trial = 0; trial < 50; ++trial) {
        const double g = 0.01 + 0.4 * (trial % 10) / 10.0;
        const Instrument inst = evaluate_family(three_outcome_family(), g);
        const std::vector<double> alphas = three_outcome_cvs().alphas(g);
        const DensityState rho = cvlab::testing::random_density(rng, 2);
        const Postselection f(cvlab::testing::random_unit_vector(rng, 2));
        const double direct = hermitian_commutator_term(inst, alphas, rho.matrix(), f);
        const double nested = double_commutator_term(inst, alphas, rho.matrix(), f);
        const double scale = std::max(1.0, std::abs(direct));
        CHECK(std::abs(direct - nested) <= 1e-10 * scale);
        // the breakdown carries the symmetric half of the product
        const auto b = conditioned_average(inst, alphas, rho.matrix(), f);
        CHECK(std::abs(b.commutator_part - 0.5 * direct) <= 1e-10 * scale);
    }
    const Instrument twisted = evaluate_family(twisted_polarization_family(pauli_x()), 0.1);
    const std::vector<double> alphas{10.0, -10.0};
    CHECK_THROWS_AS(hermitian_commutator_term(twisted, alphas, diag2(1, 0), Postselection(vec2(1, 1))),
                    DomainError);
}

TEST_CASE("generalized weak value examples") {
    const ComplexVector f = vec2(0.6, 0.8);
    const Observable a(diag2(2, -1));
    CHECK(weak_value_generalized(a, DensityState::pure(f), Postselection(f)) ==
          doctest::Approx((f.adjoint() * a.matrix() * f)(0, 0).real()));
    const ComplexVector h = vec2(1, 1);
    CHECK(weak_value_generalized(Observable(diag2(1, 0)), DensityState::pure(h),
                                 Postselection(h)) == doctest::Approx(0.5));
    CHECK(weak_value_generalized(Observable(diag2(1, -1)), DensityState::pure(h),
                                 Postselection(vec2(1, 0))) == doctest::Approx(1.0));
}

TEST_CASE("traditional weak value examples") {
    const Observable z(diag2(1, -1));
    CHECK(traditional_weak_value(z, vec2(0, 1), vec2(0, 1)) == doctest::Approx(-1.0));
    CHECK(traditional_weak_value(z, vec2(1, 1), vec2(1, 0)) == doctest::Approx(1.0));
    for (double theta : {0.1, 0.7, 1.3, 2.9}) {
        CHECK(traditional_weak_value(z, vec2(std::cos(theta), std::sin(theta)), vec2(1, 0)) ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("mixed-state weak value generalizes the pure one") {
    Rng rng(55);
    int tested = 0;
    while (tested < 100) {
        const ComplexVector psi = cvlab::testing::random_unit_vector(rng, 3);
        const ComplexVector phi = cvlab::testing::random_unit_vector(rng, 3);
        if (std::abs(phi.dot(psi)) <= 0.1) {
            continue;
        }
        ++tested;
        const Observable a(cvlab::testing::random_hermitian(rng, 3));
        CHECK(std::abs(weak_value_generalized(a, DensityState::pure(psi), Postselection(phi)) -
                       traditional_weak_value(a, psi, phi)) <= 1e-12);
    }
}

TEST_CASE("the polarization limit equals the generalized weak value") {
    Rng rng(56);
    const Observable a(diag2(1, -1));
    int tested = 0;
    while (tested < 10) {
        const DensityState rho = cvlab::testing::random_density(rng, 2);
        const Postselection f(cvlab::testing::random_unit_vector(rng, 2));
        if ((f.projector() * rho.matrix()).trace().real() <= 0.05) {
            continue;
        }
        ++tested;
        const WeakLimit lim = weak_limit(polarization_family(), polarization_cvs(), rho, f);
        CHECK(lim.average.value ==
              doctest::Approx(weak_value_generalized(a, rho, f)).epsilon(1e-6));
        CHECK(lim.denominator_consistent);
        CHECK(lim.trace.size() == lim.average.samples.size());
    }
}

TEST_CASE("the three-outcome limit misses the weak value by the gap") {
    const ComplexVector h = vec2(1, 1);
    const WeakLimit lim = weak_limit(three_outcome_family(), three_outcome_cvs(),
                                     DensityState::pure(h), Postselection(h));
    CHECK(lim.average.value == doctest::Approx(-1.5).epsilon(1e-5));
    CHECK(lim.denominator.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("weak limits refuse strong families and degenerate postselection") {
    const MeasurementFamily strong = MeasurementFamily::singly_indexed(
        "projective", 2, {OperatorTable::constant(diag2(1, 0)), OperatorTable::constant(diag2(0, 1))});
    const CvFamily cvs = CvFamily::closed_form({ParamExpr::number(1), ParamExpr::number(-1)});
    const ComplexVector h = vec2(1, 1);
    CHECK_THROWS_AS(weak_limit(strong, cvs, DensityState::pure(h), Postselection(h)), ModelError);
    CHECK_THROWS_AS(weak_limit(polarization_family(), polarization_cvs(),
                               DensityState::pure(vec2(1, 0)), Postselection(vec2(0, 1))),
                    DegenerateError);
}

TEST_CASE("twist counterexample closed forms") {
    CHECK_THROWS_AS(twisted_counterexample(ComplexMatrix::Identity(2, 2),
                                           DensityState::pure(vec2(1, 1)),
                                           Postselection(vec2(1, 0))),
                    DomainError);
    const TwistResult real_state = twisted_counterexample(
        pauli_x(), DensityState::pure(vec2(1, 1)), Postselection(vec2(1, 0)));
    CHECK(real_state.delta_closed == doctest::Approx(0.0));
    CHECK(real_state.delta.value == doctest::Approx(0.0).epsilon(1e-5));

    const TwistResult complex_state = twisted_counterexample(
        pauli_x(), DensityState::pure(vec2(1, Complex(0, 1))), Postselection(vec2(1, 0)));
    CHECK(complex_state.delta_closed == doctest::Approx(-2.0));
    // the operator sandwich halves the state at g = 0, which halves the shift
    CHECK(complex_state.delta_leading_order == doctest::Approx(-1.0));
    CHECK(complex_state.delta.value == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("positive-operator counterexample") {
    const ComplexVector h = vec2(1, 1);
    const PositiveResult r = positive_counterexample(DensityState::pure(h), Postselection(h));
    CHECK(r.weak_value == doctest::Approx(0.5));
    CHECK(r.gap_closed == doctest::Approx(-2.0));
    CHECK(r.limit.average.value == doctest::Approx(-1.5).epsilon(1e-5));
    CHECK(r.consistent);

    SUBCASE("diagonal states have no gap") {
        const PositiveResult d =
            positive_counterexample(DensityState(diag2(0.3, 0.7)), Postselection(h));
        CHECK(d.gap_closed == 0.0);
        CHECK(d.limit.average.value == doctest::Approx(d.weak_value).epsilon(1e-6));
    }
    SUBCASE("a basis postselection has no gap") {
        const PositiveResult b = positive_counterexample(
            DensityState::pure(vec2(0.6, 0.8)), Postselection(vec2(1, 0)));
        CHECK(b.gap_closed == 0.0);
    }
    SUBCASE("vanishing overlap is degenerate") {
        CHECK_THROWS_AS(positive_counterexample(DensityState::pure(vec2(1, -1)), Postselection(h)),
                        DegenerateError);
    }
}

} // TEST_SUITE
