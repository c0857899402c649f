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


#include "cvlab/weak.hpp"

#include <cmath>

#include "cvlab/errors.hpp"
#include "cvlab/families.hpp"

namespace cvlab {

namespace {

void require_alphas(const Instrument &instrument, std::span<const double> alphas) {
    if (static_cast<Index>(alphas.size()) != instrument.outcome_count()) {
        throw DimensionError("got " + std::to_string(alphas.size()) +
                             " contextual values for " +
                             std::to_string(instrument.outcome_count()) + " outcomes");
    }
}

void require_dims(const Instrument &instrument, const ComplexMatrix &rho,
                  const Postselection &post) {
    const Index d = instrument.dim();
    if (rho.rows() != d || rho.cols() != d || post.dim() != d) {
        throw DimensionError("state, postselection and operators must share dimension " +
                             std::to_string(d));
    }
}

double trace_real(const ComplexMatrix &p, const ComplexMatrix &x) {
    return (p * x).trace().real();
}

} // namespace

ConditionedAverageBreakdown conditioned_average(const Instrument &instrument,
                                                std::span<const double> alphas,
                                                const ComplexMatrix &rho,
                                                const Postselection &post) {
    require_alphas(instrument, alphas);
    require_dims(instrument, rho, post);
    const ComplexMatrix &pf = post.projector();
    ConditionedAverageBreakdown out;
    for (std::size_t j = 0; j < instrument.outcomes.size(); ++j) {
        const double alpha = alphas[j];
        for (const auto &m : instrument.outcomes[j]) {
            const ComplexMatrix md = m.adjoint();
            const ComplexMatrix mmd = m * md;
            const double term = trace_real(pf, m * rho * md);
            out.denominator += term;
            out.numerator += alpha * term;
            out.anticommutator_part += 0.5 * alpha * trace_real(pf, mmd * rho + rho * mmd);
            out.commutator_part +=
                0.5 * alpha *
                trace_real(pf, commutator(m, rho) * md + m * commutator(rho, md));
        }
    }
    const double scale = std::abs(rho.trace().real());
    if (!(std::abs(out.denominator) > tolerance::degenerate_probability * scale)) {
        throw DegenerateError("postselection probability vanishes");
    }
    out.total = out.numerator / out.denominator;
    return out;
}

ConditionedAverageBreakdown conditioned_average(const MeasurementFamily &family,
                                                const CvFamily &cvf,
                                                const DensityState &rho,
                                                const Postselection &post, double g) {
    const auto alphas = cvf.alphas(g);
    auto out = conditioned_average(evaluate_family(family, g), alphas, rho.matrix(), post);
    out.g = g;
    return out;
}

double hermitian_commutator_term(const Instrument &instrument,
                                 std::span<const double> alphas,
                                 const ComplexMatrix &rho, const Postselection &post) {
    require_alphas(instrument, alphas);
    require_dims(instrument, rho, post);
    ComplexMatrix sum = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (std::size_t j = 0; j < instrument.outcomes.size(); ++j) {
        for (const auto &m : instrument.outcomes[j]) {
            require_hermitian(m, "hermitian_commutator_term");
            sum += alphas[j] * (commutator(m, rho) * m + m * commutator(rho, m));
        }
    }
    return trace_real(post.projector(), sum);
}

double double_commutator_term(const Instrument &instrument,
                              std::span<const double> alphas,
                              const ComplexMatrix &rho, const Postselection &post) {
    require_alphas(instrument, alphas);
    require_dims(instrument, rho, post);
    ComplexMatrix sum = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (std::size_t j = 0; j < instrument.outcomes.size(); ++j) {
        for (const auto &m : instrument.outcomes[j]) {
            require_hermitian(m, "double_commutator_term");
            sum -= alphas[j] * commutator(m, commutator(m, rho));
        }
    }
    return trace_real(post.projector(), sum);
}

double weak_value_generalized(const Observable &a, const DensityState &rho,
                              const Postselection &post) {
    if (rho.dim() != a.dim() || post.dim() != a.dim()) {
        throw DimensionError("observable, state and postselection dimensions differ");
    }
    const ComplexMatrix &pf = post.projector();
    const double overlap = trace_real(pf, rho.matrix());
    if (!(overlap > tolerance::degenerate_probability)) {
        throw DegenerateError("postselection has zero overlap with the state");
    }
    return trace_real(pf, anticommutator(a.matrix(), rho.matrix())) / (2.0 * overlap);
}

double traditional_weak_value(const Observable &a, const ComplexVector &psi_i,
                              const ComplexVector &psi_f) {
    if (psi_i.size() != a.dim() || psi_f.size() != a.dim()) {
        throw DimensionError("state vectors must match the observable dimension");
    }
    const Complex overlap = psi_f.dot(psi_i);
    if (!(std::abs(overlap) > tolerance::degenerate_probability)) {
        throw DegenerateError("pre- and postselected states are orthogonal");
    }
    return (psi_f.dot(a.matrix() * psi_i) / overlap).real();
}

WeakLimit weak_limit(const MeasurementFamily &family, const CvFamily &cvf,
                     const DensityState &rho, const Postselection &post,
                     const LimitOptions &options) {
    if (rho.dim() != family.dim() || post.dim() != family.dim()) {
        throw DimensionError("state, postselection and family dimensions differ");
    }
    WeakLimit out;
    out.postselection_probability = trace_real(post.projector(), rho.matrix());
    if (!(out.postselection_probability > tolerance::degenerate_probability)) {
        throw DegenerateError("postselection probability tr[P_f rho] vanishes");
    }
    if (!certified_weak(family, rho, options.g0)) {
        throw ModelError("family '" + family.label() +
                         "' is not weak for this state: post-measurement states do "
                         "not approach rho as g decreases");
    }
    out.average = richardson_limit(
        [&](double g) {
            out.trace.push_back(conditioned_average(family, cvf, rho, post, g));
            return out.trace.back().total;
        },
        options);
    out.denominator = richardson_limit(
        [&](double g) {
            const Instrument inst = evaluate_family(family, g);
            double d = 0.0;
            for (Index j = 0; j < inst.outcome_count(); ++j) {
                d += trace_real(post.projector(),
                                unnormalized_post_state(inst, j, rho.matrix()));
            }
            return d;
        },
        options);
    out.denominator_consistent =
        std::abs(out.denominator.value - out.postselection_probability) <=
        std::max(options.tol, 1e-9);
    return out;
}

TwistResult twisted_counterexample(const ComplexMatrix &h, const DensityState &rho,
                                   const Postselection &post,
                                   const LimitOptions &options) {
    if (h.rows() != 2 || h.cols() != 2 || rho.dim() != 2 || post.dim() != 2) {
        throw DimensionError("the twisted counterexample lives in dimension 2");
    }
    require_hermitian(h, "twist generator");
    const ComplexMatrix traceless = h - (h.trace() / 2.0) * ComplexMatrix::Identity(2, 2);
    if (traceless.norm() <= tolerance::hermitian * std::max(1.0, h.norm())) {
        throw DomainError("twist generator is a multiple of the identity; the "
                          "difference vanishes identically");
    }
    const ComplexMatrix &pf = post.projector();
    const double overlap = trace_real(pf, rho.matrix());
    if (!(overlap > tolerance::degenerate_probability)) {
        throw DegenerateError("postselection probability tr[P_f rho] vanishes");
    }

    const MeasurementFamily plain = polarization_family();
    const MeasurementFamily twisted = twisted_polarization_family(h);
    const CvFamily cvs = polarization_cvs();

    TwistResult out;
    const ComplexMatrix generator_commutator = commutator(pf, ComplexMatrix(Complex(0, 1) * h));
    out.delta_closed = trace_real(generator_commutator, rho.matrix()) / overlap;
    const ComplexMatrix m0 = evaluate_family(plain, 0.0).outcomes.front().front();
    out.delta_leading_order =
        trace_real(generator_commutator, m0 * rho.matrix() * m0.adjoint()) / overlap;

    out.delta = richardson_limit(
        [&](double g) {
            return conditioned_average(twisted, cvs, rho, post, g).total -
                   conditioned_average(plain, cvs, rho, post, g).total;
        },
        options);
    return out;
}

PositiveResult positive_counterexample(const DensityState &rho,
                                       const Postselection &post,
                                       const LimitOptions &options, double check_tol) {
    if (rho.dim() != 2 || post.dim() != 2) {
        throw DimensionError("the positive-operator counterexample lives in dimension 2");
    }
    if (!post.vector()) {
        throw DomainError("the positive-operator counterexample needs a postselection vector");
    }
    const ComplexVector &f = *post.vector();
    const ComplexMatrix &r = rho.matrix();
    const double cross = (std::conj(f(1)) * f(0) * r(1, 0)).real();
    const double denom = std::norm(f(0)) * r(0, 0).real() + 2.0 * cross +
                         std::norm(f(1)) * r(1, 1).real();
    if (!(std::abs(denom) > tolerance::degenerate_probability)) {
        throw DegenerateError("postselection probability <f|rho|f> vanishes");
    }
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 1.0;

    PositiveResult out;
    out.gap_closed = -8.0 * cross / denom;
    out.weak_value = weak_value_generalized(Observable(a), rho, post);
    out.limit = weak_limit(three_outcome_family(), three_outcome_cvs(), rho, post, options);
    out.gap_numeric = out.limit.average.value - out.weak_value;
    out.consistent =
        std::abs(out.limit.average.value - (out.weak_value + out.gap_closed)) <= check_tol;
    return out;
}

} // namespace cvlab
