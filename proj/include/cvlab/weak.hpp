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

#include <limits>
#include <span>
#include <vector>

#include "cvlab/contextual.hpp"
#include "cvlab/extrapolation.hpp"
#include "cvlab/measurement.hpp"

namespace cvlab {

/// Conditioned average at one g, split along
///   M rho M^dagger = (1/2)(M M^dagger rho + rho M M^dagger)
///                  + (1/2)([M, rho] M^dagger + M [rho, M^dagger]).
struct ConditionedAverageBreakdown {
    double g = std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    /// sum_j alpha_j tr[P_f M_j rho M_j^dagger]
    double numerator = 0.0;
    /// sum_j tr[P_f M_j rho M_j^dagger]
    double denominator = 0.0;
    /// (1/2) sum_j alpha_j tr[P_f (M_j M_j^dagger rho + rho M_j M_j^dagger)]
    double anticommutator_part = 0.0;
    /// (1/2) sum_j alpha_j tr[P_f ([M_j, rho] M_j^dagger + M_j [rho, M_j^dagger])]
    double commutator_part = 0.0;
};

/// Works on an unnormalized positive `rho`; the total is invariant under
/// rescaling it. DegenerateError when the postselection probability
/// vanishes (<= 1e-14 tr rho).
ConditionedAverageBreakdown conditioned_average(const Instrument &instrument,
                                                std::span<const double> alphas,
                                                const ComplexMatrix &rho,
                                                const Postselection &post);

ConditionedAverageBreakdown conditioned_average(const MeasurementFamily &family,
                                                const CvFamily &cvf,
                                                const DensityState &rho,
                                                const Postselection &post, double g);

/// tr[P_f sum_j alpha_j ([M_j, rho] M_j + M_j [rho, M_j])] for Hermitian
/// operators (no factor 1/2). DomainError for non-Hermitian operators.
double hermitian_commutator_term(const Instrument &instrument,
                                 std::span<const double> alphas,
                                 const ComplexMatrix &rho, const Postselection &post);

/// The same quantity through the double commutator
/// tr[P_f sum_j -alpha_j [M_j, [M_j, rho]]].
double double_commutator_term(const Instrument &instrument,
                              std::span<const double> alphas,
                              const ComplexMatrix &rho, const Postselection &post);

/// tr[P_f {A, rho}] / (2 tr[P_f rho])
double weak_value_generalized(const Observable &a, const DensityState &rho,
                              const Postselection &post);

/// Re <psi_f|A psi_i> / <psi_f|psi_i>
double traditional_weak_value(const Observable &a, const ComplexVector &psi_i,
                              const ComplexVector &psi_f);

struct WeakLimit {
    LimitEstimate average;
    LimitEstimate denominator;
    /// tr[P_f rho], the expected denominator limit
    double postselection_probability = 0.0;
    bool denominator_consistent = false;
    /// breakdown at every sampled g, in sampling order
    std::vector<ConditionedAverageBreakdown> trace;
};

/// g -> 0 limit of the conditioned average. The family must be certified
/// weak for rho (ModelError otherwise).
WeakLimit weak_limit(const MeasurementFamily &family, const CvFamily &cvf,
                     const DensityState &rho, const Postselection &post,
                     const LimitOptions &options = {});

struct TwistResult {
    /// lim Delta(g), Delta = twisted minus untwisted conditioned average
    LimitEstimate delta;
    /// tr([P_f, iH] rho) / tr[P_f rho]
    double delta_closed = 0.0;
    /// tr([P_f, iH] M+(0) rho M+(0)) / tr[P_f rho]
    double delta_leading_order = 0.0;
};

/// Twists the polarization family by exp(igH). H must be a 2x2 Hermitian
/// matrix that is not a multiple of the identity.
TwistResult twisted_counterexample(const ComplexMatrix &h, const DensityState &rho,
                                   const Postselection &post,
                                   const LimitOptions &options = {});

struct PositiveResult {
    WeakLimit limit;
    /// generalized weak value of diag(1, 0)
    double weak_value = 0.0;
    /// -8 Re(f2* f1 rho21) / <f|rho|f>
    double gap_closed = 0.0;
    /// limit - weak_value
    double gap_numeric = 0.0;
    bool consistent = false;
};

/// Three-outcome positive family with pinned 1/g^2 CVs. `post` must carry a
/// vector. `check_tol` bounds |limit - (weak_value + gap_closed)|.
PositiveResult positive_counterexample(const DensityState &rho,
                                       const Postselection &post,
                                       const LimitOptions &options = {},
                                       double check_tol = 1e-6);

} // namespace cvlab
