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

// Reference measurement families used by the counterexamples and the
// bundled scenarios.

#include "cvlab/contextual.hpp"
#include "cvlab/measurement.hpp"

namespace cvlab {

/// Two-outcome polarization family M+ = diag(l, m), M- = diag(m, l) with
/// l = sqrt((1+g)/2), m = sqrt((1-g)/2). Valid for |g| <= 1.
MeasurementFamily polarization_family();

/// alpha = (1/g, -1/g), reproducing diag(1, -1).
CvFamily polarization_cvs();

/// M1 = exp(i g H) M+, M2 = M-. Same POVM as the untwisted family.
MeasurementFamily twisted_polarization_family(const ComplexMatrix &h);

/// Three positive diagonal operators diag(1/2+g, 1/2-g), diag(1/2-g, 1/2+g)
/// and sqrt(1/2 - 2g^2) I. Valid for |g| <= 1/2.
MeasurementFamily three_outcome_family();

/// Closed-form CVs reproducing diag(1, 0) with alpha1 pinned to 1/g^2.
CvFamily three_outcome_cvs();

/// alpha1 = 1/g^2
std::vector<PinnedExpr> three_outcome_pins();

/// Exact expressions for the operators above, as scenario strings.
namespace expressions {
inline constexpr const char *polarization_plus = "sqrt((1+g)/2)";
inline constexpr const char *polarization_minus = "sqrt((1-g)/2)";
inline constexpr const char *three_outcome_alpha1 = "1/g^2";
inline constexpr const char *three_outcome_alpha2 = "1/g^2-1/(2*g)";
inline constexpr const char *three_outcome_alpha3 =
    "-(4*g^3-12*g^2+g-4)/(4*g^2*(4*g^2-1))";
} // namespace expressions

} // namespace cvlab
