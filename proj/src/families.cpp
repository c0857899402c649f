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


#include "cvlab/families.hpp"

#include "cvlab/errors.hpp"

namespace cvlab {

namespace {

OperatorTable diagonal(const ParamExpr &a, const ParamExpr &b) {
    return {2, {a, ParamExpr::number(0), ParamExpr::number(0), b}};
}

OperatorTable polarization_plus() {
    return diagonal(parse_expression(expressions::polarization_plus),
                    parse_expression(expressions::polarization_minus));
}

OperatorTable polarization_minus() {
    return diagonal(parse_expression(expressions::polarization_minus),
                    parse_expression(expressions::polarization_plus));
}

/// Table for exp(i g h) built from the spectral decomposition of h.
OperatorTable exp_igh(const ComplexMatrix &h) {
    const auto spectral = spectral_decompose(h);
    const Index d = h.rows();
    const ParamExpr ig = ParamExpr::imaginary_unit() * ParamExpr::variable();
    std::vector<ParamExpr> entries;
    for (Index r = 0; r < d; ++r) {
        for (Index c = 0; c < d; ++c) {
            ParamExpr sum;
            bool first = true;
            for (std::size_t k = 0; k < spectral.eigenvalues.size(); ++k) {
                const ParamExpr term =
                    ParamExpr::constant(spectral.projectors[k](r, c)) *
                    exp(ig * ParamExpr::number(spectral.eigenvalues[k]));
                sum = first ? term : sum + term;
                first = false;
            }
            entries.push_back(sum);
        }
    }
    return {d, std::move(entries)};
}

} // namespace

MeasurementFamily polarization_family() {
    return MeasurementFamily::singly_indexed(
        "polarization", 2, {polarization_plus(), polarization_minus()},
        ValidityRange{-1.0, 1.0});
}

CvFamily polarization_cvs() {
    return CvFamily::closed_form({parse_expression("1/g"), parse_expression("-1/g")});
}

MeasurementFamily twisted_polarization_family(const ComplexMatrix &h) {
    if (h.rows() != 2 || h.cols() != 2) {
        throw DimensionError("twist generator must be 2x2");
    }
    return MeasurementFamily::singly_indexed(
        "twisted polarization", 2, {exp_igh(h) * polarization_plus(), polarization_minus()},
        ValidityRange{-1.0, 1.0});
}

MeasurementFamily three_outcome_family() {
    const ParamExpr m3 = parse_expression("sqrt(1/2-2*g^2)");
    return MeasurementFamily::singly_indexed(
        "three-outcome positive", 2,
        {diagonal(parse_expression("1/2+g"), parse_expression("1/2-g")),
         diagonal(parse_expression("1/2-g"), parse_expression("1/2+g")),
         diagonal(m3, m3)},
        ValidityRange{-0.5, 0.5});
}

CvFamily three_outcome_cvs() {
    return CvFamily::closed_form({parse_expression(expressions::three_outcome_alpha1),
                                  parse_expression(expressions::three_outcome_alpha2),
                                  parse_expression(expressions::three_outcome_alpha3)});
}

std::vector<PinnedExpr> three_outcome_pins() {
    return {{0, parse_expression(expressions::three_outcome_alpha1)}};
}

} // namespace cvlab
