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

#include <random>

#include "cvlab/matrix.hpp"
#include "cvlab/measurement.hpp"

namespace cvlab::testing {

using Rng = std::mt19937_64;

inline ComplexMatrix random_matrix(Rng &rng, Index rows, Index cols) {
    std::normal_distribution<double> n;
    ComplexMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = Complex(n(rng), n(rng));
        }
    }
    return m;
}

inline ComplexMatrix random_hermitian(Rng &rng, Index d) {
    const ComplexMatrix m = random_matrix(rng, d, d);
    return (m + m.adjoint()) / 2.0;
}

inline ComplexVector random_unit_vector(Rng &rng, Index d) {
    ComplexVector v = random_matrix(rng, d, 1).col(0);
    return v / v.norm();
}

inline DensityState random_density(Rng &rng, Index d) {
    const ComplexMatrix m = random_matrix(rng, d, d);
    return DensityState::from_unnormalized(m * m.adjoint());
}

inline ComplexMatrix random_unitary(Rng &rng, Index d) {
    return polar_decompose(random_matrix(rng, d, d)).unitary;
}

/// Random complete instrument: operators U_k P_k with the P_k rescaled so
/// that the effects sum to the identity.
inline Instrument random_instrument(Rng &rng, Index d, Index outcomes, Index per_outcome = 1) {
    std::vector<std::vector<ComplexMatrix>> raw(static_cast<std::size_t>(outcomes));
    ComplexMatrix total = ComplexMatrix::Zero(d, d);
    for (auto &ops : raw) {
        for (Index i = 0; i < per_outcome; ++i) {
            const ComplexMatrix m = random_matrix(rng, d, d);
            ops.push_back(m);
            total += m.adjoint() * m;
        }
    }
    // M -> M S^{-1/2} with S = sum M^dag M
    const ComplexMatrix s = pseudoinverse(matrix_sqrt(total));
    Instrument out;
    for (auto &ops : raw) {
        std::vector<ComplexMatrix> fixed;
        for (const auto &m : ops) {
            fixed.push_back(m * s);
        }
        out.outcomes.push_back(std::move(fixed));
    }
    return out;
}

inline double relative(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

} // namespace cvlab::testing
