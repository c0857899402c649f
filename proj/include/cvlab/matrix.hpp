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

/// Dense complex linear algebra for small operators (d <= 16).
///
/// Everything here is a free function over Eigen types, templated on the
/// real scalar. The rest of the library works with the double-precision
/// aliases `ComplexMatrix` / `ComplexVector`.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvlab/errors.hpp"

namespace cvlab {

using Index = Eigen::Index;

template <typename Real>
using MatrixX = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using VectorX = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = MatrixX<double>;
using ComplexVector = VectorX<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace tolerance {
/// ||m - m^dagger||_F <= hermitian * max(1, ||m||_F)
inline constexpr double hermitian = 1e-10;
/// |a_k - a_l| <= degeneracy * max(1, spectral radius) merges eigenspaces
inline constexpr double degeneracy = 1e-9;
/// singular values <= pinv_cutoff * sigma_max count as zero
inline constexpr double pinv_cutoff = 1e-12;
/// eigenvalues >= -psd * max(1, ||p||_F) are accepted as nonnegative
inline constexpr double psd = 1e-10;
} // namespace tolerance

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived> &m) {
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            const auto z = std::complex<double>(m(r, c));
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                return false;
            }
        }
    }
    return true;
}

/// Builds a matrix from row-major entries, enforcing shape and finiteness.
template <typename Real>
MatrixX<Real> make_matrix(Index rows, Index cols,
                          std::span<const std::complex<Real>> entries) {
    if (rows < 1 || cols < 1) {
        throw DimensionError("matrix must have at least one row and column");
    }
    if (static_cast<Index>(entries.size()) != rows * cols) {
        throw DimensionError("expected " + std::to_string(rows * cols) +
                             " entries, got " + std::to_string(entries.size()));
    }
    MatrixX<Real> m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = entries[static_cast<std::size_t>(r * cols + c)];
        }
    }
    if (!all_finite(m)) {
        throw DomainError("matrix entries must be finite");
    }
    return m;
}

template <typename Real = double>
MatrixX<Real> identity(Index dim) {
    return MatrixX<Real>::Identity(dim, dim);
}

namespace detail {
inline void require_same_shape(Index r1, Index c1, Index r2, Index c2,
                               const char *what) {
    if (r1 != r2 || c1 != c2) {
        throw DimensionError(std::string(what) + ": shape " +
                             std::to_string(r1) + "x" + std::to_string(c1) +
                             " vs " + std::to_string(r2) + "x" +
                             std::to_string(c2));
    }
}
inline void require_square(Index r, Index c, const char *what) {
    if (r != c) {
        throw DimensionError(std::string(what) + ": matrix is " +
                             std::to_string(r) + "x" + std::to_string(c) +
                             ", expected square");
    }
}
} // namespace detail

template <typename Real>
MatrixX<Real> multiply(const MatrixX<Real> &a, const MatrixX<Real> &b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("multiply: inner dimensions " +
                             std::to_string(a.cols()) + " and " +
                             std::to_string(b.rows()) + " differ");
    }
    return a * b;
}

template <typename Real>
MatrixX<Real> add(const MatrixX<Real> &a, const MatrixX<Real> &b) {
    detail::require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(), "add");
    return a + b;
}

template <typename Real>
MatrixX<Real> scale(const MatrixX<Real> &a, std::complex<Real> factor) {
    return factor * a;
}

template <typename Real>
MatrixX<Real> adjoint(const MatrixX<Real> &a) {
    return a.adjoint();
}

/// Standard trace, tr I = d.
template <typename Real>
std::complex<Real> trace(const MatrixX<Real> &a) {
    detail::require_square(a.rows(), a.cols(), "trace");
    return a.trace();
}

/// [a, b] = ab - ba
template <typename Real>
MatrixX<Real> commutator(const MatrixX<Real> &a, const MatrixX<Real> &b) {
    detail::require_square(a.rows(), a.cols(), "commutator");
    detail::require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(),
                               "commutator");
    return a * b - b * a;
}

/// {a, b} = ab + ba
template <typename Real>
MatrixX<Real> anticommutator(const MatrixX<Real> &a, const MatrixX<Real> &b) {
    detail::require_square(a.rows(), a.cols(), "anticommutator");
    detail::require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(),
                               "anticommutator");
    return a * b + b * a;
}

template <typename Real>
bool is_hermitian(const MatrixX<Real> &m,
                  Real rel_tol = Real(tolerance::hermitian)) {
    if (m.rows() != m.cols()) {
        return false;
    }
    const Real scale_ = std::max<Real>(Real(1), m.norm());
    return (m - m.adjoint()).norm() <= rel_tol * scale_;
}

template <typename Real>
void require_hermitian(const MatrixX<Real> &m, const char *what) {
    detail::require_square(m.rows(), m.cols(), what);
    if (!is_hermitian(m)) {
        throw DomainError(std::string(what) + ": matrix is not Hermitian");
    }
}

/// Spectral decomposition h = sum_k a_k P_k with distinct a_k ascending.
template <typename Real>
struct SpectralDecomposition {
    std::vector<Real> eigenvalues;
    std::vector<MatrixX<Real>> projectors;

    [[nodiscard]] MatrixX<Real> reconstruct() const {
        MatrixX<Real> out = MatrixX<Real>::Zero(projectors.front().rows(),
                                                projectors.front().cols());
        for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
            out += eigenvalues[k] * projectors[k];
        }
        return out;
    }
};

template <typename Real>
SpectralDecomposition<Real> spectral_decompose(const MatrixX<Real> &h) {
    require_hermitian(h, "spectral_decompose");
    const MatrixX<Real> sym = (h + h.adjoint()) / Real(2);
    Eigen::SelfAdjointEigenSolver<MatrixX<Real>> solver(sym);
    const auto &values = solver.eigenvalues();
    const auto &vectors = solver.eigenvectors();

    const Real radius = values.cwiseAbs().maxCoeff();
    const Real merge = Real(tolerance::degeneracy) * std::max(Real(1), radius);

    SpectralDecomposition<Real> out;
    Index k = 0;
    const Index n = values.size();
    while (k < n) {
        Index end = k + 1;
        while (end < n && values(end) - values(k) <= merge) {
            ++end;
        }
        const auto block = vectors.middleCols(k, end - k);
        out.eigenvalues.push_back(values.segment(k, end - k).mean());
        out.projectors.push_back(block * block.adjoint());
        k = end;
    }
    return out;
}

template <typename Real>
struct PolarDecomposition {
    MatrixX<Real> unitary;
    MatrixX<Real> positive;
};

/// m = U P with U unitary and P = (m^dagger m)^{1/2}. For singular m the
/// unitary factor on the null space is whatever completion the SVD yields,
/// which is deterministic for a given input.
template <typename Real>
PolarDecomposition<Real> polar_decompose(const MatrixX<Real> &m) {
    detail::require_square(m.rows(), m.cols(), "polar_decompose");
    Eigen::JacobiSVD<MatrixX<Real>> svd(m, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
    const MatrixX<Real> &w = svd.matrixU();
    const MatrixX<Real> &v = svd.matrixV();
    PolarDecomposition<Real> out;
    out.unitary = w * v.adjoint();
    out.positive = v * svd.singularValues()
                           .template cast<std::complex<Real>>()
                           .asDiagonal() *
                   v.adjoint();
    out.positive = (out.positive + out.positive.adjoint()) / Real(2);
    return out;
}

/// Moore-Penrose pseudoinverse of a real or complex matrix: the inverse of
/// m restricted to its initial space, extended by zero on range(m)^perp.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
pseudoinverse(const Eigen::MatrixBase<Derived> &m,
              typename Derived::RealScalar cutoff = tolerance::pinv_cutoff) {
    using Scalar = typename Derived::Scalar;
    using Real = typename Derived::RealScalar;
    using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    const Dense a = m;
    Eigen::JacobiSVD<Dense> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sigma = svd.singularValues();
    Dense out = Dense::Zero(a.cols(), a.rows());
    if (sigma.size() == 0 || sigma(0) == Real(0)) {
        return out;
    }
    const Real threshold = cutoff * sigma(0);
    for (Index k = 0; k < sigma.size(); ++k) {
        if (sigma(k) <= threshold) {
            break;
        }
        out += (svd.matrixV().col(k) / sigma(k)) *
               svd.matrixU().col(k).adjoint();
    }
    return out;
}

/// Positive square root of a positive semidefinite Hermitian matrix.
template <typename Real>
MatrixX<Real> matrix_sqrt(const MatrixX<Real> &p) {
    require_hermitian(p, "matrix_sqrt");
    const MatrixX<Real> sym = (p + p.adjoint()) / Real(2);
    Eigen::SelfAdjointEigenSolver<MatrixX<Real>> solver(sym);
    const Real floor = -Real(tolerance::psd) * std::max(Real(1), p.norm());
    Eigen::Matrix<Real, Eigen::Dynamic, 1> roots(solver.eigenvalues().size());
    for (Index k = 0; k < roots.size(); ++k) {
        const Real lambda = solver.eigenvalues()(k);
        if (lambda < floor) {
            throw DomainError("matrix_sqrt: negative eigenvalue " +
                              std::to_string(lambda));
        }
        roots(k) = std::sqrt(std::max(lambda, Real(0)));
    }
    const auto &v = solver.eigenvectors();
    MatrixX<Real> out =
        v * roots.template cast<std::complex<Real>>().asDiagonal() *
        v.adjoint();
    return (out + out.adjoint()) / Real(2);
}

/// exp(i t h) for Hermitian h, via its spectral decomposition.
template <typename Real>
MatrixX<Real> hermitian_exp(const MatrixX<Real> &h, Real t) {
    const auto spectral = spectral_decompose(h);
    MatrixX<Real> out = MatrixX<Real>::Zero(h.rows(), h.cols());
    for (std::size_t k = 0; k < spectral.eigenvalues.size(); ++k) {
        out += std::polar(Real(1), t * spectral.eigenvalues[k]) *
               spectral.projectors[k];
    }
    return out;
}

/// Kronecker product a (x) b; the row index of the result is ra * rows(b) + rb.
template <typename Real>
MatrixX<Real> kron(const MatrixX<Real> &a, const MatrixX<Real> &b) {
    MatrixX<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index r = 0; r < a.rows(); ++r) {
        for (Index c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) =
                a(r, c) * b;
        }
    }
    return out;
}

/// Trace over the second factor of a (d1 * d2)-dimensional operator.
template <typename Real>
MatrixX<Real> partial_trace_second(const MatrixX<Real> &m, Index d1, Index d2) {
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2) {
        throw DimensionError("partial_trace_second: operator is not " +
                             std::to_string(d1 * d2) + "-dimensional");
    }
    MatrixX<Real> out = MatrixX<Real>::Zero(d1, d1);
    for (Index r = 0; r < d1; ++r) {
        for (Index c = 0; c < d1; ++c) {
            for (Index k = 0; k < d2; ++k) {
                out(r, c) += m(r * d2 + k, c * d2 + k);
            }
        }
    }
    return out;
}

/// Rank-one projector onto span(v).
template <typename Real>
MatrixX<Real> projector_onto(const VectorX<Real> &v) {
    const Real n2 = v.squaredNorm();
    if (n2 == Real(0)) {
        throw DomainError("projector_onto: zero vector");
    }
    return v * v.adjoint() / n2;
}

} // namespace cvlab
