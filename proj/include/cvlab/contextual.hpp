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

#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "cvlab/expr.hpp"
#include "cvlab/matrix.hpp"
#include "cvlab/measurement.hpp"

namespace cvlab {

namespace tolerance {
/// solvable <=> residual <= cv_residual * max(1, ||A||_F) * (1 + max_j |alpha_j|)
inline constexpr double cv_residual = 1e-8;
/// RMS log residual above which a divergence fit is not a power law
inline constexpr double power_law_residual = 0.05;
} // namespace tolerance

/// Hermitian operator whose expectation is being measured.
class Observable {
  public:
    explicit Observable(ComplexMatrix a);

    [[nodiscard]] const ComplexMatrix &matrix() const { return a_; }
    [[nodiscard]] Index dim() const { return a_.rows(); }

  private:
    ComplexMatrix a_;
};

/// Fixed value for one contextual value (0-based index).
struct PinnedValue {
    Index index = 0;
    double value = 0.0;
};

/// Pin given as an expression in g, e.g. alpha1 = 1/g^2.
struct PinnedExpr {
    Index index = 0;
    ParamExpr value;
};

struct CvSolution {
    std::vector<double> alphas;
    /// ||sum_j alpha_j E_j - A||_F
    double residual = 0.0;
    bool solvable = false;
    std::vector<PinnedValue> pinned;

    [[nodiscard]] double max_abs_alpha() const;
};

/// Coordinates of a Hermitian matrix in an orthonormal real basis of the
/// Hermitian matrices (diagonal entries, then sqrt(2) Re and sqrt(2) Im of
/// the strict upper triangle). Hilbert-Schmidt inner products become dot
/// products.
RealVector hermitian_coordinates(const ComplexMatrix &h);

/// Solves sum_j alpha_j E_j = A for real alpha. Free entries take the
/// minimum-norm least-squares solution of the reduced system.
CvSolution solve_cv(const Observable &a, std::span<const ComplexMatrix> povm,
                    std::span<const PinnedValue> pinned = {});

/// Parses "alpha1=1/g^2, alpha3=0" (1-based indices).
std::vector<PinnedExpr> parse_pin_spec(std::string_view text);

struct CvSample {
    double g = 0.0;
    CvSolution solution;
};

/// Contextual values as functions of g: closed-form expressions, an
/// on-demand solve against a family, or a sampled table.
class CvFamily {
  public:
    static CvFamily closed_form(std::vector<ParamExpr> alphas);
    static CvFamily solved(MeasurementFamily family, Observable a,
                           std::vector<PinnedExpr> pins = {});
    static CvFamily sampled(std::vector<CvSample> samples);

    /// Sampled families only answer at their sample points.
    [[nodiscard]] std::vector<double> alphas(double g) const;

    [[nodiscard]] bool is_closed_form() const;
    [[nodiscard]] bool is_sampled() const;
    [[nodiscard]] const std::vector<ParamExpr> &expressions() const;
    [[nodiscard]] const std::vector<CvSample> &samples() const;

  private:
    struct Solved {
        MeasurementFamily family;
        Observable observable;
        std::vector<PinnedExpr> pins;
    };
    using Source = std::variant<std::vector<ParamExpr>, Solved, std::vector<CvSample>>;

    explicit CvFamily(Source source) : source_(std::move(source)) {}
    Source source_;
};

/// Solves at every grid point; unsolvable points are recorded, not fatal.
CvFamily cv_family(const MeasurementFamily &family, const Observable &a,
                   std::span<const double> grid,
                   std::span<const PinnedExpr> pins = {});

/// Fit of |alpha_j(g)| ~ c_j / g^{k_j}.
struct DivergenceFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double rms_residual = 0.0;
    bool power_law = false;
};

/// Needs at least one decade of g and 8 points per decade.
std::vector<DivergenceFit> divergence_order(const CvFamily &cvf,
                                            std::span<const double> grid);

} // namespace cvlab
