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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvlab/expr.hpp"
#include "cvlab/grid.hpp"
#include "cvlab/matrix.hpp"

namespace cvlab {

namespace tolerance {
/// ||sum_j E_j - I||_F accepted as complete
inline constexpr double completeness = 1e-10;
/// outcome / postselection probabilities at or below this are degenerate
inline constexpr double degenerate_probability = 1e-14;
/// log-log slope a disturbance fit must exceed to count as vanishing
inline constexpr double weak_slope = 1e-3;
} // namespace tolerance

/// A d x d table of g-dependent scalar expressions (row-major).
class OperatorTable {
  public:
    OperatorTable(Index dim, std::vector<ParamExpr> entries);

    /// Table of literal constants reproducing `m` exactly.
    static OperatorTable constant(const ComplexMatrix &m);

    [[nodiscard]] Index dim() const { return dim_; }
    [[nodiscard]] const ParamExpr &at(Index row, Index col) const;

    /// Negative real sqrt arguments raise DomainError.
    [[nodiscard]] ComplexMatrix evaluate(double g) const;

  private:
    Index dim_;
    std::vector<ParamExpr> entries_;
};

/// Symbolic matrix product of two tables.
OperatorTable operator*(const OperatorTable &a, const OperatorTable &b);

/// Closed interval of g on which a family is declared valid.
struct ValidityRange {
    double lo = 0.0;
    double hi = 1.0;

    [[nodiscard]] bool contains(double g) const { return g >= lo && g <= hi; }
};

/// g-parameterized measurement operators. Outcome j holds its Kraus
/// operators M_{j,1..k_j}; a singly indexed family has k_j = 1 throughout.
class MeasurementFamily {
  public:
    MeasurementFamily(std::string label, Index dim,
                      std::vector<std::vector<OperatorTable>> outcomes,
                      std::optional<ValidityRange> validity = std::nullopt);

    static MeasurementFamily
    singly_indexed(std::string label, Index dim, std::vector<OperatorTable> operators,
                   std::optional<ValidityRange> validity = std::nullopt);

    [[nodiscard]] const std::string &label() const { return label_; }
    [[nodiscard]] Index dim() const { return dim_; }
    [[nodiscard]] Index outcome_count() const {
        return static_cast<Index>(outcomes_.size());
    }
    [[nodiscard]] const std::vector<std::vector<OperatorTable>> &outcomes() const {
        return outcomes_;
    }
    [[nodiscard]] const std::optional<ValidityRange> &validity() const {
        return validity_;
    }
    [[nodiscard]] bool doubly_indexed() const;

  private:
    std::string label_;
    Index dim_;
    std::vector<std::vector<OperatorTable>> outcomes_;
    std::optional<ValidityRange> validity_;
};

/// A family instantiated at one g: numeric operators M_{j,i}.
struct Instrument {
    std::vector<std::vector<ComplexMatrix>> outcomes;

    [[nodiscard]] Index dim() const { return outcomes.front().front().rows(); }
    [[nodiscard]] Index outcome_count() const {
        return static_cast<Index>(outcomes.size());
    }
    [[nodiscard]] std::vector<ComplexMatrix> flatten() const;

    static Instrument singly_indexed(std::vector<ComplexMatrix> operators);
};

/// Throws DomainError outside the validity range, and propagates expression
/// failures with their (outcome, kraus, row, col) location.
Instrument evaluate_family(const MeasurementFamily &family, double g);

/// ||sum_{j,i} M^dagger M - I||_F
double completeness_defect(const Instrument &instrument);

/// E_j = sum_i M_{j,i}^dagger M_{j,i}. ModelError if the family is not
/// complete to `tol`.
std::vector<ComplexMatrix> povm(const Instrument &instrument,
                                double tol = tolerance::completeness);
std::vector<ComplexMatrix> povm(const MeasurementFamily &family, double g);

/// Positive, Hermitian, unit-trace operator.
class DensityState {
  public:
    explicit DensityState(ComplexMatrix rho);

    static DensityState pure(const ComplexVector &psi);
    /// Divides a positive operator by its trace.
    static DensityState from_unnormalized(const ComplexMatrix &rho);
    static DensityState maximally_mixed(Index dim);

    [[nodiscard]] const ComplexMatrix &matrix() const { return rho_; }
    [[nodiscard]] Index dim() const { return rho_.rows(); }

  private:
    ComplexMatrix rho_;
};

/// Postselection onto a final pure state f (projector P_f).
class Postselection {
  public:
    /// |f| must be 1 within 1e-12.
    explicit Postselection(const ComplexVector &f);

    static Postselection normalized(const ComplexVector &f);
    /// Any Hermitian idempotent.
    static Postselection from_projector(const ComplexMatrix &p);

    [[nodiscard]] const ComplexMatrix &projector() const { return projector_; }
    [[nodiscard]] const std::optional<ComplexVector> &vector() const { return f_; }
    [[nodiscard]] Index dim() const { return projector_.rows(); }

  private:
    Postselection() = default;
    ComplexMatrix projector_;
    std::optional<ComplexVector> f_;
};

/// tr[E_j rho], clamped to [0, 1].
double probability(const Instrument &instrument, Index outcome,
                   const DensityState &rho);
std::vector<double> probabilities(const Instrument &instrument,
                                  const DensityState &rho);

/// sum_i M_{j,i} rho M_{j,i}^dagger
ComplexMatrix unnormalized_post_state(const Instrument &instrument, Index outcome,
                                      const ComplexMatrix &rho);

/// Normalized post-measurement state; DegenerateError when the outcome has
/// vanishing probability.
DensityState post_state(const Instrument &instrument, Index outcome,
                        const DensityState &rho);

/// Replaces every outcome by the single positive operator E_j^{1/2}.
Instrument coarse_grain(const Instrument &instrument);
MeasurementFamily coarse_grain(const MeasurementFamily &family, double g);

/// Isometric embedding of the system into system (x) meter such that a
/// projective meter measurement reproduces the instrument.
///
/// The meter has one basis vector per Kraus operator, in family order; the
/// combined index is s * meter_dim + m. Meter projector Q_j sums the slots
/// belonging to outcome j.
struct NaimarkDilation {
    ComplexMatrix isometry;
    std::vector<ComplexMatrix> meter_projectors;
    Index system_dim = 0;
    Index meter_dim = 0;

    [[nodiscard]] double meter_probability(Index outcome,
                                           const ComplexMatrix &rho) const;
    /// tr_meter[Q_j V rho V^dagger Q_j]
    [[nodiscard]] ComplexMatrix reduced_post_state(Index outcome,
                                                   const ComplexMatrix &rho) const;
};

NaimarkDilation naimark_dilate(const Instrument &instrument,
                               double tol = tolerance::completeness);

/// One grid point of the disturbance diagnostics. NaN marks a metric that
/// could not be computed at this g; see `notes`.
struct DisturbanceRow {
    double g = 0.0;
    /// max_j ||post_state_j - rho||_F over non-degenerate outcomes
    double state_disturbance = 0.0;
    /// max_{j,i} of the same distance for single Kraus operators
    double kraus_disturbance = 0.0;
    /// max_{j,i} ||[U_{j,i}(g), rho]||_F, U from the polar decomposition
    double unitary_commutator = 0.0;
    /// ||sum_{j,i} M rho M^dagger - rho||_F
    double aggregate_disturbance = 0.0;
    /// max_{j,i} ||U(2g) - U(g) U(g)||_F
    double group_residual = 0.0;
    std::vector<std::string> notes;
};

struct DisturbanceReport {
    std::vector<DisturbanceRow> rows;
    LogLogFit state_fit;
    LogLogFit kraus_fit;
    LogLogFit unitary_fit;
    LogLogFit aggregate_fit;
    LogLogFit group_fit;
    /// State disturbance vanishes or has positive log-log slope.
    bool certified_weak = false;
};

DisturbanceReport disturbance_diagnostics(const MeasurementFamily &family,
                                          const DensityState &rho,
                                          std::span<const double> grid);

/// Runs the diagnostics over one decade below g0 (8 points per decade).
bool certified_weak(const MeasurementFamily &family, const DensityState &rho,
                    double g0 = 0.1);

} // namespace cvlab
