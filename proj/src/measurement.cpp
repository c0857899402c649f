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

#include "cvlab/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvlab/errors.hpp"

namespace cvlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string location(std::size_t j, std::size_t i, Index r, Index c) {
    return "outcome " + std::to_string(j + 1) + ", operator " +
           std::to_string(i + 1) + ", entry (" + std::to_string(r + 1) + "," +
           std::to_string(c + 1) + "): ";
}

double max_or_nan(double current, double candidate) {
    if (std::isnan(current)) {
        return candidate;
    }
    return std::max(current, candidate);
}

} // namespace

// ---------------------------------------------------------------------------
// OperatorTable

OperatorTable::OperatorTable(Index dim, std::vector<ParamExpr> entries)
    : dim_(dim), entries_(std::move(entries)) {
    if (dim < 1) {
        throw DimensionError("operator table dimension must be >= 1");
    }
    if (static_cast<Index>(entries_.size()) != dim * dim) {
        throw DimensionError("operator table needs " + std::to_string(dim * dim) +
                             " entries, got " + std::to_string(entries_.size()));
    }
}

OperatorTable OperatorTable::constant(const ComplexMatrix &m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("operator table must be square");
    }
    std::vector<ParamExpr> entries;
    entries.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            entries.push_back(ParamExpr::constant(m(r, c)));
        }
    }
    return {m.rows(), std::move(entries)};
}

const ParamExpr &OperatorTable::at(Index row, Index col) const {
    return entries_.at(static_cast<std::size_t>(row * dim_ + col));
}

ComplexMatrix OperatorTable::evaluate(double g) const {
    ComplexMatrix m(dim_, dim_);
    for (Index r = 0; r < dim_; ++r) {
        for (Index c = 0; c < dim_; ++c) {
            m(r, c) = cvlab::evaluate(at(r, c), g, SqrtDomain::nonnegative_real);
        }
    }
    return m;
}

OperatorTable operator*(const OperatorTable &a, const OperatorTable &b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("operator table product: dimensions differ");
    }
    const Index d = a.dim();
    std::vector<ParamExpr> entries;
    entries.reserve(static_cast<std::size_t>(d * d));
    for (Index r = 0; r < d; ++r) {
        for (Index c = 0; c < d; ++c) {
            ParamExpr sum = a.at(r, 0) * b.at(0, c);
            for (Index k = 1; k < d; ++k) {
                sum = sum + a.at(r, k) * b.at(k, c);
            }
            entries.push_back(std::move(sum));
        }
    }
    return {d, std::move(entries)};
}

// ---------------------------------------------------------------------------
// MeasurementFamily

MeasurementFamily::MeasurementFamily(std::string label, Index dim,
                                     std::vector<std::vector<OperatorTable>> outcomes,
                                     std::optional<ValidityRange> validity)
    : label_(std::move(label)), dim_(dim), outcomes_(std::move(outcomes)),
      validity_(validity) {
    if (outcomes_.empty()) {
        throw ModelError("measurement family '" + label_ + "' has no outcomes");
    }
    for (std::size_t j = 0; j < outcomes_.size(); ++j) {
        if (outcomes_[j].empty()) {
            throw ModelError("outcome " + std::to_string(j + 1) + " of '" +
                             label_ + "' has no operators");
        }
        for (const auto &table : outcomes_[j]) {
            if (table.dim() != dim_) {
                throw DimensionError("outcome " + std::to_string(j + 1) + " of '" +
                                     label_ + "' has dimension " +
                                     std::to_string(table.dim()) + ", expected " +
                                     std::to_string(dim_));
            }
        }
    }
    if (validity_ && !(validity_->lo <= validity_->hi)) {
        throw DomainError("validity range of '" + label_ + "' is empty");
    }
}

MeasurementFamily MeasurementFamily::singly_indexed(std::string label, Index dim,
                                                    std::vector<OperatorTable> operators,
                                                    std::optional<ValidityRange> validity) {
    std::vector<std::vector<OperatorTable>> outcomes;
    outcomes.reserve(operators.size());
    for (auto &op : operators) {
        outcomes.push_back({std::move(op)});
    }
    return {std::move(label), dim, std::move(outcomes), validity};
}

bool MeasurementFamily::doubly_indexed() const {
    return std::any_of(outcomes_.begin(), outcomes_.end(),
                       [](const auto &o) { return o.size() > 1; });
}

// ---------------------------------------------------------------------------
// Instrument

std::vector<ComplexMatrix> Instrument::flatten() const {
    std::vector<ComplexMatrix> out;
    for (const auto &outcome : outcomes) {
        out.insert(out.end(), outcome.begin(), outcome.end());
    }
    return out;
}

Instrument Instrument::singly_indexed(std::vector<ComplexMatrix> operators) {
    Instrument out;
    for (auto &m : operators) {
        out.outcomes.push_back({std::move(m)});
    }
    return out;
}

Instrument evaluate_family(const MeasurementFamily &family, double g) {
    if (!std::isfinite(g)) {
        throw DomainError("g must be finite");
    }
    if (family.validity() && !family.validity()->contains(g)) {
        throw DomainError("g=" + std::to_string(g) + " lies outside the validity range [" +
                          std::to_string(family.validity()->lo) + ", " +
                          std::to_string(family.validity()->hi) + "] of '" +
                          family.label() + "'");
    }
    const Index d = family.dim();
    Instrument out;
    out.outcomes.reserve(family.outcomes().size());
    for (std::size_t j = 0; j < family.outcomes().size(); ++j) {
        std::vector<ComplexMatrix> kraus;
        for (std::size_t i = 0; i < family.outcomes()[j].size(); ++i) {
            const auto &table = family.outcomes()[j][i];
            ComplexMatrix m(d, d);
            for (Index r = 0; r < d; ++r) {
                for (Index c = 0; c < d; ++c) {
                    try {
                        m(r, c) = cvlab::evaluate(table.at(r, c), g,
                                                  SqrtDomain::nonnegative_real);
                    } catch (const EvalError &e) {
                        throw EvalError(location(j, i, r, c) + e.what());
                    } catch (const DomainError &e) {
                        throw DomainError(location(j, i, r, c) + e.what());
                    }
                    if (!std::isfinite(m(r, c).real()) ||
                        !std::isfinite(m(r, c).imag())) {
                        throw EvalError(location(j, i, r, c) +
                                        "non-finite value at g=" + std::to_string(g));
                    }
                }
            }
            kraus.push_back(std::move(m));
        }
        out.outcomes.push_back(std::move(kraus));
    }
    return out;
}

double completeness_defect(const Instrument &instrument) {
    const Index d = instrument.dim();
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const auto &outcome : instrument.outcomes) {
        for (const auto &m : outcome) {
            sum += m.adjoint() * m;
        }
    }
    return (sum - ComplexMatrix::Identity(d, d)).norm();
}

std::vector<ComplexMatrix> povm(const Instrument &instrument, double tol) {
    const double defect = completeness_defect(instrument);
    if (!(defect <= tol)) {
        throw ModelError("measurement operators are not complete: ||sum M^dagger M - I||_F = " +
                         std::to_string(defect));
    }
    std::vector<ComplexMatrix> out;
    out.reserve(instrument.outcomes.size());
    const Index d = instrument.dim();
    for (const auto &outcome : instrument.outcomes) {
        ComplexMatrix e = ComplexMatrix::Zero(d, d);
        for (const auto &m : outcome) {
            e += m.adjoint() * m;
        }
        out.emplace_back((e + e.adjoint()) / 2.0);
    }
    return out;
}

std::vector<ComplexMatrix> povm(const MeasurementFamily &family, double g) {
    return povm(evaluate_family(family, g));
}

// ---------------------------------------------------------------------------
// States

DensityState::DensityState(ComplexMatrix rho) {
    if (rho.rows() != rho.cols()) {
        throw DimensionError("density matrix must be square");
    }
    if (!all_finite(rho)) {
        throw DomainError("density matrix entries must be finite");
    }
    if (!is_hermitian(rho)) {
        throw DomainError("density matrix is not Hermitian");
    }
    rho_ = (rho + rho.adjoint()) / 2.0;
    const double tr = rho_.trace().real();
    if (std::abs(tr - 1.0) > 1e-10) {
        throw DomainError("density matrix trace is " + std::to_string(tr) +
                          ", expected 1");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho_,
                                                        Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
        throw DomainError("density matrix is not positive semidefinite");
    }
}

DensityState DensityState::pure(const ComplexVector &psi) {
    return DensityState(projector_onto(psi));
}

DensityState DensityState::from_unnormalized(const ComplexMatrix &rho) {
    if (rho.rows() != rho.cols()) {
        throw DimensionError("density matrix must be square");
    }
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) {
        throw DomainError("operator has nonpositive trace");
    }
    return DensityState(rho / tr);
}

DensityState DensityState::maximally_mixed(Index dim) {
    return DensityState(ComplexMatrix::Identity(dim, dim) /
                        static_cast<double>(dim));
}

Postselection::Postselection(const ComplexVector &f) {
    if (f.size() < 1) {
        throw DimensionError("postselection vector is empty");
    }
    if (std::abs(f.norm() - 1.0) > 1e-12) {
        throw DomainError("postselection vector must have norm 1, has " +
                          std::to_string(f.norm()));
    }
    f_ = f;
    projector_ = f * f.adjoint();
}

Postselection Postselection::normalized(const ComplexVector &f) {
    const double n = f.norm();
    if (!(n > 0.0)) {
        throw DomainError("postselection vector is zero");
    }
    return Postselection(ComplexVector(f / n));
}

Postselection Postselection::from_projector(const ComplexMatrix &p) {
    require_hermitian(p, "postselection projector");
    if ((p * p - p).norm() > 1e-10 * std::max(1.0, p.norm())) {
        throw DomainError("postselection projector is not idempotent");
    }
    if (p.norm() < 0.5) {
        throw DomainError("postselection projector is zero");
    }
    Postselection out;
    out.projector_ = (p + p.adjoint()) / 2.0;
    return out;
}

// ---------------------------------------------------------------------------
// Probabilities and post-measurement states

ComplexMatrix unnormalized_post_state(const Instrument &instrument, Index outcome,
                                      const ComplexMatrix &rho) {
    if (outcome < 0 || outcome >= instrument.outcome_count()) {
        throw std::out_of_range("outcome index " + std::to_string(outcome) +
                                " out of range");
    }
    if (rho.rows() != instrument.dim() || rho.cols() != instrument.dim()) {
        throw DimensionError("state dimension does not match the instrument");
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const auto &m : instrument.outcomes[static_cast<std::size_t>(outcome)]) {
        out += m * rho * m.adjoint();
    }
    return out;
}

double probability(const Instrument &instrument, Index outcome,
                   const DensityState &rho) {
    const double p =
        unnormalized_post_state(instrument, outcome, rho.matrix()).trace().real();
    return std::clamp(p, 0.0, 1.0);
}

std::vector<double> probabilities(const Instrument &instrument,
                                  const DensityState &rho) {
    std::vector<double> out;
    for (Index j = 0; j < instrument.outcome_count(); ++j) {
        out.push_back(probability(instrument, j, rho));
    }
    return out;
}

DensityState post_state(const Instrument &instrument, Index outcome,
                        const DensityState &rho) {
    const ComplexMatrix x = unnormalized_post_state(instrument, outcome, rho.matrix());
    const double p = x.trace().real();
    if (!(p > tolerance::degenerate_probability)) {
        throw DegenerateError("outcome " + std::to_string(outcome + 1) +
                              " has vanishing probability");
    }
    return DensityState(x / p);
}

Instrument coarse_grain(const Instrument &instrument) {
    Instrument out;
    const Index d = instrument.dim();
    for (const auto &outcome : instrument.outcomes) {
        ComplexMatrix e = ComplexMatrix::Zero(d, d);
        for (const auto &m : outcome) {
            e += m.adjoint() * m;
        }
        out.outcomes.push_back({matrix_sqrt(ComplexMatrix((e + e.adjoint()) / 2.0))});
    }
    return out;
}

MeasurementFamily coarse_grain(const MeasurementFamily &family, double g) {
    const Instrument coarse = coarse_grain(evaluate_family(family, g));
    std::vector<OperatorTable> tables;
    for (const auto &outcome : coarse.outcomes) {
        tables.push_back(OperatorTable::constant(outcome.front()));
    }
    return MeasurementFamily::singly_indexed(family.label() + " (coarse-grained)",
                                             family.dim(), std::move(tables),
                                             ValidityRange{g, g});
}

// ---------------------------------------------------------------------------
// Dilation

NaimarkDilation naimark_dilate(const Instrument &instrument, double tol) {
    const double defect = completeness_defect(instrument);
    if (!(defect <= tol)) {
        throw ModelError("cannot dilate an incomplete family: ||sum M^dagger M - I||_F = " +
                         std::to_string(defect));
    }
    NaimarkDilation out;
    out.system_dim = instrument.dim();
    for (const auto &outcome : instrument.outcomes) {
        out.meter_dim += static_cast<Index>(outcome.size());
    }
    const Index d = out.system_dim;
    const Index n = out.meter_dim;
    out.isometry = ComplexMatrix::Zero(d * n, d);
    Index slot = 0;
    for (const auto &outcome : instrument.outcomes) {
        ComplexMatrix meter = ComplexMatrix::Zero(n, n);
        for (const auto &m : outcome) {
            for (Index r = 0; r < d; ++r) {
                out.isometry.row(r * n + slot) = m.row(r);
            }
            meter(slot, slot) = 1.0;
            ++slot;
        }
        out.meter_projectors.push_back(kron(ComplexMatrix(ComplexMatrix::Identity(d, d)), meter));
    }
    return out;
}

double NaimarkDilation::meter_probability(Index outcome, const ComplexMatrix &rho) const {
    const auto &q = meter_projectors.at(static_cast<std::size_t>(outcome));
    return (q * isometry * rho * isometry.adjoint()).trace().real();
}

ComplexMatrix NaimarkDilation::reduced_post_state(Index outcome,
                                                  const ComplexMatrix &rho) const {
    const auto &q = meter_projectors.at(static_cast<std::size_t>(outcome));
    const ComplexMatrix joint = q * isometry * rho * isometry.adjoint() * q;
    return partial_trace_second(joint, system_dim, meter_dim);
}

// ---------------------------------------------------------------------------
// Disturbance diagnostics

namespace {

std::vector<ComplexMatrix> unitary_parts(const Instrument &instrument) {
    std::vector<ComplexMatrix> out;
    for (const auto &m : instrument.flatten()) {
        out.push_back(polar_decompose(m).unitary);
    }
    return out;
}

LogLogFit fit_column(const std::vector<DisturbanceRow> &rows,
                     double DisturbanceRow::*field) {
    std::vector<double> g;
    std::vector<double> v;
    for (const auto &row : rows) {
        g.push_back(row.g);
        v.push_back(row.*field);
    }
    return fit_log_log(g, v);
}

} // namespace

DisturbanceReport disturbance_diagnostics(const MeasurementFamily &family,
                                          const DensityState &rho,
                                          std::span<const double> grid) {
    if (rho.dim() != family.dim()) {
        throw DimensionError("state dimension does not match the family");
    }
    const ComplexMatrix &r = rho.matrix();
    DisturbanceReport report;
    for (const double g : grid) {
        const Instrument inst = evaluate_family(family, g);
        DisturbanceRow row;
        row.g = g;
        row.state_disturbance = kNaN;
        row.kraus_disturbance = kNaN;
        row.unitary_commutator = kNaN;
        row.group_residual = kNaN;

        ComplexMatrix aggregate = ComplexMatrix::Zero(r.rows(), r.cols());
        for (Index j = 0; j < inst.outcome_count(); ++j) {
            const ComplexMatrix x = unnormalized_post_state(inst, j, r);
            aggregate += x;
            const double p = x.trace().real();
            if (p > tolerance::degenerate_probability) {
                row.state_disturbance =
                    max_or_nan(row.state_disturbance, (x / p - r).norm());
            } else {
                row.notes.push_back("outcome " + std::to_string(j + 1) +
                                    " degenerate, skipped");
            }
            const auto &kraus = inst.outcomes[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < kraus.size(); ++i) {
                const ComplexMatrix y = kraus[i] * r * kraus[i].adjoint();
                const double q = y.trace().real();
                if (q > tolerance::degenerate_probability) {
                    row.kraus_disturbance =
                        max_or_nan(row.kraus_disturbance, (y / q - r).norm());
                } else if (kraus.size() > 1) {
                    row.notes.push_back("operator (" + std::to_string(j + 1) + "," +
                                        std::to_string(i + 1) +
                                        ") degenerate, skipped");
                }
            }
        }
        row.aggregate_disturbance = (aggregate - r).norm();

        const auto units = unitary_parts(inst);
        for (const auto &u : units) {
            row.unitary_commutator =
                max_or_nan(row.unitary_commutator, commutator(u, r).norm());
        }

        const double doubled = 2.0 * g;
        if (family.validity() && !family.validity()->contains(doubled)) {
            row.notes.push_back("group law skipped: 2g outside validity range");
        } else {
            try {
                const auto units2 = unitary_parts(evaluate_family(family, doubled));
                for (std::size_t k = 0; k < units.size(); ++k) {
                    row.group_residual = max_or_nan(
                        row.group_residual, (units2[k] - units[k] * units[k]).norm());
                }
            } catch (const std::exception &e) {
                row.notes.push_back(std::string("group law skipped: ") + e.what());
            }
        }
        report.rows.push_back(std::move(row));
    }

    report.state_fit = fit_column(report.rows, &DisturbanceRow::state_disturbance);
    report.kraus_fit = fit_column(report.rows, &DisturbanceRow::kraus_disturbance);
    report.unitary_fit = fit_column(report.rows, &DisturbanceRow::unitary_commutator);
    report.aggregate_fit =
        fit_column(report.rows, &DisturbanceRow::aggregate_disturbance);
    report.group_fit = fit_column(report.rows, &DisturbanceRow::group_residual);

    const bool vanishing = std::all_of(
        report.rows.begin(), report.rows.end(), [](const DisturbanceRow &row) {
            return !(row.state_disturbance > tolerance::degenerate_probability);
        });
    report.certified_weak =
        vanishing || (report.state_fit.valid() && report.state_fit.slope > tolerance::weak_slope);
    return report;
}

bool certified_weak(const MeasurementFamily &family, const DensityState &rho,
                    double g0) {
    const auto grid = log_grid(g0 / 10.0, g0, 8);
    return disturbance_diagnostics(family, rho, grid).certified_weak;
}

} // namespace cvlab
