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


#include "cvlab/contextual.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "cvlab/errors.hpp"
#include "cvlab/grid.hpp"

namespace cvlab {

Observable::Observable(ComplexMatrix a) {
    require_hermitian(a, "observable");
    a_ = (a + a.adjoint()) / 2.0;
}

double CvSolution::max_abs_alpha() const {
    double m = 0.0;
    for (const double a : alphas) {
        m = std::max(m, std::abs(a));
    }
    return m;
}

RealVector hermitian_coordinates(const ComplexMatrix &h) {
    const Index d = h.rows();
    RealVector out(d * d);
    Index k = 0;
    for (Index r = 0; r < d; ++r) {
        out(k++) = h(r, r).real();
    }
    const double root2 = std::sqrt(2.0);
    for (Index r = 0; r < d; ++r) {
        for (Index c = r + 1; c < d; ++c) {
            out(k++) = root2 * h(r, c).real();
            out(k++) = root2 * h(r, c).imag();
        }
    }
    return out;
}

CvSolution solve_cv(const Observable &a, std::span<const ComplexMatrix> povm,
                    std::span<const PinnedValue> pinned) {
    if (povm.empty()) {
        throw DimensionError("solve_cv: empty POVM");
    }
    const Index d = a.dim();
    const auto n = static_cast<Index>(povm.size());
    for (const auto &e : povm) {
        if (e.rows() != d || e.cols() != d) {
            throw DimensionError("solve_cv: POVM element is " + std::to_string(e.rows()) +
                                 "x" + std::to_string(e.cols()) +
                                 ", observable is " + std::to_string(d) + "x" +
                                 std::to_string(d));
        }
        require_hermitian(e, "solve_cv POVM element");
    }

    std::vector<bool> is_pinned(static_cast<std::size_t>(n), false);
    CvSolution out;
    out.alphas.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto &p : pinned) {
        if (p.index < 0 || p.index >= n) {
            throw std::out_of_range("pinned index " + std::to_string(p.index + 1) +
                                    " out of range 1.." + std::to_string(n));
        }
        if (is_pinned[static_cast<std::size_t>(p.index)]) {
            throw DomainError("contextual value " + std::to_string(p.index + 1) +
                              " pinned twice");
        }
        if (!std::isfinite(p.value)) {
            throw DomainError("pinned value must be finite");
        }
        is_pinned[static_cast<std::size_t>(p.index)] = true;
        out.alphas[static_cast<std::size_t>(p.index)] = p.value;
        out.pinned.push_back(p);
    }

    RealVector rhs = hermitian_coordinates(a.matrix());
    std::vector<Index> free;
    for (Index j = 0; j < n; ++j) {
        const RealVector column = hermitian_coordinates(povm[static_cast<std::size_t>(j)]);
        if (is_pinned[static_cast<std::size_t>(j)]) {
            rhs -= out.alphas[static_cast<std::size_t>(j)] * column;
        } else {
            free.push_back(j);
        }
    }
    if (!free.empty()) {
        RealMatrix f(d * d, static_cast<Index>(free.size()));
        for (std::size_t k = 0; k < free.size(); ++k) {
            f.col(static_cast<Index>(k)) =
                hermitian_coordinates(povm[static_cast<std::size_t>(free[k])]);
        }
        const RealVector solution = pseudoinverse(f) * rhs;
        for (std::size_t k = 0; k < free.size(); ++k) {
            out.alphas[static_cast<std::size_t>(free[k])] = solution(static_cast<Index>(k));
        }
    }

    ComplexMatrix fit = ComplexMatrix::Zero(d, d);
    for (Index j = 0; j < n; ++j) {
        fit += out.alphas[static_cast<std::size_t>(j)] * povm[static_cast<std::size_t>(j)];
    }
    out.residual = (fit - a.matrix()).norm();
    out.solvable = out.residual <= tolerance::cv_residual *
                                       std::max(1.0, a.matrix().norm()) *
                                       (1.0 + out.max_abs_alpha());
    return out;
}

std::vector<PinnedExpr> parse_pin_spec(std::string_view text) {
    std::vector<PinnedExpr> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view item = text.substr(start, end - start);
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) {
            item.remove_prefix(1);
        }
        if (!item.empty()) {
            const std::size_t eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw ParseError("pin '" + std::string(item) + "' lacks '='", start);
            }
            std::string_view name = item.substr(0, eq);
            while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) {
                name.remove_suffix(1);
            }
            if (name.size() <= 5 || name.substr(0, 5) != "alpha" ||
                !std::all_of(name.begin() + 5, name.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c));
                })) {
                throw ParseError("pin name must be alpha<k>, got '" + std::string(name) + "'",
                                 start);
            }
            const long k = std::stol(std::string(name.substr(5)));
            if (k < 1) {
                throw ParseError("pin index must be >= 1", start);
            }
            out.push_back({static_cast<Index>(k - 1), parse_expression(item.substr(eq + 1))});
        }
        start = end + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// CvFamily

CvFamily CvFamily::closed_form(std::vector<ParamExpr> alphas) {
    if (alphas.empty()) {
        throw DomainError("closed-form CV family needs at least one expression");
    }
    return CvFamily(Source(std::move(alphas)));
}

CvFamily CvFamily::solved(MeasurementFamily family, Observable a,
                          std::vector<PinnedExpr> pins) {
    if (family.dim() != a.dim()) {
        throw DimensionError("observable and family dimensions differ");
    }
    return CvFamily(Source(Solved{std::move(family), std::move(a), std::move(pins)}));
}

CvFamily CvFamily::sampled(std::vector<CvSample> samples) {
    return CvFamily(Source(std::move(samples)));
}

namespace {

std::vector<PinnedValue> instantiate(std::span<const PinnedExpr> pins, double g) {
    std::vector<PinnedValue> out;
    for (const auto &p : pins) {
        const auto v = evaluate(p.value, g, SqrtDomain::nonnegative_real);
        if (v.imag() != 0.0) {
            throw DomainError("pinned value for alpha" + std::to_string(p.index + 1) +
                              " is not real at g=" + std::to_string(g));
        }
        out.push_back({p.index, v.real()});
    }
    return out;
}

} // namespace

std::vector<double> CvFamily::alphas(double g) const {
    if (const auto *exprs = std::get_if<std::vector<ParamExpr>>(&source_)) {
        std::vector<double> out;
        for (std::size_t j = 0; j < exprs->size(); ++j) {
            const auto v = evaluate((*exprs)[j], g);
            if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real()))) {
                throw DomainError("contextual value alpha" + std::to_string(j + 1) +
                                  " is not real at g=" + std::to_string(g));
            }
            out.push_back(v.real());
        }
        return out;
    }
    if (const auto *solved = std::get_if<Solved>(&source_)) {
        const auto e = povm(solved->family, g);
        const auto pins = instantiate(solved->pins, g);
        return solve_cv(solved->observable, e, pins).alphas;
    }
    const auto &samples = std::get<std::vector<CvSample>>(source_);
    for (const auto &s : samples) {
        if (std::abs(s.g - g) <= 1e-15 * std::abs(g)) {
            return s.solution.alphas;
        }
    }
    throw DomainError("sampled CV family has no sample at g=" + std::to_string(g));
}

bool CvFamily::is_closed_form() const {
    return std::holds_alternative<std::vector<ParamExpr>>(source_);
}

bool CvFamily::is_sampled() const {
    return std::holds_alternative<std::vector<CvSample>>(source_);
}

const std::vector<ParamExpr> &CvFamily::expressions() const {
    return std::get<std::vector<ParamExpr>>(source_);
}

const std::vector<CvSample> &CvFamily::samples() const {
    return std::get<std::vector<CvSample>>(source_);
}

CvFamily cv_family(const MeasurementFamily &family, const Observable &a,
                   std::span<const double> grid, std::span<const PinnedExpr> pins) {
    if (family.dim() != a.dim()) {
        throw DimensionError("observable and family dimensions differ");
    }
    std::vector<CvSample> samples;
    samples.reserve(grid.size());
    for (const double g : grid) {
        const auto e = povm(family, g);
        samples.push_back({g, solve_cv(a, e, instantiate(pins, g))});
    }
    return CvFamily::sampled(std::move(samples));
}

std::vector<DivergenceFit> divergence_order(const CvFamily &cvf,
                                            std::span<const double> grid) {
    if (grid.size() < 2) {
        throw DomainError("divergence_order needs at least two grid points");
    }
    const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
    if (!(*lo_it > 0.0)) {
        throw DomainError("divergence_order needs positive g");
    }
    const double decades = std::log10(*hi_it / *lo_it);
    if (decades < 1.0 - 1e-9) {
        throw DomainError("divergence_order needs a grid spanning at least one decade");
    }
    const auto needed = static_cast<std::size_t>(std::floor(8.0 * decades + 1e-9)) + 1;
    if (grid.size() < needed) {
        throw DomainError("divergence_order needs 8 points per decade (" +
                          std::to_string(needed) + " points), got " +
                          std::to_string(grid.size()));
    }

    std::vector<std::vector<double>> columns;
    for (const double g : grid) {
        const auto alphas = cvf.alphas(g);
        if (columns.empty()) {
            columns.resize(alphas.size());
        }
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            columns[j].push_back(alphas[j]);
        }
    }

    const std::size_t smallest =
        static_cast<std::size_t>(std::distance(grid.begin(), lo_it));
    std::vector<DivergenceFit> out;
    for (const auto &column : columns) {
        std::vector<double> magnitude;
        bool any_zero = false;
        bool all_zero = true;
        for (const double v : column) {
            magnitude.push_back(std::abs(v));
            any_zero = any_zero || v == 0.0;
            all_zero = all_zero && v == 0.0;
        }
        DivergenceFit fit;
        if (all_zero) {
            fit.power_law = true;
            out.push_back(fit);
            continue;
        }
        const LogLogFit ll = fit_log_log(grid, magnitude);
        fit.exponent = -ll.slope;
        fit.coefficient = std::copysign(std::exp(ll.intercept), column[smallest]);
        fit.rms_residual = ll.rms_residual;
        fit.power_law = !any_zero && ll.valid() &&
                        ll.rms_residual <= tolerance::power_law_residual;
        out.push_back(fit);
    }
    return out;
}

} // namespace cvlab
