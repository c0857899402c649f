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


#include "cvlab/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cvlab/errors.hpp"
#include "cvlab/weak.hpp"

namespace cvlab {

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string brief(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// CVLAB_THREADS caps the worker count; results are always gathered by index
// so output does not depend on scheduling.
unsigned thread_cap() {
    if (const char *env = std::getenv("CVLAB_THREADS")) {
        char *end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n >= 1) {
            return static_cast<unsigned>(n);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn) {
    const std::size_t workers = std::min<std::size_t>(thread_cap(), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) {
            fn(k);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

struct Outcome {
    int code = exit_code::ok;
    int checked = 0;
    int failed = 0;
};

bool same_g(double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(b); }

// Prints one line per expectation of `command` and folds failures into the outcome.
void verify(const Scenario &sc, const std::string &command,
            const std::vector<CommandResult> &results, const CommandFlags &flags,
            std::ostream &out, Outcome &outcome) {
    // expectations describe the scenario's own state and family
    if (flags.rho || flags.f || flags.family) {
        const bool any = std::any_of(sc.expectations.begin(), sc.expectations.end(),
                                     [&](const Expectation &e) { return e.command == command; });
        if (any) {
            out << "# expectations skipped: --rho, --f or --family override the scenario\n";
        }
        return;
    }
    for (const Expectation &e : sc.expectations) {
        if (e.command != command) {
            continue;
        }
        std::string name = command + " " + e.quantity;
        if (e.g) {
            name += " @ g=" + brief(*e.g);
        }
        const CommandResult *hit = nullptr;
        for (const CommandResult &r : results) {
            if (r.quantity == e.quantity &&
                (!e.g || (r.g && same_g(*r.g, *e.g)))) {
                hit = &r;
                break;
            }
        }
        if (!hit) {
            if (flags.strict) {
                out << "# expect " << name << ": not computed FAIL\n";
                ++outcome.checked;
                ++outcome.failed;
            } else {
                out << "# expect " << name << ": not computed with these flags SKIP\n";
            }
            continue;
        }
        ++outcome.checked;
        const double diff = std::abs(hit->value - e.value);
        const bool pass = diff <= e.tol;
        out << "# expect " << name << ": " << format_number(hit->value) << " vs "
            << format_number(e.value) << " (tol " << brief(e.tol) << ") "
            << (pass ? "PASS" : "FAIL") << '\n';
        if (!pass) {
            ++outcome.failed;
        }
    }
    if (outcome.failed > 0) {
        outcome.code = exit_code::failure;
    }
}

std::vector<double> grid_from(const Scenario &sc, const CommandFlags &flags) {
    if (flags.g) {
        return {*flags.g};
    }
    if (flags.grid) {
        const std::string &config = *flags.grid;
        const auto a = config.find(':');
        const auto b = a == std::string::npos ? a : config.find(':', a + 1);
        if (b == std::string::npos) {
            throw ScenarioError("--grid expects g0:ratio:n, got '" + config + "'");
        }
        try {
            std::size_t used = 0;
            const double g0 = std::stod(config.substr(0, a));
            const double ratio = std::stod(config.substr(a + 1, b - a - 1));
            const long n = std::stol(config.substr(b + 1), &used);
            if (used != config.size() - b - 1 || !(g0 > 0.0) || !(ratio > 0.0) || n < 1) {
                throw std::invalid_argument("range");
            }
            return geometric_grid(g0, ratio, static_cast<std::size_t>(n));
        } catch (const std::logic_error &) {
            throw ScenarioError("--grid expects g0:ratio:n with g0, ratio > 0 and n >= 1");
        }
    }
    return sc.grid;
}

LimitOptions limit_options(const Scenario &sc, const CommandFlags &flags) {
    LimitOptions opts;
    opts.tol = flags.tol.value_or(sc.limit_tol);
    if (flags.grid) {
        const std::vector<double> grid = grid_from(sc, CommandFlags{{}, {}, {}, {}, flags.grid, {}});
        if (grid.size() > 1 && !same_g(grid[1], grid[0] / 2.0)) {
            throw ScenarioError("limit extrapolation needs ratio 0.5 in --grid");
        }
        opts.g0 = grid.front();
        opts.max_depth = std::max<int>(1, static_cast<int>(grid.size()) - 1);
        opts.min_g = std::min(opts.min_g, grid.back());
    }
    if (flags.g) {
        opts.g0 = *flags.g;
    }
    return opts;
}

struct ResolvedState {
    DensityState rho;
    std::optional<ComplexVector> psi;
};

ResolvedState resolve_state(const Scenario &sc, const CommandFlags &flags,
                            const char *fallback) {
    if (flags.rho) {
        DensityState rho = parse_state(*flags.rho, sc.dim);
        std::optional<ComplexVector> psi;
        if (*flags.rho != "mixed" && flags.rho->find("[[") == std::string::npos) {
            psi = parse_vector(*flags.rho, sc.dim);
        }
        return {rho, psi};
    }
    if (sc.state) {
        return {*sc.state, sc.state_vector};
    }
    if (!fallback) {
        throw ScenarioError(sc.source + ": no initial state; set 'state' or pass --rho");
    }
    return resolve_state(sc, CommandFlags{{}, std::string(fallback), {}, {}, {}, {}}, nullptr);
}

Postselection resolve_post(const Scenario &sc, const CommandFlags &flags,
                           const char *fallback) {
    if (flags.f) {
        if (flags.f->find("[[") != std::string::npos) {
            return Postselection::from_projector(parse_matrix(*flags.f, sc.dim));
        }
        return Postselection(parse_vector(*flags.f, sc.dim));
    }
    if (sc.postselection) {
        return *sc.postselection;
    }
    if (!fallback) {
        throw ScenarioError(sc.source + ": no postselection; set 'postselect' or pass --f");
    }
    return Postselection(parse_vector(fallback, sc.dim));
}

const FamilyConfig &family_of(const Scenario &sc, const CommandFlags &flags) {
    return sc.family(flags.family.value_or(std::string{}));
}

const Observable &observable_of(const Scenario &sc) {
    if (!sc.observable) {
        throw ScenarioError(sc.source + ": this command needs an 'observable'");
    }
    return *sc.observable;
}

std::string cv_description(const CvConfig &cv) {
    switch (cv.kind) {
    case CvConfig::Kind::closed_form: {
        std::string s = "closed form";
        for (std::size_t k = 0; k < cv.expressions.size(); ++k) {
            s += (k ? ", " : " ") + to_string(cv.expressions[k]);
        }
        return s;
    }
    case CvConfig::Kind::pinned: {
        std::string s = "pinned";
        for (std::size_t k = 0; k < cv.pins.size(); ++k) {
            s += (k ? ", alpha" : " alpha") + std::to_string(cv.pins[k].index + 1) + "=" +
                 to_string(cv.pins[k].value);
        }
        return s;
    }
    case CvConfig::Kind::min_norm:
        break;
    }
    return "min-norm";
}

void write_breakdown_header(std::ostream &t) {
    t << "g,conditioned_average,numerator,denominator,anticommutator_part,"
         "commutator_part,extrapolant\n";
}

void write_breakdown(std::ostream &t, const std::vector<ConditionedAverageBreakdown> &trace,
                     const std::vector<double> &extrapolants) {
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto &b = trace[k];
        t << format_number(b.g) << ',' << format_number(b.total) << ','
          << format_number(b.numerator) << ',' << format_number(b.denominator) << ','
          << format_number(b.anticommutator_part) << ',' << format_number(b.commutator_part)
          << ',' << format_number(extrapolants.at(k)) << '\n';
    }
}

// ---------------------------------------------------------------------------

Outcome run_solve(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    std::ostringstream sink;
    std::ostream &t = flags.quiet ? sink : out;
    const FamilyConfig &config = family_of(sc, flags);
    const Observable &a = observable_of(sc);
    const std::vector<double> grid = grid_from(sc, flags);
    const Index n = config.family.outcome_count();

    std::vector<CvSolution> solutions(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
        const double g = grid[k];
        const std::vector<ComplexMatrix> effects = povm(config.family, g);
        std::vector<PinnedValue> pins;
        if (config.cv.kind == CvConfig::Kind::pinned) {
            for (const PinnedExpr &p : config.cv.pins) {
                pins.push_back({p.index, evaluate(p.value, g).real()});
            }
        }
        solutions[k] = solve_cv(a, effects, pins);
    });

    t << "g";
    for (Index j = 0; j < n; ++j) {
        t << ",alpha" << j + 1;
    }
    t << ",residual,solvable\n";
    std::vector<CommandResult> results;
    bool all_solvable = true;
    double closed_deviation = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const CvSolution &s = solutions[k];
        t << format_number(grid[k]);
        for (Index j = 0; j < n; ++j) {
            const double alpha = s.alphas[static_cast<std::size_t>(j)];
            t << ',' << format_number(alpha);
            results.push_back({"alpha" + std::to_string(j + 1), grid[k], alpha});
            if (config.cv.kind == CvConfig::Kind::closed_form) {
                const double want =
                    evaluate(config.cv.expressions[static_cast<std::size_t>(j)], grid[k]).real();
                closed_deviation = std::max(closed_deviation, std::abs(alpha - want) /
                                                                  std::max(1.0, std::abs(want)));
            }
        }
        t << ',' << format_number(s.residual) << ',' << (s.solvable ? 1 : 0) << '\n';
        results.push_back({"residual", grid[k], s.residual});
        results.push_back({"solvable", grid[k], s.solvable ? 1.0 : 0.0});
        all_solvable = all_solvable && s.solvable;
    }

    t << "# family = " << flags.family.value_or(sc.default_family) << ", outcomes = " << n << ", cv = " << cv_description(config.cv) << '\n';
    if (config.cv.kind == CvConfig::Kind::closed_form) {
        t << "# closed_form_deviation = " << brief(closed_deviation) << '\n';
        results.push_back({"closed_form_deviation", std::nullopt, closed_deviation});
    }
    if (all_solvable && grid.size() > 1) {
        try {
            const CvFamily sampled = [&] {
                std::vector<CvSample> samples;
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    samples.push_back({grid[k], solutions[k]});
                }
                return CvFamily::sampled(std::move(samples));
            }();
            const std::vector<DivergenceFit> fits = divergence_order(sampled, grid);
            for (std::size_t j = 0; j < fits.size(); ++j) {
                const DivergenceFit &d = fits[j];
                t << "# divergence alpha" << j + 1 << ": exponent = " << fixed(d.exponent, 6)
                  << ", coefficient = " << brief(d.coefficient) << ", power_law = "
                  << (d.power_law ? "yes" : "no") << '\n';
                results.push_back(
                    {"divergence_alpha" + std::to_string(j + 1), std::nullopt, d.exponent});
            }
        } catch (const DomainError &) {
            t << "# divergence: grid too short for a power-law fit\n";
        }
    }

    Outcome outcome;
    verify(sc, "solve", results, flags, out, outcome);
    if (!all_solvable) {
        std::cerr << "cvlab: no exact contextual values for this family and observable\n";
        outcome.code = std::max(outcome.code, exit_code::bad_input);
    }
    return outcome;
}

Outcome run_limit(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    std::ostringstream sink;
    std::ostream &t = flags.quiet ? sink : out;
    const FamilyConfig &config = family_of(sc, flags);
    const ResolvedState state = resolve_state(sc, flags, nullptr);
    const Postselection post = resolve_post(sc, flags, nullptr);
    const LimitOptions opts = limit_options(sc, flags);

    std::optional<CvFamily> cvf;
    if (config.cv.kind == CvConfig::Kind::closed_form) {
        cvf = CvFamily::closed_form(config.cv.expressions);
    } else {
        cvf = make_cv_family(config, observable_of(sc));
    }
    const WeakLimit lim = weak_limit(config.family, *cvf, state.rho, post, opts);

    write_breakdown_header(t);
    write_breakdown(t, lim.trace, lim.average.extrapolants);

    std::vector<CommandResult> results;
    t << "# limit = " << format_number(lim.average.value) << " (error estimate "
      << brief(lim.average.error_estimate) << ", converged "
      << (lim.average.converged ? "yes" : "no") << ")\n";
    results.push_back({"limit", std::nullopt, lim.average.value});
    t << "# denominator_limit = " << format_number(lim.denominator.value)
      << ", postselection_probability = " << format_number(lim.postselection_probability)
      << '\n';
    results.push_back({"denominator_limit", std::nullopt, lim.denominator.value});
    results.push_back({"postselection_probability", std::nullopt, lim.postselection_probability});
    if (sc.observable) {
        const double wv = weak_value_generalized(*sc.observable, state.rho, post);
        t << "# weak_value = " << format_number(wv) << '\n';
        results.push_back({"weak_value", std::nullopt, wv});
        if (state.psi && post.vector()) {
            const double tw = traditional_weak_value(*sc.observable, *state.psi, *post.vector());
            t << "# traditional_weak_value = " << format_number(tw) << '\n';
            results.push_back({"traditional_weak_value", std::nullopt, tw});
        }
    }

    Outcome outcome;
    verify(sc, "limit", results, flags, out, outcome);
    if (!lim.denominator_consistent) {
        t << "# check: denominator limit disagrees with tr[P_f rho] FAIL\n";
        outcome.code = exit_code::failure;
    }
    return outcome;
}

Outcome run_dilate(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    std::ostringstream sink;
    std::ostream &t = flags.quiet ? sink : out;
    const FamilyConfig &config = family_of(sc, flags);
    const ResolvedState state = resolve_state(sc, flags, "mixed");
    const double g = flags.g.value_or(grid_from(sc, flags).front());
    const Instrument inst = evaluate_family(config.family, g);
    const NaimarkDilation dil = naimark_dilate(inst, sc.completeness_tol);
    const ComplexMatrix &rho = state.rho.matrix();

    t << "outcome,probability,meter_probability,post_state_error\n";
    double max_p = 0.0;
    double max_post = 0.0;
    for (Index j = 0; j < inst.outcome_count(); ++j) {
        const double p = probability(inst, j, state.rho);
        const double q = dil.meter_probability(j, rho);
        const double e =
            (unnormalized_post_state(inst, j, rho) - dil.reduced_post_state(j, rho)).norm();
        max_p = std::max(max_p, std::abs(p - q));
        max_post = std::max(max_post, e);
        t << j + 1 << ',' << format_number(p) << ',' << format_number(q) << ','
          << format_number(e) << '\n';
    }
    const double iso =
        (dil.isometry.adjoint() * dil.isometry -
         ComplexMatrix::Identity(dil.system_dim, dil.system_dim))
            .norm();
    t << "# g = " << format_number(g) << ", system_dim = " << dil.system_dim
      << ", meter_dim = " << dil.meter_dim << '\n';
    t << "# isometry_defect = " << brief(iso) << ", max_probability_error = " << brief(max_p)
      << ", max_post_state_error = " << brief(max_post) << '\n';

    std::vector<CommandResult> results{{"isometry_defect", std::nullopt, iso},
                                       {"max_probability_error", std::nullopt, max_p},
                                       {"max_post_state_error", std::nullopt, max_post},
                                       {"meter_dim", std::nullopt, double(dil.meter_dim)}};
    Outcome outcome;
    verify(sc, "dilate", results, flags, out, outcome);
    if (iso > 1e-10 || max_p > 1e-10 || max_post > 1e-10) {
        t << "# check: dilation disagrees with the measurement operators FAIL\n";
        outcome.code = exit_code::failure;
    }
    return outcome;
}

Outcome run_diagnose(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    std::ostringstream sink;
    std::ostream &t = flags.quiet ? sink : out;
    const FamilyConfig &config = family_of(sc, flags);
    const ResolvedState state = resolve_state(sc, flags, "mixed");
    const std::vector<double> grid = grid_from(sc, flags);
    const DisturbanceReport rep = disturbance_diagnostics(config.family, state.rho, grid);

    struct Metric {
        const char *name;
        double DisturbanceRow::*field;
        const LogLogFit *fit;
    };
    const Metric metrics[] = {
        {"state_disturbance", &DisturbanceRow::state_disturbance, &rep.state_fit},
        {"kraus_disturbance", &DisturbanceRow::kraus_disturbance, &rep.kraus_fit},
        {"unitary_commutator", &DisturbanceRow::unitary_commutator, &rep.unitary_fit},
        {"aggregate_disturbance", &DisturbanceRow::aggregate_disturbance, &rep.aggregate_fit},
        {"group_residual", &DisturbanceRow::group_residual, &rep.group_fit},
    };

    std::vector<CommandResult> results;
    t << "g,metric,value\n";
    for (const DisturbanceRow &row : rep.rows) {
        for (const Metric &m : metrics) {
            t << format_number(row.g) << ',' << m.name << ',' << format_number(row.*m.field)
              << '\n';
            results.push_back({m.name, row.g, row.*m.field});
        }
    }
    for (const DisturbanceRow &row : rep.rows) {
        for (const std::string &note : row.notes) {
            t << "# note g = " << format_number(row.g) << ": " << note << '\n';
        }
    }
    for (const Metric &m : metrics) {
        if (m.fit->valid()) {
            t << "# slope " << m.name << " = " << fixed(m.fit->slope, 6) << " (rms "
              << brief(m.fit->rms_residual) << ")\n";
            results.push_back({std::string("slope_") + m.name, std::nullopt, m.fit->slope});
        } else {
            t << "# slope " << m.name << " = n/a\n";
        }
    }
    t << "# certified_weak = " << (rep.certified_weak ? "yes" : "no") << '\n';
    results.push_back({"certified_weak", std::nullopt, rep.certified_weak ? 1.0 : 0.0});

    Outcome outcome;
    verify(sc, "diagnose", results, flags, out, outcome);
    return outcome;
}

ComplexMatrix default_twist_generator() {
    ComplexMatrix h(2, 2);
    h << 0.0, 1.0, 1.0, 0.0;
    return h;
}

Outcome run_counterexample(const Scenario &sc, const std::string &kind,
                           const CommandFlags &flags, std::ostream &out) {
    std::ostringstream sink;
    std::ostream &t = flags.quiet ? sink : out;
    if (sc.dim != 2) {
        throw DimensionError("counterexamples are defined for dim 2");
    }
    const LimitOptions opts = limit_options(sc, flags);
    std::vector<CommandResult> results;
    Outcome outcome;
    const double check_tol = sc.check_tol;

    if (kind == "twist") {
        const ResolvedState state = resolve_state(sc, flags, "plus_i");
        const Postselection post = resolve_post(sc, flags, "e1");
        const ComplexMatrix h = sc.twist_generator.value_or(default_twist_generator());
        const TwistResult r = twisted_counterexample(h, state.rho, post, opts);
        t << "g,delta,extrapolant\n";
        for (std::size_t k = 0; k < r.delta.samples.size(); ++k) {
            t << format_number(r.delta.samples[k].first) << ','
              << format_number(r.delta.samples[k].second) << ','
              << format_number(r.delta.extrapolants[k]) << '\n';
        }
        t << "# delta = " << fixed(r.delta_closed, 6) << " (closed) / "
          << fixed(r.delta.value, 10) << " (numeric)\n";
        t << "# delta_leading_order = " << format_number(r.delta_leading_order) << '\n';
        results = {{"delta_closed", std::nullopt, r.delta_closed},
                   {"delta_numeric", std::nullopt, r.delta.value},
                   {"delta_leading_order", std::nullopt, r.delta_leading_order}};
        verify(sc, "counterexample", results, flags, out, outcome);
        const double diff = std::abs(r.delta.value - r.delta_closed);
        if (diff > check_tol) {
            t << "# check: numeric delta differs from the closed form by " << brief(diff)
              << " FAIL\n";
            outcome.code = exit_code::failure;
        }
        return outcome;
    }
    if (kind != "positive") {
        throw ScenarioError("unknown counterexample '" + kind + "'");
    }
    const ResolvedState state = resolve_state(sc, flags, "plus");
    const Postselection post = resolve_post(sc, flags, "plus");
    const PositiveResult r = positive_counterexample(state.rho, post, opts, check_tol);
    write_breakdown_header(t);
    write_breakdown(t, r.limit.trace, r.limit.average.extrapolants);
    t << "# weak_value = " << fixed(r.weak_value, 6) << '\n';
    t << "# limit = " << format_number(r.limit.average.value) << '\n';
    t << "# gap = " << fixed(r.gap_closed, 6) << " (closed) / " << fixed(r.gap_numeric, 10)
      << " (numeric)\n";
    results = {{"weak_value", std::nullopt, r.weak_value},
               {"limit", std::nullopt, r.limit.average.value},
               {"gap_closed", std::nullopt, r.gap_closed},
               {"gap_numeric", std::nullopt, r.gap_numeric}};
    verify(sc, "counterexample", results, flags, out, outcome);
    if (!r.consistent || !r.limit.denominator_consistent) {
        t << "# check: numeric limit differs from weak value + gap FAIL\n";
        outcome.code = exit_code::failure;
    }
    return outcome;
}

std::optional<std::string> builtin_kind(const std::string &target) {
    if (target == "twist") {
        return "twist";
    }
    if (target == "positive") {
        return "positive";
    }
    return std::nullopt;
}

Scenario builtin_scenario(const std::string &kind) {
    Scenario sc;
    sc.source = kind;
    sc.label = kind;
    sc.dim = 2;
    sc.counterexample = kind;
    sc.check_tol = 1e-5;
    return sc;
}

Outcome run_named(const std::string &command, const Scenario &sc, const CommandFlags &flags,
                  std::ostream &out) {
    if (command == "solve") {
        return run_solve(sc, flags, out);
    }
    if (command == "limit") {
        return run_limit(sc, flags, out);
    }
    if (command == "dilate") {
        return run_dilate(sc, flags, out);
    }
    if (command == "diagnose") {
        return run_diagnose(sc, flags, out);
    }
    if (command == "counterexample") {
        if (!sc.counterexample) {
            throw ScenarioError(sc.source + ": counterexample expectations need a "
                                            "'counterexample' key");
        }
        return run_counterexample(sc, *sc.counterexample, flags, out);
    }
    throw ScenarioError(sc.source + ": unknown command '" + command + "' in expectations");
}

} // namespace

int cmd_solve(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    return run_solve(sc, flags, out).code;
}

int cmd_limit(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    return run_limit(sc, flags, out).code;
}

int cmd_dilate(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    return run_dilate(sc, flags, out).code;
}

int cmd_diagnose(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    return run_diagnose(sc, flags, out).code;
}

int cmd_counterexample(const Scenario &sc, const std::string &kind,
                       const CommandFlags &flags, std::ostream &out) {
    return run_counterexample(sc, kind, flags, out).code;
}

int cmd_counterexample(const std::string &target, const CommandFlags &flags,
                       std::ostream &out) {
    if (const auto kind = builtin_kind(target)) {
        return cmd_counterexample(builtin_scenario(*kind), *kind, flags, out);
    }
    const Scenario sc = load_scenario(target);
    if (!sc.counterexample) {
        throw ScenarioError(target + ": not a counterexample (no 'counterexample' key), "
                                     "expected twist or positive");
    }
    return cmd_counterexample(sc, *sc.counterexample, flags, out);
}

int cmd_check(const Scenario &sc, const CommandFlags &flags, std::ostream &out) {
    CommandFlags strict = flags;
    strict.quiet = true;
    strict.strict = true;
    std::vector<std::string> commands;
    for (const Expectation &e : sc.expectations) {
        if (std::find(commands.begin(), commands.end(), e.command) == commands.end()) {
            commands.push_back(e.command);
        }
    }
    int code = exit_code::ok;
    int checked = 0;
    int failed = 0;
    for (const std::string &c : commands) {
        const Outcome o = run_named(c, sc, strict, out);
        checked += o.checked;
        failed += o.failed;
        code = std::max(code, o.code);
    }
    out << "# " << sc.source << ": " << checked << " expectations, " << failed << " failed\n";
    if (failed > 0) {
        code = std::max(code, exit_code::failure);
    }
    return code;
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"cvlab: contextual values and weak-measurement limits"};
    app.require_subcommand(1);

    CommandFlags flags;
    std::string target;
    std::optional<std::string> out_path;

    auto add_common = [&](CLI::App *sub, const char *target_help) {
        sub->add_option("target", target, target_help)->required();
        sub->add_option("--g", flags.g, "single coupling value");
        sub->add_option("--rho", flags.rho, "initial state: name, vector or matrix literal");
        sub->add_option("--f", flags.f, "postselection: name or vector literal");
        sub->add_option("--tol", flags.tol, "extrapolation tolerance");
        sub->add_option("--grid", flags.grid, "geometric grid g0:ratio:n");
        sub->add_option("--family", flags.family, "family name inside the scenario");
        sub->add_option("--out", out_path, "write output to this file");
    };
    CLI::App *solve = app.add_subcommand("solve", "solve contextual values on a grid");
    CLI::App *limit = app.add_subcommand("limit", "extrapolate the conditioned average to g -> 0");
    CLI::App *counter =
        app.add_subcommand("counterexample", "twist / positive counterexamples");
    CLI::App *dilate = app.add_subcommand("dilate", "compare a Naimark dilation at one g");
    CLI::App *diagnose = app.add_subcommand("diagnose", "disturbance metrics over a grid");
    CLI::App *check = app.add_subcommand("check", "verify a scenario's expectations");
    for (CLI::App *sub : {solve, limit, dilate, diagnose, check}) {
        add_common(sub, "scenario file");
    }
    add_common(counter, "twist | positive | scenario file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::bad_input;
    }

    try {
        std::ofstream file;
        if (out_path) {
            file.open(*out_path, std::ios::binary);
            if (!file) {
                err << "cvlab: cannot write " << *out_path << '\n';
                return exit_code::bad_input;
            }
        }
        std::ostream &sink = out_path ? static_cast<std::ostream &>(file) : out;
        int code = exit_code::ok;
        if (*counter) {
            code = cmd_counterexample(target, flags, sink);
        } else {
            const Scenario sc = load_scenario(target);
            if (*solve) {
                code = cmd_solve(sc, flags, sink);
            } else if (*limit) {
                code = cmd_limit(sc, flags, sink);
            } else if (*dilate) {
                code = cmd_dilate(sc, flags, sink);
            } else if (*diagnose) {
                code = cmd_diagnose(sc, flags, sink);
            } else {
                code = cmd_check(sc, flags, sink);
            }
        }
        sink.flush();
        return code;
    } catch (const DegenerateError &e) {
        err << "cvlab: degenerate input: " << e.what() << '\n';
    } catch (const ParseError &e) {
        err << "cvlab: parse error at " << e.position() << ": " << e.what() << '\n';
    } catch (const ScenarioError &e) {
        err << "cvlab: " << e.what() << '\n';
    } catch (const ModelError &e) {
        err << "cvlab: " << e.what() << '\n';
    } catch (const DimensionError &e) {
        err << "cvlab: dimension mismatch: " << e.what() << '\n';
    } catch (const DomainError &e) {
        err << "cvlab: out of domain: " << e.what() << '\n';
    } catch (const EvalError &e) {
        err << "cvlab: evaluation failed: " << e.what() << '\n';
    } catch (const std::exception &e) {
        err << "cvlab: internal error: " << e.what() << '\n';
        return exit_code::failure;
    }
    return exit_code::bad_input;
}

} // namespace cvlab
