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


#include "cvlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "cvlab/errors.hpp"

namespace cvlab {

// ---------------------------------------------------------------------------
// Bracket literals used by --rho / --f

namespace {

struct Literal {
    bool list = false;
    std::string scalar;
    std::vector<Literal> items;
};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

Literal parse_literal(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty() || t.front() != '[') {
        return Literal{false, t, {}};
    }
    if (t.back() != ']') {
        throw ScenarioError("unbalanced brackets in '" + t + "'");
    }
    Literal out{true, {}, {}};
    const std::string_view body = std::string_view(t).substr(1, t.size() - 2);
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= body.size(); ++k) {
        const char c = k < body.size() ? body[k] : ',';
        if (c == '[') {
            ++depth;
        } else if (c == ']') {
            if (--depth < 0) {
                throw ScenarioError("unbalanced brackets in '" + t + "'");
            }
        } else if (c == ',' && depth == 0) {
            const std::string item = trim(body.substr(start, k - start));
            if (item.empty()) {
                if (k == body.size() && out.items.empty()) {
                    break; // "[]"
                }
                throw ScenarioError("empty element in '" + t + "'");
            }
            out.items.push_back(parse_literal(item));
            start = k + 1;
        }
    }
    if (depth != 0) {
        throw ScenarioError("unbalanced brackets in '" + t + "'");
    }
    return out;
}

Complex constant_value(const std::string &text, const std::string &where) {
    ParamExpr e;
    try {
        e = parse_expression(text);
    } catch (const ParseError &err) {
        throw ScenarioError(where + ": cannot parse '" + text + "': " + err.what());
    }
    if (e.depends_on_g()) {
        throw ScenarioError(where + ": '" + text + "' must not depend on g");
    }
    const Complex v = evaluate(e, 0.0);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw ScenarioError(where + ": '" + text + "' is not finite");
    }
    return v;
}

ComplexVector literal_vector(const Literal &lit, Index dim, const std::string &where) {
    if (static_cast<Index>(lit.items.size()) != dim) {
        throw DimensionError(where + ": expected " + std::to_string(dim) +
                             " components, got " + std::to_string(lit.items.size()));
    }
    ComplexVector v(dim);
    for (Index k = 0; k < dim; ++k) {
        const Literal &item = lit.items[static_cast<std::size_t>(k)];
        if (item.list) {
            throw ScenarioError(where + ": nested list where a number was expected");
        }
        v(k) = constant_value(item.scalar, where);
    }
    return v;
}

ComplexMatrix literal_matrix(const Literal &lit, Index dim, const std::string &where) {
    if (static_cast<Index>(lit.items.size()) != dim) {
        throw DimensionError(where + ": expected " + std::to_string(dim) + " rows, got " +
                             std::to_string(lit.items.size()));
    }
    ComplexMatrix m(dim, dim);
    for (Index r = 0; r < dim; ++r) {
        const Literal &row = lit.items[static_cast<std::size_t>(r)];
        if (!row.list) {
            throw ScenarioError(where + ": row " + std::to_string(r + 1) +
                                " is not a list");
        }
        m.row(r) = literal_vector(row, dim, where).transpose();
    }
    return m;
}

std::optional<ComplexVector> named_vector(const std::string &name, Index dim) {
    const double s = 1.0 / std::sqrt(2.0);
    const Complex i(0.0, 1.0);
    auto two_level = [&](Complex a, Complex b) -> ComplexVector {
        if (dim != 2) {
            throw DimensionError("state '" + name + "' is defined for dim 2 only");
        }
        ComplexVector v(2);
        v << a * s, b * s;
        return v;
    };
    if (name == "plus" || name == "+" || name == "++") {
        // uniform superposition in any dimension
        return ComplexVector::Constant(dim, Complex(1.0 / std::sqrt(double(dim)), 0.0));
    }
    if (name == "minus" || name == "-") {
        return two_level(1.0, -1.0);
    }
    if (name == "plus_i" || name == "+i") {
        return two_level(1.0, i);
    }
    if (name == "minus_i" || name == "-i") {
        return two_level(1.0, -i);
    }
    if (name.size() > 1 && name[0] == 'e' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
        const long k = std::stol(name.substr(1));
        if (k < 1 || k > dim) {
            throw DimensionError("basis vector '" + name + "' out of range for dim " +
                                 std::to_string(dim));
        }
        ComplexVector v = ComplexVector::Zero(dim);
        v(k - 1) = 1.0;
        return v;
    }
    return std::nullopt;
}

} // namespace

ComplexVector parse_vector(std::string_view text, Index dim) {
    const Literal lit = parse_literal(text);
    if (!lit.list) {
        if (auto v = named_vector(lit.scalar, dim)) {
            return *v;
        }
        throw ScenarioError("unknown vector name '" + lit.scalar + "'");
    }
    ComplexVector v = literal_vector(lit, dim, "vector literal");
    const double n = v.norm();
    if (n == 0.0) {
        throw DegenerateError("zero vector '" + std::string(text) + "'");
    }
    return v / n;
}

ComplexMatrix parse_matrix(std::string_view text, Index dim) {
    const Literal lit = parse_literal(text);
    if (!lit.list) {
        throw ScenarioError("expected a matrix literal, got '" + lit.scalar + "'");
    }
    return literal_matrix(lit, dim, "matrix literal");
}

DensityState parse_state(std::string_view text, Index dim) {
    const Literal lit = parse_literal(text);
    if (!lit.list) {
        if (lit.scalar == "mixed") {
            return DensityState::maximally_mixed(dim);
        }
        return DensityState::pure(parse_vector(text, dim));
    }
    if (!lit.items.empty() && lit.items.front().list) {
        return DensityState::from_unnormalized(literal_matrix(lit, dim, "state literal"));
    }
    return DensityState::pure(parse_vector(text, dim));
}

// ---------------------------------------------------------------------------
// TOML scenarios

namespace {

class Loader {
  public:
    explicit Loader(std::string source) : source_(std::move(source)) {}

    Scenario load(const toml::table &root) {
        Scenario sc;
        sc.source = source_;
        sc.label = root["label"].value_or(std::string{});
        const auto dim = root["dim"].value<int64_t>();
        if (!dim || *dim < 1) {
            fail(root, "dim", "required positive integer");
        }
        sc.dim = static_cast<Index>(*dim);

        if (const toml::node *n = root.get("tolerances")) {
            const toml::table *t = table_of(*n, "tolerances");
            sc.limit_tol = number_of(*t, "limit", sc.limit_tol, "tolerances.limit");
            sc.check_tol = number_of(*t, "check", sc.check_tol, "tolerances.check");
            sc.completeness_tol = number_of(*t, "completeness", sc.completeness_tol,
                                            "tolerances.completeness");
        }

        sc.grid = read_grid(root);

        if (const toml::node *n = root.get("observable")) {
            try {
                sc.observable = Observable(matrix_of(*n, sc.dim, "observable"));
            } catch (const DomainError &e) {
                fail(*n, "observable", e.what());
            }
        }

        if (const toml::node *n = root.get("state")) {
            const std::string where = "state";
            if (const auto *s = n->as_string()) {
                guard(*n, where, [&] {
                    sc.state = parse_state(s->get(), sc.dim);
                    if (s->get() != "mixed") {
                        sc.state_vector = parse_vector(s->get(), sc.dim);
                    }
                });
            } else if (const auto *a = n->as_array();
                       a && !a->empty() && (*a)[0].is_array()) {
                guard(*n, where, [&] {
                    sc.state = DensityState::from_unnormalized(matrix_of(*n, sc.dim, where));
                });
            } else {
                guard(*n, where, [&] {
                    ComplexVector v = vector_of(*n, sc.dim, where);
                    v.normalize();
                    sc.state_vector = v;
                    sc.state = DensityState::pure(v);
                });
            }
        }

        if (const toml::node *n = root.get("postselect")) {
            const std::string where = "postselect";
            guard(*n, where, [&] {
                if (const auto *s = n->as_string()) {
                    sc.postselection = Postselection(parse_vector(s->get(), sc.dim));
                } else if (const auto *a = n->as_array();
                           a && !a->empty() && (*a)[0].is_array()) {
                    sc.postselection =
                        Postselection::from_projector(matrix_of(*n, sc.dim, where));
                } else {
                    sc.postselection =
                        Postselection::normalized(vector_of(*n, sc.dim, where));
                }
            });
        }

        if (const toml::node *n = root.get("counterexample")) {
            const auto *s = n->as_string();
            if (!s || (s->get() != "twist" && s->get() != "positive")) {
                fail(*n, "counterexample", "must be \"twist\" or \"positive\"");
            }
            sc.counterexample = s->get();
        }
        if (const toml::node *n = root.get("H")) {
            sc.twist_generator = matrix_of(*n, sc.dim, "H");
        }

        if (const toml::node *n = root.get("families")) {
            const toml::table *fams = table_of(*n, "families");
            for (const auto &[key, node] : *fams) {
                const std::string name(key.str());
                sc.families.emplace(name, read_family(node, name, sc));
            }
        }
        if (const toml::node *n = root.get("default_family")) {
            const auto *s = n->as_string();
            if (!s || !sc.families.count(s->get())) {
                fail(*n, "default_family", "does not name a family");
            }
            sc.default_family = s->get();
        } else if (!sc.families.empty()) {
            sc.default_family = sc.families.begin()->first;
        }
        if (sc.families.empty() && !sc.counterexample) {
            fail(root, "families", "at least one family is required");
        }

        if (const toml::node *n = root.get("expect")) {
            const toml::array *arr = n->as_array();
            if (!arr) {
                fail(*n, "expect", "must be an array of tables");
            }
            for (std::size_t k = 0; k < arr->size(); ++k) {
                sc.expectations.push_back(read_expectation((*arr)[k], k, sc.check_tol));
            }
        }
        return sc;
    }

  private:
    std::string source_;

    [[noreturn]] void fail(const toml::node &n, const std::string &key,
                           const std::string &what) const {
        std::ostringstream os;
        os << source_;
        if (n.source().begin.line > 0) {
            os << ':' << n.source().begin.line;
        }
        os << ": " << key << ": " << what;
        throw ScenarioError(os.str());
    }

    // Rethrows input errors from nested parsing with the key location.
    template <typename Fn>
    void guard(const toml::node &n, const std::string &key, Fn &&fn) const {
        try {
            fn();
        } catch (const ScenarioError &e) {
            fail(n, key, e.what());
        } catch (const DimensionError &e) {
            fail(n, key, e.what());
        } catch (const DomainError &e) {
            fail(n, key, e.what());
        } catch (const DegenerateError &e) {
            fail(n, key, e.what());
        }
    }

    const toml::table *table_of(const toml::node &n, const std::string &key) const {
        const toml::table *t = n.as_table();
        if (!t) {
            fail(n, key, "must be a table");
        }
        return t;
    }

    double number_of(const toml::table &t, std::string_view name, double fallback,
                     const std::string &key) const {
        const toml::node *n = t.get(name);
        if (!n) {
            return fallback;
        }
        const auto v = n->value<double>();
        if (!v || !std::isfinite(*v)) {
            fail(*n, key, "must be a number");
        }
        return *v;
    }

    std::string entry_text(const toml::node &n, const std::string &key) const {
        if (const auto *s = n.as_string()) {
            return s->get();
        }
        if (const auto v = n.value<double>()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", *v);
            return buf;
        }
        fail(n, key, "entries must be numbers or expression strings");
    }

    ParamExpr expression_of(const toml::node &n, const std::string &key) const {
        const std::string text = entry_text(n, key);
        try {
            return parse_expression(text);
        } catch (const ParseError &e) {
            fail(n, key, "cannot parse '" + text + "': " + e.what());
        }
    }

    std::vector<ParamExpr> square_entries(const toml::node &n, Index dim,
                                          const std::string &key) const {
        const toml::array *rows = n.as_array();
        if (!rows || static_cast<Index>(rows->size()) != dim) {
            fail(n, key, "expected " + std::to_string(dim) + " rows");
        }
        std::vector<ParamExpr> out;
        for (std::size_t r = 0; r < rows->size(); ++r) {
            const toml::array *row = (*rows)[r].as_array();
            if (!row || static_cast<Index>(row->size()) != dim) {
                fail((*rows)[r], key, "row " + std::to_string(r + 1) + " must have " +
                                          std::to_string(dim) + " entries");
            }
            for (const toml::node &e : *row) {
                out.push_back(expression_of(e, key));
            }
        }
        return out;
    }

    ComplexMatrix matrix_of(const toml::node &n, Index dim, const std::string &key) const {
        const std::vector<ParamExpr> entries = square_entries(n, dim, key);
        ComplexMatrix m(dim, dim);
        for (Index r = 0; r < dim; ++r) {
            for (Index c = 0; c < dim; ++c) {
                const ParamExpr &e = entries[static_cast<std::size_t>(r * dim + c)];
                if (e.depends_on_g()) {
                    fail(n, key, "entries must not depend on g");
                }
                m(r, c) = evaluate(e, 0.0);
            }
        }
        return m;
    }

    ComplexVector vector_of(const toml::node &n, Index dim, const std::string &key) const {
        const toml::array *a = n.as_array();
        if (!a || static_cast<Index>(a->size()) != dim) {
            fail(n, key, "expected " + std::to_string(dim) + " components");
        }
        ComplexVector v(dim);
        for (Index k = 0; k < dim; ++k) {
            const ParamExpr e = expression_of((*a)[static_cast<std::size_t>(k)], key);
            if (e.depends_on_g()) {
                fail(n, key, "components must not depend on g");
            }
            v(k) = evaluate(e, 0.0);
        }
        return v;
    }

    std::vector<double> read_grid(const toml::table &root) const {
        const toml::node *n = root.get("grid");
        if (!n) {
            return geometric_grid(0.1, 0.5, 4);
        }
        const toml::table *t = table_of(*n, "grid");
        std::vector<double> out;
        if (const toml::node *list = t->get("list")) {
            const toml::array *a = list->as_array();
            if (!a || a->empty()) {
                fail(*list, "grid.list", "must be a non-empty array of numbers");
            }
            for (const toml::node &e : *a) {
                const auto v = e.value<double>();
                if (!v) {
                    fail(e, "grid.list", "must contain numbers");
                }
                out.push_back(*v);
            }
        } else {
            const double g0 = number_of(*t, "g0", 0.1, "grid.g0");
            const double ratio = number_of(*t, "ratio", 0.5, "grid.ratio");
            const auto count = (*t)["count"].value_or(int64_t{4});
            if (count < 1 || !(ratio > 0.0) || !(g0 > 0.0)) {
                fail(*n, "grid", "need g0 > 0, ratio > 0 and count >= 1");
            }
            out = geometric_grid(g0, ratio, static_cast<std::size_t>(count));
        }
        for (double g : out) {
            if (!(g > 0.0) || !std::isfinite(g)) {
                fail(*n, "grid", "grid points must be positive");
            }
        }
        return out;
    }

    FamilyConfig read_family(const toml::node &n, const std::string &name,
                           const Scenario &sc) const {
        const std::string key = "families." + name;
        const toml::table *t = table_of(n, key);
        std::optional<ValidityRange> validity;
        if (const toml::node *v = t->get("valid")) {
            const toml::array *a = v->as_array();
            std::optional<double> lo;
            std::optional<double> hi;
            if (a && a->size() == 2) {
                lo = (*a)[0].value<double>();
                hi = (*a)[1].value<double>();
            }
            if (!lo || !hi || !(*lo < *hi)) {
                fail(*v, key + ".valid", "must be [lo, hi] with lo < hi");
            }
            validity = ValidityRange{*lo, *hi};
        }

        // outcomes = [[op, op, ...], ...] or the singly indexed operators = [op, ...]
        std::vector<std::vector<OperatorTable>> outcomes;
        if (const toml::node *o = t->get("outcomes")) {
            const toml::array *a = o->as_array();
            if (!a || a->empty()) {
                fail(*o, key + ".outcomes", "must be a non-empty array");
            }
            for (std::size_t j = 0; j < a->size(); ++j) {
                const std::string okey = key + ".outcomes[" + std::to_string(j + 1) + "]";
                const toml::array *ops = (*a)[j].as_array();
                if (!ops || ops->empty()) {
                    fail((*a)[j], okey, "must be a non-empty list of operators");
                }
                std::vector<OperatorTable> tables;
                for (const toml::node &op : *ops) {
                    tables.emplace_back(sc.dim, square_entries(op, sc.dim, okey));
                }
                outcomes.push_back(std::move(tables));
            }
        } else if (const toml::node *o = t->get("operators")) {
            const toml::array *a = o->as_array();
            if (!a || a->empty()) {
                fail(*o, key + ".operators", "must be a non-empty array");
            }
            for (std::size_t j = 0; j < a->size(); ++j) {
                const std::string okey = key + ".operators[" + std::to_string(j + 1) + "]";
                outcomes.push_back({OperatorTable(sc.dim, square_entries((*a)[j], sc.dim, okey))});
            }
        } else {
            fail(n, key, "needs 'outcomes' or 'operators'");
        }
        const std::string label = (*t)["label"].value_or(name);
        FamilyConfig config{MeasurementFamily(label, sc.dim, std::move(outcomes), validity), {}};

        if (const toml::node *c = t->get("cv")) {
            config.cv = read_cv(*c, key + ".cv", config.family.outcome_count());
        }

        // spot-check completeness where the grid starts and ends
        for (double g : {sc.grid.front(), sc.grid.back()}) {
            Instrument inst;
            try {
                inst = evaluate_family(config.family, g);
            } catch (const DomainError &e) {
                fail(n, key, e.what());
            } catch (const EvalError &e) {
                fail(n, key, e.what());
            }
            const double defect = completeness_defect(inst);
            if (!(defect <= sc.completeness_tol)) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.3g", defect);
                throw ModelError(source_ + ":" + std::to_string(n.source().begin.line) +
                                 ": " + key + ": completeness violated at g = " +
                                 std::to_string(g) + " (defect norm " + buf + ")");
            }
        }
        return config;
    }

    CvConfig read_cv(const toml::node &n, const std::string &key, Index outcomes) const {
        CvConfig cv;
        auto pins_from = [&](const toml::node &node, const std::string &text) {
            try {
                cv.pins = parse_pin_spec(text);
            } catch (const ParseError &e) {
                fail(node, key, std::string("bad pin: ") + e.what());
            } catch (const DomainError &e) {
                fail(node, key, std::string("bad pin: ") + e.what());
            }
            for (const PinnedExpr &p : cv.pins) {
                if (p.index >= outcomes) {
                    fail(node, key, "pinned index out of range");
                }
            }
            cv.kind = CvConfig::Kind::pinned;
        };
        if (const auto *s = n.as_string()) {
            if (s->get() == "min-norm") {
                cv.kind = CvConfig::Kind::min_norm;
                return cv;
            }
            fail(n, key, "string value must be \"min-norm\"");
        }
        if (const toml::table *t = n.as_table()) {
            const toml::node *p = t->get("pinned");
            if (!p) {
                fail(n, key, "table form needs 'pinned'");
            }
            std::string text;
            if (const auto *ps = p->as_string()) {
                text = ps->get();
            } else if (const toml::array *pa = p->as_array()) {
                for (const toml::node &e : *pa) {
                    const auto *es = e.as_string();
                    if (!es) {
                        fail(e, key + ".pinned", "entries must be strings");
                    }
                    text += (text.empty() ? "" : ",") + es->get();
                }
            } else {
                fail(*p, key + ".pinned", "must be a string or list of strings");
            }
            pins_from(*p, text);
            return cv;
        }
        const toml::array *a = n.as_array();
        if (!a || static_cast<Index>(a->size()) != outcomes) {
            fail(n, key, "explicit list needs one expression per outcome");
        }
        for (const toml::node &e : *a) {
            cv.expressions.push_back(expression_of(e, key));
        }
        cv.kind = CvConfig::Kind::closed_form;
        return cv;
    }

    Expectation read_expectation(const toml::node &n, std::size_t k,
                                 double default_tol) const {
        const std::string key = "expect[" + std::to_string(k + 1) + "]";
        const toml::table *t = table_of(n, key);
        Expectation e;
        const auto cmd = (*t)["command"].value<std::string>();
        const auto qty = (*t)["quantity"].value<std::string>();
        const auto val = (*t)["value"].value<double>();
        if (!cmd || !qty || !val) {
            fail(n, key, "needs command, quantity and value");
        }
        e.command = *cmd;
        e.quantity = *qty;
        e.value = *val;
        e.tol = number_of(*t, "tol", default_tol, key + ".tol");
        if (const toml::node *g = t->get("g")) {
            const auto gv = g->value<double>();
            if (!gv) {
                fail(*g, key + ".g", "must be a number");
            }
            e.g = *gv;
        }
        return e;
    }
};

} // namespace

const FamilyConfig &Scenario::family(const std::string &name) const {
    const std::string &key = name.empty() ? default_family : name;
    const auto it = families.find(key);
    if (it == families.end()) {
        throw ScenarioError(source + ": no family named '" + key + "'");
    }
    return it->second;
}

CvFamily make_cv_family(const FamilyConfig &config, const Observable &observable) {
    switch (config.cv.kind) {
    case CvConfig::Kind::closed_form:
        return CvFamily::closed_form(config.cv.expressions);
    case CvConfig::Kind::pinned:
        return CvFamily::solved(config.family, observable, config.cv.pins);
    case CvConfig::Kind::min_norm:
        break;
    }
    return CvFamily::solved(config.family, observable);
}

Scenario parse_scenario(std::string_view text, const std::string &source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error &e) {
        std::ostringstream os;
        os << source << ':' << e.source().begin.line << ": " << e.description();
        throw ScenarioError(os.str());
    }
    return Loader(source).load(root);
}

Scenario load_scenario(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError(path + ": cannot open scenario file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

} // namespace cvlab
