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


#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cvlab/commands.hpp"
#include "cvlab/errors.hpp"
#include "cvlab/scenario.hpp"

using namespace cvlab;

namespace {

const std::string scenarios = CVLAB_SCENARIO_DIR;
const std::string data = CVLAB_TEST_DATA_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "cvlab");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

bool contains(const std::string &hay, const std::string &needle) {
    return hay.find(needle) != std::string::npos;
}

const char *minimal = R"toml(
dim = 2
observable = [["1", "0"], ["0", "-1"]]
[families.pol]
operators = [
  [["sqrt((1+g)/2)", 0], [0, "sqrt((1-g)/2)"]],
  [["sqrt((1-g)/2)", 0], [0, "sqrt((1+g)/2)"]],
]
)toml";

} // namespace

TEST_SUITE("cli") {

TEST_CASE("bundled polarization scenario") {
    const Scenario sc = load_scenario(scenarios + "/pryde.toml");
    const FamilyConfig &f = sc.family();
    CHECK(f.family.outcome_count() == 2);
    REQUIRE(f.cv.kind == CvConfig::Kind::closed_form);
    CHECK(to_string(f.cv.expressions[0]) == "1/g");
    CHECK(to_string(f.cv.expressions[1]) == "-1/g");
    CHECK(sc.observable.has_value());
    CHECK(sc.state_vector.has_value());
}

TEST_CASE("bundled three-outcome scenario") {
    const Scenario sc = load_scenario(scenarios + "/positive.toml");
    const FamilyConfig &f = sc.family();
    CHECK(f.family.outcome_count() == 3);
    REQUIRE(f.cv.kind == CvConfig::Kind::pinned);
    REQUIRE(f.cv.pins.size() == 1);
    CHECK(f.cv.pins[0].index == 0);
    CHECK(to_string(f.cv.pins[0].value) == "1/g^2");
    CHECK(sc.counterexample == "positive");
}

TEST_CASE("incomplete families fail at load with the defect norm") {
    try {
        (void)load_scenario(data + "/incomplete.toml");
        FAIL("expected a completeness error");
    } catch (const ModelError &e) {
        CHECK(contains(e.what(), "completeness"));
        CHECK(contains(e.what(), "defect norm"));
        CHECK(contains(e.what(), "families.broken"));
    }
    const Run r = cli({"solve", data + "/incomplete.toml"});
    CHECK(r.code == exit_code::bad_input);
}

TEST_CASE("syntax errors carry the line") {
    try {
        (void)parse_scenario("dim = 2\nobservable = [[1, 0], [0\n", "broken.toml");
        FAIL("expected a scenario error");
    } catch (const ScenarioError &e) {
        CHECK(contains(e.what(), "broken.toml:"));
    }
}

TEST_CASE("validation errors name the key") {
    const std::string bad_entry = std::string(minimal) + "cv = [\"1/g\", \"-1/\"]\n";
    try {
        (void)parse_scenario(bad_entry, "cv.toml");
        FAIL("expected a scenario error");
    } catch (const ScenarioError &e) {
        CHECK(contains(e.what(), "families.pol.cv"));
        CHECK(contains(e.what(), "cv.toml:9"));
    }
    CHECK_THROWS_AS(parse_scenario("observable = [[1]]\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(std::string(minimal) + "valid = [1, 0]\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(std::string(minimal) + "cv = \"largest\"\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(std::string("state = \"e3\"\n") + minimal), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(std::string("default_family = \"x\"\n") + minimal),
                    ScenarioError);
}

TEST_CASE("defaults and cv forms") {
    const Scenario sc = parse_scenario(minimal);
    CHECK(sc.default_family == "pol");
    CHECK(sc.family().cv.kind == CvConfig::Kind::min_norm);
    CHECK(sc.grid.size() == 4);
    const Scenario pinned =
        parse_scenario(std::string(minimal) + "cv = { pinned = \"alpha2=-1/g\" }\n");
    CHECK(pinned.family().cv.pins[0].index == 1);
    CHECK_THROWS_AS(static_cast<void>(sc.family("other")), ScenarioError);
}

TEST_CASE("state and vector shorthands") {
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(parse_vector("plus", 2)(1).real() == doctest::Approx(s));
    CHECK(parse_vector("++", 2)(0).real() == doctest::Approx(s));
    CHECK(parse_vector("-", 2)(1).real() == doctest::Approx(-s));
    CHECK(parse_vector("plus_i", 2)(1).imag() == doctest::Approx(s));
    CHECK(parse_vector("-i", 2)(1).imag() == doctest::Approx(-s));
    CHECK(parse_vector("e2", 3)(1) == Complex(1.0));
    CHECK(parse_vector("[3, 4i]", 2)(1).imag() == doctest::Approx(0.8));
    CHECK_THROWS_AS(parse_vector("e4", 3), DimensionError);
    CHECK_THROWS_AS(parse_vector("up", 2), ScenarioError);
    CHECK_THROWS_AS(parse_vector("[1, 2", 2), ScenarioError);
    CHECK_THROWS_AS(parse_vector("[g, 1]", 2), ScenarioError);
    CHECK_THROWS_AS(parse_vector("[0, 0]", 2), DegenerateError);

    CHECK(parse_state("mixed", 2).matrix()(1, 1).real() == doctest::Approx(0.5));
    const DensityState r = parse_state("[[2, 1], [1, 2]]", 2);
    CHECK(r.matrix()(0, 1).real() == doctest::Approx(0.25));
    CHECK(parse_state("e1", 2).matrix()(0, 0).real() == 1.0);
}

TEST_CASE("solve prints the documented row") {
    const Run r = cli({"solve", scenarios + "/pryde.toml", "--g", "0.1"});
    CHECK(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() >= 2);
    CHECK(ls[0] == "g,alpha1,alpha2,residual,solvable");
    std::istringstream row(ls[1]);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
        v.push_back(std::stod(cell));
    }
    REQUIRE(v.size() == 5);
    CHECK(v[0] == 0.1);
    CHECK(v[1] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(v[2] == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(v[3] < 1e-10);
    CHECK(v[4] == 1.0);
}

TEST_CASE("limit ends with the weak value") {
    const Run r = cli({"limit", scenarios + "/pryde.toml", "--rho", "++", "--f", "+"});
    CHECK(r.code == 0);
    CHECK(lines(r.out)[0] ==
          "g,conditioned_average,numerator,denominator,anticommutator_part,commutator_part,"
          "extrapolant");
    CHECK(contains(r.out, "# limit = 0 "));
    CHECK(contains(r.out, "# weak_value = 0\n"));
    const Run own = cli({"limit", scenarios + "/pryde.toml"});
    CHECK(own.code == 0);
    CHECK(contains(own.out, "# weak_value = 0.142857142857142"));
    CHECK(contains(own.out, "PASS"));
    CHECK_FALSE(contains(own.out, "FAIL"));
}

TEST_CASE("counterexample summaries") {
    const Run pos = cli({"counterexample", "positive", "--rho", "plus", "--f", "plus"});
    CHECK(pos.code == 0);
    CHECK(contains(pos.out, "# gap = -2.000000 (closed) / -2.000"));
    const Run bundled = cli({"counterexample", scenarios + "/positive.toml", "--rho", "plus", "--f", "plus"});
    CHECK(contains(bundled.out, "# gap = -2.000000 (closed) / -2.000"));
    const Run flat = cli({"counterexample", "twist", "--rho", "plus"});
    CHECK(flat.code == 0);
    CHECK(contains(flat.out, "# delta = 0.000000 (closed)"));
    const Run degenerate = cli({"counterexample", "positive", "--rho", "e2", "--f", "e1"});
    CHECK(degenerate.code == exit_code::bad_input);
    CHECK(contains(degenerate.err, "degenerate"));
    const Run scalar = cli({"counterexample", "twist", "--rho", "e3"});
    CHECK(scalar.code == exit_code::bad_input);
}

TEST_CASE("dilate and diagnose tables") {
    const Run d = cli({"dilate", scenarios + "/positive.toml", "--rho", "e1"});
    CHECK(d.code == 0);
    const auto dl = lines(d.out);
    CHECK(dl[0] == "outcome,probability,meter_probability,post_state_error");
    CHECK(contains(dl[1], "1,0.35999999999999"));
    const Run g = cli({"diagnose", scenarios + "/positive.toml"});
    CHECK(g.code == 0);
    CHECK(lines(g.out)[0] == "g,metric,value");
    CHECK(contains(g.out, "# certified_weak = yes"));
}

TEST_CASE("bundled scenarios pass their expectations") {
    for (const char *name : {"pryde.toml", "positive.toml", "twist.toml"}) {
        const Run r = cli({"check", scenarios + "/" + name});
        CHECK_MESSAGE(r.code == 0, name, r.out, r.err);
        CHECK(contains(r.out, " 0 failed"));
    }
}

TEST_CASE("expectation failures exit with 1") {
    const std::string text = std::string(minimal) +
                             "[[expect]]\ncommand = \"solve\"\nquantity = \"alpha1\"\n"
                             "g = 0.1\nvalue = 11\ntol = 1e-6\n";
    const std::string path = "cvlab_test_expect.toml";
    std::ofstream(path) << text;
    const Run r = cli({"check", path});
    std::remove(path.c_str());
    CHECK(r.code == exit_code::failure);
    CHECK(contains(r.out, "FAIL"));
}

TEST_CASE("--out writes the same bytes") {
    const std::string path = "cvlab_test_out.csv";
    const Run direct = cli({"solve", scenarios + "/positive.toml"});
    const Run file = cli({"solve", scenarios + "/positive.toml", "--out", path});
    CHECK(file.out.empty());
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    std::remove(path.c_str());
    CHECK(buf.str() == direct.out);
}

TEST_CASE("grid flag and bad arguments") {
    const Run r = cli({"solve", scenarios + "/pryde.toml", "--grid", "0.2:0.5:3"});
    CHECK(r.code == 0);
    CHECK(lines(r.out).size() >= 4);
    CHECK(cli({"solve", scenarios + "/pryde.toml", "--grid", "0.2:0.5"}).code ==
          exit_code::bad_input);
    CHECK(cli({"limit", scenarios + "/pryde.toml", "--grid", "0.1:0.3:5"}).code ==
          exit_code::bad_input);
    CHECK(cli({"solve", "missing.toml"}).code == exit_code::bad_input);
    CHECK(cli({"frobnicate"}).code == exit_code::bad_input);
    CHECK(cli({"counterexample", scenarios + "/pryde.toml"}).code == exit_code::bad_input);
}

TEST_CASE("unsolvable systems are not a success") {
    const std::string text = R"toml(
dim = 2
observable = [[1, 0], [0, -1]]
[families.blind]
operators = [[["sqrt(1/2)", 0], [0, "sqrt(1/2)"]], [["sqrt(1/2)", 0], [0, "sqrt(1/2)"]]]
)toml";
    const std::string path = "cvlab_test_blind.toml";
    std::ofstream(path) << text;
    const Run r = cli({"solve", path, "--g", "0.1"});
    std::remove(path.c_str());
    CHECK(r.code == exit_code::bad_input);
    CHECK(contains(r.out, ",0\n"));
}

TEST_CASE("output does not depend on the thread count") {
    const std::string path = scenarios + "/positive.toml";
    setenv("CVLAB_THREADS", "1", 1);
    const Run one = cli({"solve", path, "--grid", "0.1:0.8:12"});
    setenv("CVLAB_THREADS", "4", 1);
    const Run four = cli({"solve", path, "--grid", "0.1:0.8:12"});
    unsetenv("CVLAB_THREADS");
    CHECK(one.out == four.out);
}

} // TEST_SUITE
