#include <cstdlib>
#include <string>

#include "doctest.h"
#include "windcap/errors.hpp"
#include "windcap/model.hpp"

using namespace windcap;

namespace {

std::string data_path(const std::string& name) {
  const char* dir = std::getenv("WINDCAP_DATA");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

SystemCase two_bus_case() {
  SystemCase c;
  c.buses = 2;
  c.slack_bus = 1;
  c.horizon = 1;
  c.lines = {{"L1", 0, 1, 0.1, 50.0}};
  ThermalUnit u;
  u.id = "U1"; u.bus = 0;
  u.p_min = 0; u.p_max = 10;
  u.ramp_up = u.ramp_down = 10;
  u.min_on = u.min_off = 1;
  u.initial_state = 1;
  c.units = {u};
  c.loads = Eigen::MatrixXd::Zero(2, 1);
  c.wind = {};
  c.reserve_up = {0.0};
  c.reserve_down = {0.0};
  return c;
}

}  // namespace

TEST_CASE("load_case: bundled 39-bus fixture") {
  SystemCase c = load_case(data_path("case39.json"));
  CHECK(c.buses == 39);
  CHECK(c.num_lines() == 46);
  CHECK(c.num_units() == 10);
  CHECK(c.num_farms() == 1);
  CHECK(c.wind[0].bus == 9);
  CHECK(c.horizon == 24);
  CHECK(c.units[0].p_max == 455.0);
  CHECK(c.units[0].initial_state == 8);
  CHECK(c.units[0].min_on == 8);
}

TEST_CASE("load_case: bundled desk fixture") {
  SystemCase c = load_case(data_path("case3.json"));
  CHECK(c.buses == 3);
  CHECK(c.horizon == 4);
  CHECK(c.num_units() == 2);
  CHECK(c.num_farms() == 1);
  CHECK(c.total_load(2) == doctest::Approx(140.0));
}

TEST_CASE("load_case: errors") {
  CHECK_THROWS_AS(load_case("/nonexistent/path.json"), ParseError);
  CHECK_THROWS_AS(case_from_json_text("{ not json"), ParseError);
  CHECK_THROWS_AS(case_from_json_text("{}"), ParseError);

  // invariant violation: p_min > p_max
  SystemCase c = two_bus_case();
  c.units[0].p_min = 20;
  c.units[0].p_max = 10;
  CHECK_THROWS_AS(case_from_json_text(case_to_json_text(c)), ValidationError);

  SystemCase z = two_bus_case();
  z.units[0].initial_state = 0;
  CHECK_THROWS_AS(z.validate(), ValidationError);

  SystemCase r = two_bus_case();
  r.reserve_up = {1.5};
  CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("case round trip") {
  SystemCase a = load_case(data_path("case39.json"));
  SystemCase b = case_from_json_text(case_to_json_text(a));
  CHECK(a.buses == b.buses);
  CHECK(a.slack_bus == b.slack_bus);
  CHECK((a.loads - b.loads).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.units.size() == b.units.size());
  for (size_t i = 0; i < a.units.size(); ++i) {
    CHECK(a.units[i].id == b.units[i].id);
    CHECK(a.units[i].energy_cost == b.units[i].energy_cost);
    CHECK(a.units[i].initial_dispatch == b.units[i].initial_dispatch);
  }
  CHECK(a.lines.size() == b.lines.size());
  CHECK(a.wind[0].forecast == b.wind[0].forecast);
  CHECK(case_to_json_text(a) == case_to_json_text(b));
}

TEST_CASE("ptdf: radial two-bus line") {
  SystemCase c = two_bus_case();
  PtdfMatrix p = compute_ptdf(c);
  CHECK(p.h(0, 0) == doctest::Approx(1.0));
  CHECK(p.h(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("ptdf: equal-reactance triangle splits 1/3 : 2/3") {
  SystemCase c;
  c.buses = 3;
  c.slack_bus = 2;
  c.horizon = 1;
  c.lines = {{"a", 0, 1, 0.1, 10}, {"b", 1, 2, 0.1, 10}, {"c", 0, 2, 0.1, 10}};
  c.loads = Eigen::MatrixXd::Zero(3, 1);
  c.reserve_up = {0.0};
  c.reserve_down = {0.0};
  PtdfMatrix p = compute_ptdf(c);
  // injection at bus 0 withdrawn at slack: one third around the long way
  CHECK(p.h(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(p.h(1, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(p.h(2, 0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("ptdf: slack column is zero") {
  SystemCase c = load_case(data_path("case39.json"));
  PtdfMatrix p = compute_ptdf(c);
  CHECK(p.h.col(c.slack_bus).cwiseAbs().maxCoeff() == 0.0);
  // self sensitivity of every line in (0, 1]
  for (int k = 0; k < c.num_lines(); ++k) {
    const double self = p.h(k, c.lines[k].from_bus) - p.h(k, c.lines[k].to_bus);
    CHECK(self > 0.0);
    CHECK(self <= 1.0 + 1e-9);
  }
}

TEST_CASE("ptdf: disconnected network is a structured error") {
  SystemCase c;
  c.buses = 4;
  c.slack_bus = 0;
  c.horizon = 1;
  c.lines = {{"a", 0, 1, 0.1, 10}, {"b", 2, 3, 0.1, 10}};
  c.loads = Eigen::MatrixXd::Zero(4, 1);
  c.reserve_up = {0.0};
  c.reserve_down = {0.0};
  CHECK_THROWS_AS(compute_ptdf(c), NumericalError);
}

TEST_CASE("ptdf: balanced injections are slack invariant") {
  SystemCase c = load_case(data_path("case39.json"));
  PtdfMatrix p1 = compute_ptdf(c, 38);
  PtdfMatrix p2 = compute_ptdf(c, 0);
  // a balanced injection: +1 at bus 5, -0.4 at bus 20, -0.6 at bus 30
  Eigen::VectorXd inj = Eigen::VectorXd::Zero(39);
  inj(5) = 1.0;
  inj(20) = -0.4;
  inj(30) = -0.6;
  const Eigen::VectorXd f1 = p1.h * inj;
  const Eigen::VectorXd f2 = p2.h * inj;
  CHECK((f1 - f2).cwiseAbs().maxCoeff() < 1e-9);
}
