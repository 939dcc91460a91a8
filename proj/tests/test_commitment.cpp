#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "windcap/commitment.hpp"
#include "windcap/errors.hpp"

using namespace windcap;

TEST_CASE("uc: desk case matches exhaustive enumeration") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s = solve_uc(c);
  fixtures::UcEnumeration oracle = fixtures::brute_force_uc(c);
  REQUIRE(oracle.feasible);
  CHECK(s.objective ==
        doctest::Approx(oracle.objective).epsilon(1e-6));
  // and the returned schedule passes the direct checker
  const PtdfMatrix ptdf = compute_ptdf(c);
  CHECK(check_schedule(c, ptdf, s, 1e-6).empty());
}

TEST_CASE("uc: cheapest unit serves a flat no-wind load alone") {
  SystemCase c = fixtures::desk_case();
  for (auto& f : c.wind) f.forecast.assign(c.horizon, 0.0);
  const double flat = 60.0;
  const double share[3] = {0.4, 0.35, 0.25};
  for (int b = 0; b < 3; ++b) {
    for (int h = 0; h < c.horizon; ++h) c.loads(b, h) = flat * share[b];
  }
  CommitmentSchedule s = solve_uc(c);
  for (int h = 0; h < c.horizon; ++h) {
    CHECK(s.u_star(0, h) == 1);  // U1: cheaper energy, already on
    CHECK(s.u_star(1, h) == 0);
    CHECK(s.p(0, h) == doctest::Approx(flat));
  }
  fixtures::UcEnumeration oracle = fixtures::brute_force_uc(c);
  CHECK(s.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("uc: carried-in obligations") {
  ThermalUnit g;
  g.min_on = 8;
  g.min_off = 5;

  g.initial_state = 8;  // full minimum run already served
  CHECK(forced_on_hours(g) == 0);
  g.initial_state = 3;
  CHECK(forced_on_hours(g) == 5);
  g.initial_state = -5;  // minimum down already served
  CHECK(forced_off_hours(g) == 0);
  g.initial_state = -2;
  CHECK(forced_off_hours(g) == 3);

  // an initially-on unit with its obligation served may shut down at
  // hour 1: make running it strictly uneconomical
  SystemCase c = fixtures::desk_case();
  c.units[0].initial_state = 2;  // min_on = 2 served
  c.units[0].energy_cost = 500.0;
  c.units[0].min_run_cost = 500.0;
  for (auto& f : c.wind) f.forecast.assign(c.horizon, 0.0);
  for (int b = 0; b < 3; ++b) {
    for (int h = 0; h < c.horizon; ++h) c.loads(b, h) = (b == 1 ? 30.0 : 0.0);
  }
  c.reserve_up.assign(c.horizon, 0.0);
  c.reserve_down.assign(c.horizon, 0.0);
  CommitmentSchedule s = solve_uc(c);
  CHECK(s.u_star(0, 0) == 0);
  CHECK(s.u_star(1, 0) == 1);
}

TEST_CASE("uc: infeasible reserve reports a structured error") {
  SystemCase c = fixtures::desk_case();
  c.reserve_up.assign(c.horizon, 0.7);  // beyond installed capacity
  CHECK_THROWS_AS(solve_uc(c), InfeasibleError);
}

TEST_CASE("uc: relaxing line limits never increases cost") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule tight = solve_uc(c);
  SystemCase relaxed = c;
  for (auto& l : relaxed.lines) l.limit *= 100.0;
  CommitmentSchedule loose = solve_uc(relaxed);
  CHECK(loose.objective <= tight.objective + 1e-6 * (1 + tight.objective));
}

TEST_CASE("uc: schedule checker catches tampering") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s = solve_uc(c);
  const PtdfMatrix ptdf = compute_ptdf(c);
  REQUIRE(check_schedule(c, ptdf, s).empty());

  CommitmentSchedule bad = s;
  bad.p(0, 0) += 5.0;  // breaks the hour-1 balance
  CHECK_FALSE(check_schedule(c, ptdf, bad).empty());

  CommitmentSchedule off = s;
  off.u_star(0, 1) = 0;  // p > 0 on an off unit
  CHECK_FALSE(check_schedule(c, ptdf, off).empty());
}

TEST_CASE("ck constants: abbreviation formulas") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s;
  const int N = c.num_units(), H = c.horizon;
  s.u_star.setZero(N, H);
  s.v.setZero(N, H);
  s.p.setZero(N, H);

  // all off: zero committed band, jump envelopes at full capacity
  CkConstants k = derive_ck_constants(c, s);
  CHECK(k.p_lo.cwiseAbs().maxCoeff() == 0.0);
  CHECK(k.p_hi.cwiseAbs().maxCoeff() == 0.0);
  CHECK(k.dp_hi(0, 0) == doctest::Approx(c.units[0].p_max));
  CHECK(k.dp_lo(0, 0) == doctest::Approx(c.units[0].p_max));

  // committed unit ramps at its rate
  s.u_star.setOnes();
  k = derive_ck_constants(c, s);
  CHECK(k.p_lo(0, 0) == doctest::Approx(c.units[0].p_min));
  CHECK(k.p_hi(0, 0) == doctest::Approx(c.units[0].p_max));
  CHECK(k.dp_hi(0, 0) == doctest::Approx(c.units[0].ramp_up));
  CHECK(k.dp_lo(0, 0) == doctest::Approx(c.units[0].ramp_down));
}

TEST_CASE("ck constants: reserve band arithmetic") {
  // one committed 1200 MW unit against a 1000 MW load at 5% up reserve
  SystemCase c;
  c.buses = 1;
  c.slack_bus = 0;
  c.horizon = 1;
  ThermalUnit g;
  g.id = "G";
  g.bus = 0;
  g.p_min = 100;
  g.p_max = 1200;
  g.ramp_up = g.ramp_down = 100;
  g.min_on = g.min_off = 1;
  g.initial_state = 1;
  c.units = {g};
  c.loads.resize(1, 1);
  c.loads << 1000.0;
  c.reserve_up = {0.05};
  c.reserve_down = {0.05};
  CommitmentSchedule s;
  s.u_star.setOnes(1, 1);
  s.v.setZero(1, 1);
  s.p.setZero(1, 1);
  CkConstants k = derive_ck_constants(c, s);
  CHECK(k.r_hi(0) == doctest::Approx(1150.0));
  CHECK(k.r_lo(0) == doctest::Approx(150.0));
}

TEST_CASE("uc: random desk cases agree with enumeration") {
  std::mt19937_64 rng(31415);
  int solved = 0;
  for (int it = 0; it < 12; ++it) {
    SystemCase c = fixtures::random_desk_case(rng, 4);
    if (c.num_units() * c.horizon > 12) continue;
    fixtures::UcEnumeration oracle = fixtures::brute_force_uc(c);
    if (!oracle.feasible) {
      CHECK_THROWS_AS(solve_uc(c), InfeasibleError);
      continue;
    }
    CommitmentSchedule s = solve_uc(c);
    CHECK(s.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
    ++solved;
  }
  CHECK(solved >= 4);
}

TEST_CASE("schedule json round trip") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s = solve_uc(c);
  CommitmentSchedule t =
      schedule_from_json_text(schedule_to_json_text(s), "<test>");
  CHECK(t.objective == s.objective);
  CHECK((t.u_star - s.u_star).cwiseAbs().maxCoeff() == 0);
  CHECK((t.p - s.p).cwiseAbs().maxCoeff() == 0.0);
  CHECK(schedule_table(c, s).find("U1") != std::string::npos);
}
