// Shared fixtures and brute-force oracles for the desk-scale suites.
#pragma once

#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "windcap/admissibility.hpp"
#include "windcap/commitment.hpp"
#include "windcap/estimator.hpp"
#include "windcap/model.hpp"
#include "windcap/uncertainty.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) {
  const char* dir = std::getenv("WINDCAP_DATA");
  if (!dir) throw std::runtime_error("WINDCAP_DATA not set");
  return std::string(dir) + "/" + name;
}

inline windcap::SystemCase desk_case() {
  return windcap::load_case(data_path("case3.json"));
}

/// A random small-but-valid case: connected network, positive forecasts,
/// loads sized so a dispatch usually exists.
inline windcap::SystemCase random_desk_case(std::mt19937_64& rng,
                                            int max_m = 6) {
  std::uniform_int_distribution<int> nbus(2, 3), nunit(1, 2), nfarm(1, 2);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * u01(rng); };

  windcap::SystemCase c;
  c.buses = nbus(rng);
  c.slack_bus = c.buses - 1;
  const int farms = nfarm(rng);
  int horizon = 2 + static_cast<int>(u01(rng) * 3);  // 2..4
  while (farms * horizon > max_m) --horizon;
  c.horizon = horizon;

  // spanning tree plus an occasional chord
  for (int b = 1; b < c.buses; ++b) {
    std::uniform_int_distribution<int> parent(0, b - 1);
    c.lines.push_back({"L" + std::to_string(b), parent(rng), b,
                       uniform(0.05, 0.3), uniform(80, 200)});
  }
  if (c.buses == 3 && u01(rng) < 0.5) {
    c.lines.push_back({"Lx", 0, 2, uniform(0.05, 0.3), uniform(80, 200)});
  }

  const int units = nunit(rng);
  for (int i = 0; i < units; ++i) {
    windcap::ThermalUnit g;
    g.id = "U" + std::to_string(i + 1);
    std::uniform_int_distribution<int> bus(0, c.buses - 1);
    g.bus = bus(rng);
    g.p_min = uniform(2, 15);
    g.p_max = g.p_min + uniform(40, 120);
    g.ramp_up = uniform(25, 70);
    g.ramp_down = uniform(25, 70);
    g.startup_cost = uniform(10, 200);
    g.energy_cost = uniform(10, 40);
    g.min_run_cost = uniform(0, 20);
    std::uniform_int_distribution<int> t12(1, 2);
    g.min_on = t12(rng);
    g.min_off = t12(rng);
    g.initial_state = u01(rng) < 0.5 ? 3 : -3;
    c.units.push_back(std::move(g));
  }

  c.wind.clear();
  for (int f = 0; f < farms; ++f) {
    windcap::WindFarm farm;
    std::uniform_int_distribution<int> bus(0, c.buses - 1);
    farm.bus = bus(rng);
    for (int h = 0; h < c.horizon; ++h) farm.forecast.push_back(uniform(4, 25));
    c.wind.push_back(std::move(farm));
  }

  // loads sized against the fleet so the forecast point is absorbable
  double cap = 0;
  for (const auto& g : c.units) cap += g.p_max;
  c.loads.resize(c.buses, c.horizon);
  for (int h = 0; h < c.horizon; ++h) {
    const double wind_h = c.total_wind_forecast(h);
    const double target = wind_h + uniform(0.3, 0.7) * cap;
    for (int b = 0; b < c.buses; ++b) {
      c.loads(b, h) = target / c.buses * uniform(0.5, 1.5);
    }
  }
  const double rr = uniform(0.0, 0.05);
  c.reserve_up.assign(c.horizon, rr);
  c.reserve_down.assign(c.horizon, rr);
  c.validate();
  return c;
}

/// Any 0/1 pattern is a valid input to the feasibility check (it need
/// not honor minimum run times; those belong to the commitment search).
inline windcap::CommitmentSchedule random_schedule(std::mt19937_64& rng,
                                                   const windcap::SystemCase& c) {
  std::bernoulli_distribution onoff(0.7);
  windcap::CommitmentSchedule s;
  const int n = c.num_units();
  s.u_star.resize(n, c.horizon);
  s.v.resize(n, c.horizon);
  s.p.setZero(n, c.horizon);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < c.horizon; ++h) {
      s.u_star(i, h) = onoff(rng) ? 1 : 0;
      const int prev = h ? s.u_star(i, h - 1)
                         : (c.units[i].initial_state > 0 ? 1 : 0);
      s.v(i, h) = std::max(0, s.u_star(i, h) - prev);
    }
  }
  return s;
}

/// Exhaustive worst corner: max of the direct check over all 2^m box
/// corners. Returns {value, corner index}.
inline std::pair<double, long> corner_max(const windcap::SystemCase& c,
                                          const windcap::CkConstants& k,
                                          const windcap::UncertaintyModel& um,
                                          const windcap::BoxSet& box) {
  const int m = um.m;
  if (m > 16) throw std::runtime_error("corner oracle: m too large");
  double best = -1;
  long best_mask = 0;
  for (long mask = 0; mask < (1L << m); ++mask) {
    Eigen::VectorXd x(m);
    for (int n = 0; n < m; ++n) {
      x(n) = (mask >> n) & 1 ? box.x_hi(n) : box.x_lo(n);
    }
    const Eigen::VectorXd w = um.lambda_sqrt * x;
    const double value = windcap::evaluate_ck(c, k, um, w).value;
    if (value > best) {
      best = value;
      best_mask = mask;
    }
  }
  return {best, best_mask};
}

struct UcEnumeration {
  bool feasible = false;
  double objective = 0.0;
  Eigen::MatrixXi u;
};

/// Brute force over every on/off pattern: filters the ones violating
/// startup logic or minimum run/down windows, prices the rest with a
/// dispatch-only LP, and keeps the cheapest. Independent of the MILP
/// search (shares only the LP kernel).
inline UcEnumeration brute_force_uc(const windcap::SystemCase& c) {
  using namespace windcap;
  const int N = c.num_units();
  const int H = c.horizon;
  if (N * H > 20) throw std::runtime_error("uc oracle: pattern space too large");
  const PtdfMatrix ptdf = compute_ptdf(c);

  UcEnumeration best;
  for (long mask = 0; mask < (1L << (N * H)); ++mask) {
    Eigen::MatrixXi u(N, H);
    for (int i = 0; i < N; ++i) {
      for (int h = 0; h < H; ++h) u(i, h) = (mask >> (i * H + h)) & 1;
    }

    // commitment-logic feasibility
    bool ok = true;
    double fixed_cost = 0;
    for (int i = 0; i < N && ok; ++i) {
      const ThermalUnit& g = c.units[i];
      const int u0 = g.initial_state > 0 ? 1 : 0;
      for (int h = 0; h < forced_on_hours(g); ++h) ok = ok && u(i, h) == 1;
      for (int h = 0; h < forced_off_hours(g); ++h) ok = ok && u(i, h) == 0;
      auto at = [&](int h) { return h < 0 ? u0 : u(i, h); };
      for (int h = 0; h < H && ok; ++h) {
        if (at(h) - at(h - 1) == 1) {  // startup
          fixed_cost += g.startup_cost;
          for (int k = h; k < std::min(h + g.min_on, H); ++k) {
            ok = ok && u(i, k) == 1;
          }
        }
        if (at(h - 1) - at(h) == 1) {  // shutdown
          for (int k = h; k < std::min(h + g.min_off, H); ++k) {
            ok = ok && u(i, k) == 0;
          }
        }
        fixed_cost += u(i, h) * g.min_run_cost;
      }
    }
    if (!ok) continue;

    // dispatch LP under the fixed pattern
    optkit::LinearModel lp;
    std::vector<int> pv(N * H);
    for (int i = 0; i < N; ++i) {
      for (int h = 0; h < H; ++h) {
        pv[i * H + h] = lp.add_var(u(i, h) * c.units[i].p_min,
                                   u(i, h) * c.units[i].p_max,
                                   c.units[i].energy_cost);
      }
    }
    for (int i = 0; i < N; ++i) {
      const ThermalUnit& g = c.units[i];
      const int u0 = g.initial_state > 0 ? 1 : 0;
      const double p0 = g.dispatch_before_horizon();
      for (int h = -1; h + 1 < H; ++h) {
        const int uh = h < 0 ? u0 : u(i, h);
        const double up = uh * g.ramp_up + (1 - uh) * g.p_max;
        const double dn =
            u(i, h + 1) * g.ramp_down + (1 - u(i, h + 1)) * g.p_max;
        if (h < 0) {
          lp.add_row(optkit::Relation::LessEqual, p0 + up, {{pv[i * H], 1.0}});
          lp.add_row(optkit::Relation::LessEqual, dn - p0, {{pv[i * H], -1.0}});
        } else {
          lp.add_row(optkit::Relation::LessEqual, up,
                     {{pv[i * H + h + 1], 1.0}, {pv[i * H + h], -1.0}});
          lp.add_row(optkit::Relation::LessEqual, dn,
                     {{pv[i * H + h], 1.0}, {pv[i * H + h + 1], -1.0}});
        }
      }
    }
    for (int h = 0; h < H; ++h) {
      std::vector<optkit::Term> bal;
      for (int i = 0; i < N; ++i) bal.push_back({pv[i * H + h], 1.0});
      lp.add_row(optkit::Relation::Equal,
                 c.total_load(h) - c.total_wind_forecast(h), bal);
      std::vector<optkit::Term> up, dn;
      double cap = 0, floor_sum = 0;
      for (int i = 0; i < N; ++i) {
        cap += u(i, h) * c.units[i].p_max;
        floor_sum += u(i, h) * c.units[i].p_min;
        up.push_back({pv[i * H + h], -1.0});
        dn.push_back({pv[i * H + h], 1.0});
      }
      lp.add_row(optkit::Relation::GreaterEqual,
                 c.reserve_up[h] * c.total_load(h) - cap, up);
      lp.add_row(optkit::Relation::GreaterEqual,
                 c.reserve_down[h] * c.total_load(h) + floor_sum, dn);
    }
    for (int k = 0; k < c.num_lines(); ++k) {
      for (int h = 0; h < H; ++h) {
        double fixed = 0;
        for (const WindFarm& f : c.wind) {
          fixed += ptdf.h(k, f.bus) * f.forecast[h];
        }
        for (int b = 0; b < c.buses; ++b) fixed -= ptdf.h(k, b) * c.loads(b, h);
        std::vector<optkit::Term> flow;
        for (int i = 0; i < N; ++i) {
          const double coef = ptdf.h(k, c.units[i].bus);
          if (std::fabs(coef) > 1e-9) flow.push_back({pv[i * H + h], coef});
        }
        lp.add_row(optkit::Relation::LessEqual, c.lines[k].limit - fixed, flow);
        for (auto& t : flow) t.coef = -t.coef;
        lp.add_row(optkit::Relation::LessEqual, c.lines[k].limit + fixed, flow);
      }
    }
    const optkit::SolveOutcome out = optkit::solve_lp(lp);
    if (out.status != optkit::SolveStatus::Optimal) continue;
    const double total = fixed_cost + out.objective;
    if (!best.feasible || total < best.objective - 1e-9) {
      best.feasible = true;
      best.objective = total;
      best.u = u;
    }
  }
  return best;
}

}  // namespace fixtures
