#include "windcap/commitment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "windcap/errors.hpp"

namespace windcap {

using optkit::LinearModel;
using optkit::Relation;
using optkit::Term;

int forced_on_hours(const ThermalUnit& u) {
  if (u.initial_state <= 0) return 0;
  return std::max(0, u.min_on - u.initial_state);
}

int forced_off_hours(const ThermalUnit& u) {
  if (u.initial_state >= 0) return 0;
  return std::max(0, u.min_off + u.initial_state);  // initial_state < 0
}

LinearModel build_uc(const SystemCase& c, const PtdfMatrix& ptdf) {
  const int N = c.num_units();
  const int H = c.horizon;
  const UcIndex ix{N, H};
  LinearModel m;
  m.sense = optkit::Sense::Minimize;

  char name[48];
  for (int i = 0; i < N; ++i) {
    const ThermalUnit& g = c.units[i];
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "u:%s:%d", g.id.c_str(), h + 1);
      m.add_binary(g.min_run_cost, name);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "v:%s:%d", c.units[i].id.c_str(), h + 1);
      // integral at any optimum: it is forced up by the startup row and
      // costed down by the objective
      m.add_var(0.0, 1.0, c.units[i].startup_cost, name);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "p:%s:%d", c.units[i].id.c_str(), h + 1);
      m.add_var(0.0, c.units[i].p_max, c.units[i].energy_cost, name);
    }
  }

  // minimum-run / minimum-down obligations carried in from before the
  // horizon fix the leading states outright
  for (int i = 0; i < N; ++i) {
    const ThermalUnit& g = c.units[i];
    for (int h = 0; h < forced_on_hours(g); ++h) m.lo[ix.u(i, h)] = 1.0;
    for (int h = 0; h < forced_off_hours(g); ++h) m.hi[ix.u(i, h)] = 0.0;
  }

  for (int i = 0; i < N; ++i) {
    const ThermalUnit& g = c.units[i];
    const double u0 = g.initial_state > 0 ? 1.0 : 0.0;
    const double p0 = g.dispatch_before_horizon();

    // startup indicators
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "start:%s:%d", g.id.c_str(), h + 1);
      if (h == 0) {
        m.add_row(Relation::LessEqual, u0,
                  {{ix.u(i, 0), 1.0}, {ix.v(i, 0), -1.0}}, name);
      } else {
        m.add_row(Relation::LessEqual, 0.0,
                  {{ix.u(i, h), 1.0}, {ix.u(i, h - 1), -1.0},
                   {ix.v(i, h), -1.0}}, name);
      }
    }

    // a startup at h keeps the unit on through h + min_on - 1; a
    // shutdown keeps it off through h + min_off - 1 (windows clipped at
    // the horizon end; the k = h member is implied by the trigger)
    for (int h = 0; h < H; ++h) {
      for (int k = h + 1; k < std::min(h + g.min_on, H); ++k) {
        std::snprintf(name, sizeof name, "minon:%s:%d:%d", g.id.c_str(), h + 1,
                      k + 1);
        if (h == 0) {
          m.add_row(Relation::LessEqual, u0,
                    {{ix.u(i, 0), 1.0}, {ix.u(i, k), -1.0}}, name);
        } else {
          m.add_row(Relation::LessEqual, 0.0,
                    {{ix.u(i, h), 1.0}, {ix.u(i, h - 1), -1.0},
                     {ix.u(i, k), -1.0}}, name);
        }
      }
      for (int k = h + 1; k < std::min(h + g.min_off, H); ++k) {
        std::snprintf(name, sizeof name, "minoff:%s:%d:%d", g.id.c_str(),
                      h + 1, k + 1);
        if (h == 0) {
          m.add_row(Relation::LessEqual, 1.0 - u0,
                    {{ix.u(i, k), 1.0}, {ix.u(i, 0), -1.0}}, name);
        } else {
          m.add_row(Relation::LessEqual, 1.0,
                    {{ix.u(i, k), 1.0}, {ix.u(i, h), -1.0},
                     {ix.u(i, h - 1), 1.0}}, name);
        }
      }
    }

    // generation limits of committed units
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "cap+:%s:%d", g.id.c_str(), h + 1);
      m.add_row(Relation::LessEqual, 0.0,
                {{ix.p(i, h), 1.0}, {ix.u(i, h), -g.p_max}}, name);
      std::snprintf(name, sizeof name, "cap-:%s:%d", g.id.c_str(), h + 1);
      m.add_row(Relation::LessEqual, 0.0,
                {{ix.u(i, h), g.p_min}, {ix.p(i, h), -1.0}}, name);
    }

    // ramping between consecutive hours; an off unit may jump to any
    // output when starting (the P+ term)
    for (int h = 0; h + 1 < H; ++h) {
      std::snprintf(name, sizeof name, "ramp+:%s:%d", g.id.c_str(), h + 2);
      m.add_row(Relation::LessEqual, g.p_max,
                {{ix.p(i, h + 1), 1.0}, {ix.p(i, h), -1.0},
                 {ix.u(i, h), -(g.ramp_up - g.p_max)}}, name);
      std::snprintf(name, sizeof name, "ramp-:%s:%d", g.id.c_str(), h + 2);
      m.add_row(Relation::LessEqual, g.p_max,
                {{ix.p(i, h), 1.0}, {ix.p(i, h + 1), -1.0},
                 {ix.u(i, h + 1), -(g.ramp_down - g.p_max)}}, name);
    }
    // hour-1 moves measured against the pre-horizon dispatch
    std::snprintf(name, sizeof name, "ramp+:%s:1", g.id.c_str());
    m.add_row(Relation::LessEqual,
              p0 + (u0 > 0 ? g.ramp_up : g.p_max), {{ix.p(i, 0), 1.0}}, name);
    std::snprintf(name, sizeof name, "ramp-:%s:1", g.id.c_str());
    m.add_row(Relation::LessEqual, g.p_max - p0,
              {{ix.p(i, 0), -1.0}, {ix.u(i, 0), -(g.ramp_down - g.p_max)}},
              name);
  }

  // hourly power balance at forecast wind
  for (int h = 0; h < H; ++h) {
    std::vector<Term> terms;
    for (int i = 0; i < N; ++i) terms.push_back({ix.p(i, h), 1.0});
    std::snprintf(name, sizeof name, "balance:%d", h + 1);
    m.add_row(Relation::Equal, c.total_load(h) - c.total_wind_forecast(h),
              std::move(terms), name);
  }

  // spinning reserve in both directions
  for (int h = 0; h < H; ++h) {
    std::vector<Term> up, down;
    for (int i = 0; i < N; ++i) {
      up.push_back({ix.u(i, h), c.units[i].p_max});
      up.push_back({ix.p(i, h), -1.0});
      down.push_back({ix.p(i, h), 1.0});
      down.push_back({ix.u(i, h), -c.units[i].p_min});
    }
    std::snprintf(name, sizeof name, "res+:%d", h + 1);
    m.add_row(Relation::GreaterEqual, c.reserve_up[h] * c.total_load(h),
              std::move(up), name);
    std::snprintf(name, sizeof name, "res-:%d", h + 1);
    m.add_row(Relation::GreaterEqual, c.reserve_down[h] * c.total_load(h),
              std::move(down), name);
  }

  // line limits on the dispatch-dependent part of the flow
  const int K = c.num_lines();
  for (int k = 0; k < K; ++k) {
    for (int h = 0; h < H; ++h) {
      double fixed = 0.0;  // wind and load contributions
      for (const WindFarm& f : c.wind) {
        fixed += ptdf.h(k, f.bus) * f.forecast[h];
      }
      for (int b = 0; b < c.buses; ++b) fixed -= ptdf.h(k, b) * c.loads(b, h);
      std::vector<Term> terms;
      for (int i = 0; i < N; ++i) {
        const double coef = ptdf.h(k, c.units[i].bus);
        if (std::fabs(coef) > 1e-9) terms.push_back({ix.p(i, h), coef});
      }
      std::snprintf(name, sizeof name, "line+:%s:%d", c.lines[k].id.c_str(),
                    h + 1);
      m.add_row(Relation::LessEqual, c.lines[k].limit - fixed, terms, name);
      std::snprintf(name, sizeof name, "line-:%s:%d", c.lines[k].id.c_str(),
                    h + 1);
      for (Term& t : terms) t.coef = -t.coef;
      m.add_row(Relation::LessEqual, c.lines[k].limit + fixed,
                std::move(terms), name);
    }
  }

  return m;
}

CommitmentSchedule solve_uc(const SystemCase& c,
                            const optkit::SolveOptions& options) {
  c.validate();
  const PtdfMatrix ptdf = compute_ptdf(c);
  const LinearModel model = build_uc(c, ptdf);
  const optkit::SolveOutcome out = optkit::solve_milp(model, options);
  if (out.status == optkit::SolveStatus::Infeasible) {
    throw InfeasibleError(
        "unit commitment is infeasible: no on/off pattern can serve the "
        "load with the configured reserves, ramps and line limits; check "
        "total capacity against peak load times (1 + reserve), the hour-1 "
        "ramps against initial dispatch, and line limits on loaded "
        "corridors");
  }
  if (out.status != optkit::SolveStatus::Optimal) {
    throw Error(std::string("unit commitment solve failed: ") +
                optkit::to_string(out.status));
  }

  const int N = c.num_units();
  const int H = c.horizon;
  const UcIndex ix{N, H};
  CommitmentSchedule s;
  s.u_star.resize(N, H);
  s.v.resize(N, H);
  s.p.resize(N, H);
  for (int i = 0; i < N; ++i) {
    const double u0 = c.units[i].initial_state > 0 ? 1.0 : 0.0;
    for (int h = 0; h < H; ++h) {
      s.u_star(i, h) = out.primal[ix.u(i, h)] > 0.5 ? 1 : 0;
      const int prev = h == 0 ? static_cast<int>(u0) : s.u_star(i, h - 1);
      s.v(i, h) = std::max(0, s.u_star(i, h) - prev);
      s.p(i, h) = out.primal[ix.p(i, h)];
    }
  }
  s.objective = out.objective;

  const auto violations = check_schedule(c, ptdf, s, 1e-5);
  if (!violations.empty()) {
    throw NumericalError("unit commitment returned a schedule that fails "
                         "re-validation: " + violations.front());
  }
  return s;
}

std::vector<std::string> check_schedule(const SystemCase& c,
                                        const PtdfMatrix& ptdf,
                                        const CommitmentSchedule& s,
                                        double tol) {
  std::vector<std::string> bad;
  const int N = c.num_units();
  const int H = c.horizon;
  char buf[160];
  auto flag = [&](const char* what, const std::string& who, int h, double lhs,
                  double rhs) {
    std::snprintf(buf, sizeof buf, "%s (%s, hour %d): %.6f vs %.6f", what,
                  who.c_str(), h + 1, lhs, rhs);
    bad.emplace_back(buf);
  };

  for (int i = 0; i < N; ++i) {
    const ThermalUnit& g = c.units[i];
    const int u0 = g.initial_state > 0 ? 1 : 0;
    auto u_at = [&](int h) { return h < 0 ? u0 : s.u_star(i, h); };

    for (int h = 0; h < forced_on_hours(g); ++h) {
      if (s.u_star(i, h) != 1) flag("carried-in minimum run", g.id, h, s.u_star(i, h), 1);
    }
    for (int h = 0; h < forced_off_hours(g); ++h) {
      if (s.u_star(i, h) != 0) flag("carried-in minimum down", g.id, h, s.u_star(i, h), 0);
    }
    for (int h = 0; h < H; ++h) {
      if (s.v(i, h) < u_at(h) - u_at(h - 1)) {
        flag("startup indicator", g.id, h, s.v(i, h), u_at(h) - u_at(h - 1));
      }
      for (int k = h; k < std::min(h + g.min_on, H); ++k) {
        if (u_at(k) < u_at(h) - u_at(h - 1)) {
          flag("minimum run window", g.id, h, u_at(k), u_at(h) - u_at(h - 1));
        }
      }
      for (int k = h; k < std::min(h + g.min_off, H); ++k) {
        if (u_at(k) > 1 - u_at(h - 1) + u_at(h)) {
          flag("minimum down window", g.id, h, u_at(k), 1 - u_at(h - 1) + u_at(h));
        }
      }
      const double p = s.p(i, h);
      if (p < u_at(h) * g.p_min - tol || p > u_at(h) * g.p_max + tol) {
        flag("generation limits", g.id, h, p, u_at(h) * g.p_max);
      }
    }
    for (int h = -1; h + 1 < H; ++h) {
      const double prev = h < 0 ? g.dispatch_before_horizon() : s.p(i, h);
      const double next = s.p(i, h + 1);
      const double up_cap = u_at(h) * g.ramp_up + (1 - u_at(h)) * g.p_max;
      const double dn_cap =
          u_at(h + 1) * g.ramp_down + (1 - u_at(h + 1)) * g.p_max;
      if (next - prev > up_cap + tol) flag("ramp up", g.id, h + 1, next - prev, up_cap);
      if (prev - next > dn_cap + tol) flag("ramp down", g.id, h + 1, prev - next, dn_cap);
    }
  }

  for (int h = 0; h < H; ++h) {
    const double gen = s.p.col(h).sum();
    const double need = c.total_load(h) - c.total_wind_forecast(h);
    if (std::fabs(gen - need) > tol) flag("power balance", "system", h, gen, need);

    double up = 0, down = 0;
    for (int i = 0; i < N; ++i) {
      up += s.u_star(i, h) * c.units[i].p_max - s.p(i, h);
      down += s.p(i, h) - s.u_star(i, h) * c.units[i].p_min;
    }
    if (up < c.reserve_up[h] * c.total_load(h) - tol) {
      flag("up reserve", "system", h, up, c.reserve_up[h] * c.total_load(h));
    }
    if (down < c.reserve_down[h] * c.total_load(h) - tol) {
      flag("down reserve", "system", h, down,
           c.reserve_down[h] * c.total_load(h));
    }
  }

  for (int k = 0; k < c.num_lines(); ++k) {
    for (int h = 0; h < H; ++h) {
      double flow = 0.0;
      for (int i = 0; i < N; ++i) {
        flow += ptdf.h(k, c.units[i].bus) * s.p(i, h);
      }
      for (const WindFarm& f : c.wind) {
        flow += ptdf.h(k, f.bus) * f.forecast[h];
      }
      for (int b = 0; b < c.buses; ++b) flow -= ptdf.h(k, b) * c.loads(b, h);
      if (std::fabs(flow) > c.lines[k].limit + tol) {
        flag("line limit", c.lines[k].id, h, flow, c.lines[k].limit);
      }
    }
  }
  return bad;
}

CkConstants derive_ck_constants(const SystemCase& c,
                                const CommitmentSchedule& s) {
  const int N = c.num_units();
  const int H = c.horizon;
  CkConstants k;
  k.p_lo.resize(N, H);
  k.p_hi.resize(N, H);
  k.dp_hi.resize(N, std::max(0, H - 1));
  k.dp_lo.resize(N, std::max(0, H - 1));
  k.r_lo.resize(H);
  k.r_hi.resize(H);
  for (int i = 0; i < N; ++i) {
    const ThermalUnit& g = c.units[i];
    for (int h = 0; h < H; ++h) {
      k.p_lo(i, h) = s.u_star(i, h) * g.p_min;
      k.p_hi(i, h) = s.u_star(i, h) * g.p_max;
    }
    for (int h = 0; h + 1 < H; ++h) {
      k.dp_hi(i, h) =
          s.u_star(i, h) * g.ramp_up + (1 - s.u_star(i, h)) * g.p_max;
      k.dp_lo(i, h) =
          s.u_star(i, h + 1) * g.ramp_down + (1 - s.u_star(i, h + 1)) * g.p_max;
    }
  }
  for (int h = 0; h < H; ++h) {
    double cap = 0, floor = 0;
    for (int i = 0; i < N; ++i) {
      cap += s.u_star(i, h) * c.units[i].p_max;
      floor += s.u_star(i, h) * c.units[i].p_min;
    }
    k.r_lo(h) = floor + c.reserve_down[h] * c.total_load(h);
    k.r_hi(h) = cap - c.reserve_up[h] * c.total_load(h);
  }
  return k;
}

std::string schedule_to_json_text(const CommitmentSchedule& s) {
  nlohmann::json j;
  j["objective"] = s.objective;
  j["u"] = nlohmann::json::array();
  j["p"] = nlohmann::json::array();
  for (int i = 0; i < s.u_star.rows(); ++i) {
    nlohmann::json urow = nlohmann::json::array();
    nlohmann::json prow = nlohmann::json::array();
    for (int h = 0; h < s.u_star.cols(); ++h) {
      urow.push_back(s.u_star(i, h));
      prow.push_back(s.p(i, h));
    }
    j["u"].push_back(std::move(urow));
    j["p"].push_back(std::move(prow));
  }
  return j.dump(2) + "\n";
}

CommitmentSchedule schedule_from_json_text(const std::string& text,
                                           const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin, e.what());
  }
  CommitmentSchedule s;
  try {
    const auto& u = j.at("u");
    const auto& p = j.at("p");
    const int n = static_cast<int>(u.size());
    if (n == 0) throw ParseError(origin, "empty schedule");
    const int hh = static_cast<int>(u[0].size());
    s.u_star.resize(n, hh);
    s.v.resize(n, hh);
    s.p.resize(n, hh);
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < hh; ++h) {
        s.u_star(i, h) = u[i][h].get<int>();
        s.p(i, h) = p[i][h].get<double>();
        s.v(i, h) = h == 0 ? 0 : std::max(0, s.u_star(i, h) - s.u_star(i, h - 1));
      }
    }
    s.objective = j.at("objective").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin, e.what());
  }
  return s;
}

void save_schedule(const CommitmentSchedule& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open schedule file for writing: " + path);
  f << schedule_to_json_text(s);
}

CommitmentSchedule load_schedule(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, "cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return schedule_from_json_text(ss.str(), path);
}

std::string schedule_table(const SystemCase& c, const CommitmentSchedule& s) {
  std::ostringstream os;
  os << "unit     |";
  for (int h = 0; h < c.horizon; ++h) {
    char b[16];
    std::snprintf(b, sizeof b, "%3d", h + 1);
    os << b;
  }
  os << "\n---------+" << std::string(3 * c.horizon, '-') << "\n";
  for (int i = 0; i < c.num_units(); ++i) {
    char b[32];
    std::snprintf(b, sizeof b, "%-9s|", c.units[i].id.c_str());
    os << b;
    for (int h = 0; h < c.horizon; ++h) {
      os << (s.u_star(i, h) ? "  #" : "  .");
    }
    os << "\n";
  }
  char total[64];
  std::snprintf(total, sizeof total, "cost: $%.2f\n", s.objective);
  os << total;
  return os.str();
}

}  // namespace windcap
