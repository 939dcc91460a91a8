#include "windcap/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/LU>

#include "json.hpp"
#include "windcap/errors.hpp"

namespace windcap {

using nlohmann::json;

double SystemCase::total_wind_forecast(int h) const {
  double s = 0.0;
  for (const WindFarm& f : wind) s += f.forecast[h];
  return s;
}

void SystemCase::validate() const {
  if (buses < 1) throw ValidationError("case: needs at least one bus");
  if (horizon < 1) throw ValidationError("case: needs at least one hour");
  if (slack_bus < 0 || slack_bus >= buses) {
    throw ValidationError("case: slack_bus out of range");
  }
  if (loads.rows() != buses || loads.cols() != horizon) {
    throw ValidationError("case: loads matrix must be buses x horizon (" +
                          std::to_string(buses) + " x " +
                          std::to_string(horizon) + ")");
  }
  if ((loads.array() < 0).any()) {
    throw ValidationError("case: loads must be nonnegative");
  }
  if (static_cast<int>(reserve_up.size()) != horizon ||
      static_cast<int>(reserve_down.size()) != horizon) {
    throw ValidationError("case: reserve vectors must have one entry per hour");
  }
  for (int h = 0; h < horizon; ++h) {
    if (reserve_up[h] < 0 || reserve_up[h] >= 1 || reserve_down[h] < 0 ||
        reserve_down[h] >= 1) {
      throw ValidationError("case: reserve fractions must lie in [0, 1)");
    }
  }
  std::set<std::string> unit_ids;
  for (const ThermalUnit& u : units) {
    const std::string tag = "unit '" + u.id + "': ";
    if (!unit_ids.insert(u.id).second) {
      throw ValidationError(tag + "duplicate id");
    }
    if (u.bus < 0 || u.bus >= buses) throw ValidationError(tag + "bus out of range");
    if (u.p_min < 0) throw ValidationError(tag + "p_min must be >= 0");
    if (u.p_min > u.p_max) throw ValidationError(tag + "p_min exceeds p_max");
    if (u.ramp_up <= 0 || u.ramp_down <= 0) {
      throw ValidationError(tag + "ramp rates must be positive");
    }
    if (u.min_on < 1 || u.min_off < 1) {
      throw ValidationError(tag + "min_on/min_off must be >= 1");
    }
    if (u.initial_state == 0) {
      throw ValidationError(tag + "initial_state must be nonzero");
    }
  }
  std::set<std::string> line_ids;
  for (const Line& l : lines) {
    const std::string tag = "line '" + l.id + "': ";
    if (!line_ids.insert(l.id).second) {
      throw ValidationError(tag + "duplicate id");
    }
    if (l.from_bus == l.to_bus) throw ValidationError(tag + "self loop");
    if (l.from_bus < 0 || l.from_bus >= buses || l.to_bus < 0 ||
        l.to_bus >= buses) {
      throw ValidationError(tag + "bus out of range");
    }
    if (l.reactance <= 0) throw ValidationError(tag + "reactance must be > 0");
    if (l.limit <= 0) throw ValidationError(tag + "limit must be > 0");
  }
  for (size_t f = 0; f < wind.size(); ++f) {
    const std::string tag = "wind farm " + std::to_string(f) + ": ";
    if (wind[f].bus < 0 || wind[f].bus >= buses) {
      throw ValidationError(tag + "bus out of range");
    }
    if (static_cast<int>(wind[f].forecast.size()) != horizon) {
      throw ValidationError(tag + "forecast must have one entry per hour");
    }
    for (double w : wind[f].forecast) {
      if (w < 0) throw ValidationError(tag + "forecast must be nonnegative");
    }
  }
  if (uncertainty) {
    const size_t m = static_cast<size_t>(wind.size()) * horizon;
    if (uncertainty->sigma.size() != m) {
      throw ValidationError("uncertainty: sigma must have farms x horizon entries");
    }
    if (uncertainty->corr.size() != m) {
      throw ValidationError("uncertainty: corr must be (farms x horizon)^2");
    }
    for (const auto& row : uncertainty->corr) {
      if (row.size() != m) {
        throw ValidationError("uncertainty: corr must be square");
      }
    }
  }
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& detail) {
  throw ParseError(origin, detail);
}

const json& need(const json& j, const char* key, const std::string& origin) {
  auto it = j.find(key);
  if (it == j.end()) fail(origin, std::string("missing key '") + key + "'");
  return *it;
}

double num(const json& j, const char* key, const std::string& origin) {
  const json& v = need(j, key, origin);
  if (!v.is_number()) fail(origin, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& j, const char* key, const std::string& origin) {
  const json& v = need(j, key, origin);
  if (!v.is_number_integer()) {
    fail(origin, std::string("'") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::vector<double> per_hour(const json& v, int horizon,
                             const std::string& origin, const char* key) {
  std::vector<double> out;
  if (v.is_number()) {
    out.assign(horizon, v.get<double>());
  } else if (v.is_array()) {
    if (static_cast<int>(v.size()) != horizon) {
      fail(origin, std::string("'") + key + "' array must have horizon entries");
    }
    for (const auto& e : v) out.push_back(e.get<double>());
  } else {
    fail(origin, std::string("'") + key + "' must be a number or an array");
  }
  return out;
}

}  // namespace

SystemCase case_from_json_text(const std::string& text,
                               const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin, e.what());
  }

  SystemCase c;
  try {
    c.buses = integer(j, "buses", origin);
    c.slack_bus = integer(j, "slack_bus", origin);
    c.horizon = integer(j, "horizon", origin);

    for (const auto& lj : need(j, "lines", origin)) {
      Line l;
      l.id = need(lj, "id", origin).get<std::string>();
      l.from_bus = integer(lj, "from", origin);
      l.to_bus = integer(lj, "to", origin);
      l.reactance = num(lj, "x", origin);
      l.limit = num(lj, "limit", origin);
      c.lines.push_back(std::move(l));
    }
    for (const auto& uj : need(j, "units", origin)) {
      ThermalUnit u;
      u.id = need(uj, "id", origin).get<std::string>();
      u.bus = integer(uj, "bus", origin);
      u.p_min = num(uj, "p_min", origin);
      u.p_max = num(uj, "p_max", origin);
      u.ramp_up = num(uj, "ramp_up", origin);
      u.ramp_down = num(uj, "ramp_down", origin);
      u.startup_cost = num(uj, "startup_cost", origin);
      u.energy_cost = num(uj, "energy_cost", origin);
      u.min_run_cost = num(uj, "min_run_cost", origin);
      u.min_on = integer(uj, "min_on", origin);
      u.min_off = integer(uj, "min_off", origin);
      u.initial_state = integer(uj, "initial_state", origin);
      if (uj.contains("initial_dispatch")) {
        u.initial_dispatch = num(uj, "initial_dispatch", origin);
      }
      c.units.push_back(std::move(u));
    }

    const json& loads = need(j, "loads", origin);
    if (!loads.is_array() || static_cast<int>(loads.size()) != c.buses) {
      fail(origin, "'loads' must be an array with one row per bus");
    }
    c.loads.resize(c.buses, c.horizon);
    for (int b = 0; b < c.buses; ++b) {
      const auto& row = loads[b];
      if (!row.is_array() || static_cast<int>(row.size()) != c.horizon) {
        fail(origin, "loads row " + std::to_string(b) +
                         " must have horizon entries");
      }
      for (int h = 0; h < c.horizon; ++h) c.loads(b, h) = row[h].get<double>();
    }

    for (const auto& wj : need(j, "wind", origin)) {
      WindFarm f;
      f.bus = integer(wj, "bus", origin);
      const json& fc = need(wj, "forecast", origin);
      if (!fc.is_array()) fail(origin, "'forecast' must be an array");
      for (const auto& e : fc) f.forecast.push_back(e.get<double>());
      c.wind.push_back(std::move(f));
    }

    c.reserve_up = per_hour(need(j, "reserve_up", origin), c.horizon, origin,
                            "reserve_up");
    c.reserve_down = per_hour(need(j, "reserve_down", origin), c.horizon,
                              origin, "reserve_down");

    if (j.contains("uncertainty")) {
      const json& uj = j["uncertainty"];
      UncertaintyBlock ub;
      for (const auto& e : need(uj, "sigma", origin)) {
        ub.sigma.push_back(e.get<double>());
      }
      for (const auto& row : need(uj, "corr", origin)) {
        ub.corr.emplace_back();
        for (const auto& e : row) ub.corr.back().push_back(e.get<double>());
      }
      c.uncertainty = std::move(ub);
    }
  } catch (const json::exception& e) {
    throw ParseError(origin, e.what());
  }

  c.validate();
  return c;
}

SystemCase load_case(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, "cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return case_from_json_text(ss.str(), path);
}

std::string case_to_json_text(const SystemCase& c) {
  json j;
  j["buses"] = c.buses;
  j["slack_bus"] = c.slack_bus;
  j["horizon"] = c.horizon;
  j["lines"] = json::array();
  for (const Line& l : c.lines) {
    j["lines"].push_back({{"id", l.id},
                          {"from", l.from_bus},
                          {"to", l.to_bus},
                          {"x", l.reactance},
                          {"limit", l.limit}});
  }
  j["units"] = json::array();
  for (const ThermalUnit& u : c.units) {
    json uj = {{"id", u.id},
               {"bus", u.bus},
               {"p_min", u.p_min},
               {"p_max", u.p_max},
               {"ramp_up", u.ramp_up},
               {"ramp_down", u.ramp_down},
               {"startup_cost", u.startup_cost},
               {"energy_cost", u.energy_cost},
               {"min_run_cost", u.min_run_cost},
               {"min_on", u.min_on},
               {"min_off", u.min_off},
               {"initial_state", u.initial_state}};
    if (u.initial_dispatch) uj["initial_dispatch"] = *u.initial_dispatch;
    j["units"].push_back(std::move(uj));
  }
  j["loads"] = json::array();
  for (int b = 0; b < c.buses; ++b) {
    json row = json::array();
    for (int h = 0; h < c.horizon; ++h) row.push_back(c.loads(b, h));
    j["loads"].push_back(std::move(row));
  }
  j["wind"] = json::array();
  for (const WindFarm& f : c.wind) {
    j["wind"].push_back({{"bus", f.bus}, {"forecast", f.forecast}});
  }
  j["reserve_up"] = c.reserve_up;
  j["reserve_down"] = c.reserve_down;
  if (c.uncertainty) {
    j["uncertainty"] = {{"sigma", c.uncertainty->sigma},
                        {"corr", c.uncertainty->corr}};
  }
  return j.dump(2) + "\n";
}

void save_case(const SystemCase& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open case file for writing: " + path);
  f << case_to_json_text(c);
}

PtdfMatrix compute_ptdf(const SystemCase& c) {
  return compute_ptdf(c, c.slack_bus);
}

PtdfMatrix compute_ptdf(const SystemCase& c, int slack_bus) {
  const int nb = c.buses;
  const int nl = c.num_lines();
  if (slack_bus < 0 || slack_bus >= nb) {
    throw ValidationError("ptdf: slack bus out of range");
  }

  // B_bus = A' diag(1/x) A with A the line-bus incidence matrix
  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(nb, nb);
  for (const Line& l : c.lines) {
    const double b = 1.0 / l.reactance;
    bbus(l.from_bus, l.from_bus) += b;
    bbus(l.to_bus, l.to_bus) += b;
    bbus(l.from_bus, l.to_bus) -= b;
    bbus(l.to_bus, l.from_bus) -= b;
  }

  // drop the slack row/column, invert, pad the slack column with zeros
  std::vector<int> keep;
  keep.reserve(nb - 1);
  for (int b = 0; b < nb; ++b) {
    if (b != slack_bus) keep.push_back(b);
  }
  Eigen::MatrixXd reduced(nb - 1, nb - 1);
  for (int i = 0; i < nb - 1; ++i) {
    for (int j = 0; j < nb - 1; ++j) reduced(i, j) = bbus(keep[i], keep[j]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
  if (nb > 1 && !lu.isInvertible()) {
    throw NumericalError(
        "ptdf: reduced bus susceptance matrix is singular (disconnected "
        "network?)");
  }
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(nb - 1, nb - 1);
  if (nb > 1) inv = lu.inverse();

  // angles per unit injection, then line flows: h = diag(1/x) A theta
  PtdfMatrix out;
  out.slack_bus = slack_bus;
  out.h = Eigen::MatrixXd::Zero(nl, nb);
  for (int k = 0; k < nl; ++k) {
    const Line& l = c.lines[k];
    const double b = 1.0 / l.reactance;
    for (int j = 0; j < nb - 1; ++j) {
      double theta_from = 0, theta_to = 0;
      // column keep[j] of the padded inverse
      auto row_of = [&](int bus) -> double {
        if (bus == slack_bus) return 0.0;
        const int r = bus < slack_bus ? bus : bus - 1;
        return inv(r, j);
      };
      theta_from = row_of(l.from_bus);
      theta_to = row_of(l.to_bus);
      out.h(k, keep[j]) = b * (theta_from - theta_to);
    }
  }

  // sanity of the DC model: a unit transfer across line k moves between
  // 0 and 100% of itself through that line
  for (int k = 0; k < nl; ++k) {
    const double self =
        out.h(k, c.lines[k].from_bus) - out.h(k, c.lines[k].to_bus);
    if (!(self > 0.0 && self <= 1.0 + 1e-9)) {
      throw NumericalError("ptdf: self sensitivity of line '" +
                           c.lines[k].id + "' outside (0, 1]: " +
                           std::to_string(self));
    }
  }
  return out;
}

}  // namespace windcap
