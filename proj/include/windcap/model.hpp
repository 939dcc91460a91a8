#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace windcap {

/// Thermal generator. initial_state is signed: +k means the unit enters
/// the horizon having been ON for k hours, -k OFF for k hours (never 0).
struct ThermalUnit {
  std::string id;
  int bus = 0;
  double p_min = 0, p_max = 0;          // MW
  double ramp_down = 0, ramp_up = 0;    // MW/h
  double startup_cost = 0;              // $
  double energy_cost = 0;               // $/MWh
  double min_run_cost = 0;              // $ per committed hour
  int min_on = 1, min_off = 1;          // hours
  int initial_state = 1;                // signed hours, nonzero
  std::optional<double> initial_dispatch;  // MW at hour 0; default
                                           // p_min if on, 0 if off
  double dispatch_before_horizon() const {
    if (initial_dispatch) return *initial_dispatch;
    return initial_state > 0 ? p_min : 0.0;
  }
};

struct Line {
  std::string id;
  int from_bus = 0, to_bus = 0;
  double reactance = 0;  // per-unit, > 0
  double limit = 0;      // MW
};

struct WindFarm {
  int bus = 0;
  std::vector<double> forecast;  // MW per hour
};

/// Optional per-case covariance description of the relative wind
/// forecast errors, flattened farm-major over (farm, hour). When absent
/// a default declining-accuracy profile is generated (see uncertainty).
struct UncertaintyBlock {
  std::vector<double> sigma;               // relative std deviations
  std::vector<std::vector<double>> corr;   // correlation matrix
};

struct SystemCase {
  int buses = 0;
  int slack_bus = 0;
  int horizon = 0;
  std::vector<Line> lines;
  std::vector<ThermalUnit> units;
  Eigen::MatrixXd loads;                   // buses x horizon, MW
  std::vector<WindFarm> wind;
  std::vector<double> reserve_up, reserve_down;  // per-hour fractions
  std::optional<UncertaintyBlock> uncertainty;

  int num_units() const { return static_cast<int>(units.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }
  int num_farms() const { return static_cast<int>(wind.size()); }

  /// Total system load at hour h (0-based).
  double total_load(int h) const { return loads.col(h).sum(); }
  /// Total forecast wind at hour h.
  double total_wind_forecast(int h) const;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

/// Line-to-bus power transfer distribution factors under the DC model.
/// h(k, b) is the MW flow change on line k per MW injected at bus b and
/// withdrawn at the slack bus; the slack column is identically zero.
struct PtdfMatrix {
  Eigen::MatrixXd h;
  int slack_bus = 0;
};

/// Reads and validates a case file (JSON schema in the README). Throws
/// ParseError with field context or ValidationError.
SystemCase load_case(const std::string& path);
SystemCase case_from_json_text(const std::string& text,
                               const std::string& origin = "<string>");

/// Serializes a case back to the on-disk schema.
std::string case_to_json_text(const SystemCase& c);
void save_case(const SystemCase& c, const std::string& path);

/// DC power-flow sensitivities. Throws NumericalError when the network
/// is disconnected (singular reduced susceptance matrix).
PtdfMatrix compute_ptdf(const SystemCase& c);
PtdfMatrix compute_ptdf(const SystemCase& c, int slack_bus);

}  // namespace windcap
