// Generates the bundled case files. Deterministic; run from the repo
// root to refresh data/*.json after changing a profile or a parameter.
//
//   casegen [--out data] [--wind-peak 400]

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "windcap/model.hpp"

using namespace windcap;

namespace {

SystemCase make_case3() {
  SystemCase c;
  c.buses = 3;
  c.slack_bus = 2;
  c.horizon = 4;
  c.lines = {
      {"L1", 0, 1, 0.10, 100.0},
      {"L2", 1, 2, 0.10, 100.0},
      {"L3", 0, 2, 0.20, 80.0},
  };
  ThermalUnit u1;
  u1.id = "U1"; u1.bus = 0;
  u1.p_min = 20; u1.p_max = 120;
  u1.ramp_down = 60; u1.ramp_up = 60;
  u1.startup_cost = 50; u1.energy_cost = 20; u1.min_run_cost = 10;
  u1.min_on = 2; u1.min_off = 2;
  u1.initial_state = 3;
  u1.initial_dispatch = 40;
  ThermalUnit u2;
  u2.id = "U2"; u2.bus = 1;
  u2.p_min = 10; u2.p_max = 60;
  u2.ramp_down = 40; u2.ramp_up = 40;
  u2.startup_cost = 20; u2.energy_cost = 35; u2.min_run_cost = 5;
  u2.min_on = 1; u2.min_off = 1;
  u2.initial_state = -1;
  c.units = {u1, u2};

  const double total[4] = {100, 120, 140, 110};
  const double share[3] = {0.40, 0.35, 0.25};
  c.loads.resize(3, 4);
  for (int b = 0; b < 3; ++b) {
    for (int h = 0; h < 4; ++h) c.loads(b, h) = share[b] * total[h];
  }
  c.wind = {{2, {20, 30, 35, 25}}};
  c.reserve_up.assign(4, 0.05);
  c.reserve_down.assign(4, 0.05);
  return c;
}

SystemCase make_case39(double wind_peak) {
  SystemCase c;
  c.buses = 39;
  c.slack_bus = 38;  // bus 39 in 1-based terms
  c.horizon = 24;

  // New England 39-bus branch topology and reactances (per unit);
  // buses below are 1-based and shifted on input.
  struct B { int f, t; double x; };
  const std::vector<B> branches = {
      {1, 2, 0.0411},  {1, 39, 0.0250}, {2, 3, 0.0151},  {2, 25, 0.0086},
      {2, 30, 0.0181}, {3, 4, 0.0213},  {3, 18, 0.0133}, {4, 5, 0.0128},
      {4, 14, 0.0129}, {5, 6, 0.0026},  {5, 8, 0.0112},  {6, 7, 0.0092},
      {6, 11, 0.0082}, {6, 31, 0.0250}, {7, 8, 0.0046},  {8, 9, 0.0363},
      {9, 39, 0.0250}, {10, 11, 0.0043}, {10, 13, 0.0043}, {10, 32, 0.0200},
      {12, 11, 0.0435}, {12, 13, 0.0435}, {13, 14, 0.0101}, {14, 15, 0.0217},
      {15, 16, 0.0094}, {16, 17, 0.0089}, {16, 19, 0.0195}, {16, 21, 0.0135},
      {16, 24, 0.0059}, {17, 18, 0.0082}, {17, 27, 0.0173}, {19, 20, 0.0138},
      {19, 33, 0.0142}, {20, 34, 0.0180}, {21, 22, 0.0140}, {22, 23, 0.0096},
      {22, 35, 0.0143}, {23, 24, 0.0350}, {23, 36, 0.0272}, {25, 26, 0.0323},
      {25, 37, 0.0232}, {26, 27, 0.0147}, {26, 28, 0.0474}, {26, 29, 0.0625},
      {28, 29, 0.0151}, {29, 38, 0.0156},
  };
  char id[16];
  for (size_t k = 0; k < branches.size(); ++k) {
    std::snprintf(id, sizeof id, "L%02zu", k + 1);
    // generous thermal limits: the fleet is small relative to the grid
    double limit = 700.0;
    if (branches[k].t >= 30 || branches[k].f >= 30) limit = 620.0;  // gen leads
    c.lines.push_back(
        {id, branches[k].f - 1, branches[k].t - 1, branches[k].x, limit});
  }

  // ten-unit fleet: location, initial state, generation and ramp bounds,
  // startup cost, minimum on/off times, energy and minimum-run costs
  struct U {
    int bus, ini;
    double pmin, pmax, rdn, rup, startup;
    int ton, toff;
    double energy, minrun;
  };
  const std::vector<U> fleet = {
      {30, 8, 150, 455, 70, 70, 6750, 8, 8, 16.19, 1000},
      {31, 8, 150, 455, 60, 60, 7500, 8, 8, 17.26, 970},
      {32, -5, 20, 130, 70, 70, 825, 5, 5, 16.60, 700},
      {33, -5, 20, 130, 70, 70, 840, 5, 5, 16.50, 680},
      {34, -6, 25, 162, 60, 60, 1350, 6, 6, 19.70, 450},
      {35, -3, 20, 80, 70, 70, 255, 3, 3, 22.26, 370},
      {36, -3, 25, 85, 70, 70, 390, 3, 3, 27.74, 480},
      {37, -1, 10, 55, 60, 60, 45, 1, 1, 25.92, 660},
      {38, -1, 10, 55, 60, 60, 45, 1, 1, 27.27, 665},
      {39, -1, 10, 55, 60, 60, 45, 1, 1, 27.79, 670},
  };
  for (size_t i = 0; i < fleet.size(); ++i) {
    const U& g = fleet[i];
    ThermalUnit u;
    std::snprintf(id, sizeof id, "G%02zu", i + 1);
    u.id = id;
    u.bus = g.bus - 1;
    u.p_min = g.pmin; u.p_max = g.pmax;
    u.ramp_down = g.rdn; u.ramp_up = g.rup;
    u.startup_cost = g.startup;
    u.energy_cost = g.energy; u.min_run_cost = g.minrun;
    u.min_on = g.ton; u.min_off = g.toff;
    u.initial_state = g.ini;
    c.units.push_back(std::move(u));
  }

  // hourly system load (MW) and wind shape, both read off the published
  // day profile only approximately
  const double total[24] = {700,  750,  850,  950,  1000, 1100, 1150, 1200,
                            1300, 1400, 1450, 1500, 1400, 1300, 1200, 1050,
                            1000, 1100, 1200, 1400, 1300, 1100, 900,  800};
  const double wind_shape[24] = {0.78, 0.80, 0.83, 0.86, 0.90, 0.95, 1.00, 0.98,
                                 0.93, 0.88, 0.82, 0.77, 0.74, 0.72, 0.74, 0.78,
                                 0.85, 0.92, 0.97, 1.00, 0.96, 0.90, 0.85, 0.80};

  // bus weights from the standard 39-bus load pattern
  std::vector<double> weight(39, 0.0);
  const std::vector<std::pair<int, double>> pd = {
      {1, 97.6},  {3, 322.0}, {4, 500.0}, {7, 233.8}, {8, 522.0}, {9, 6.5},
      {12, 8.53}, {15, 320.0}, {16, 329.0}, {18, 158.0}, {20, 680.0},
      {21, 274.0}, {23, 247.5}, {24, 308.6}, {25, 224.0}, {26, 139.0},
      {27, 281.0}, {28, 206.0}, {29, 283.5}, {31, 9.2},  {39, 1104.0}};
  double wsum = 0;
  for (const auto& [bus, w] : pd) { weight[bus - 1] = w; wsum += w; }

  c.loads.resize(39, 24);
  for (int b = 0; b < 39; ++b) {
    for (int h = 0; h < 24; ++h) {
      c.loads(b, h) = total[h] * weight[b] / wsum;
    }
  }

  WindFarm farm;
  farm.bus = 9;  // bus 10
  for (int h = 0; h < 24; ++h) farm.forecast.push_back(wind_peak * wind_shape[h]);
  c.wind = {farm};

  c.reserve_up.assign(24, 0.05);
  c.reserve_down.assign(24, 0.05);

  // hour-0 dispatch of the two initially-on units: split the first-hour
  // net load so the hour-1 ramp rows have room
  const double net1 = total[0] - farm.forecast[0];
  c.units[0].initial_dispatch =
      std::min(455.0, std::max(150.0, net1 * 0.5));
  c.units[1].initial_dispatch =
      std::min(455.0, std::max(150.0, net1 * 0.5));
  return c;
}

SystemCase make_cov2() {
  SystemCase c;
  c.buses = 1;
  c.slack_bus = 0;
  c.horizon = 2;
  ThermalUnit u;
  u.id = "U1"; u.bus = 0;
  u.p_min = 0; u.p_max = 10;
  u.ramp_down = 10; u.ramp_up = 10;
  u.startup_cost = 0; u.energy_cost = 1; u.min_run_cost = 0;
  u.min_on = 1; u.min_off = 1;
  u.initial_state = 1;
  c.units = {u};
  c.loads.resize(1, 2);
  c.loads << 1.0, 1.0;
  c.wind = {{0, {1.0, 1.0}}};
  c.reserve_up.assign(2, 0.0);
  c.reserve_down.assign(2, 0.0);

  // hours 1 and 15 of the declining-accuracy day profile
  const double s1 = 0.05;
  const double s15 = 0.05 + 0.05 * 14.0 / 23.0;
  const double rho = 1.0 - 0.9 * 14.0 / 23.0;
  UncertaintyBlock ub;
  ub.sigma = {s1, s15};
  ub.corr = {{1.0, rho}, {rho, 1.0}};
  c.uncertainty = ub;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"windcap bundled case generator"};
  std::string out_dir = "data";
  double wind_peak = 400.0;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--wind-peak", wind_peak, "39-bus peak wind forecast (MW)");
  CLI11_PARSE(app, argc, argv);

  save_case(make_case3(), out_dir + "/case3.json");
  save_case(make_case39(wind_peak), out_dir + "/case39.json");
  save_case(make_cov2(), out_dir + "/cov2.json");
  std::printf("wrote case3.json, case39.json, cov2.json to %s/\n",
              out_dir.c_str());
  return 0;
}
