#include "windcap/admissibility.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "windcap/errors.hpp"

namespace windcap {

using optkit::LinearModel;
using optkit::Relation;
using optkit::Term;

const char* to_string(CkRowLabel label) {
  switch (label) {
    case CkRowLabel::Capacity: return "capacity";
    case CkRowLabel::Ramp: return "ramp";
    case CkRowLabel::BalancePlus: return "balance+";
    case CkRowLabel::BalanceMinus: return "balance-";
    case CkRowLabel::Reserve: return "reserve";
    case CkRowLabel::Line: return "line";
  }
  return "?";
}

CkProblem build_ck(const SystemCase& c, const CkConstants& k,
                   const UncertaintyModel& um, const Eigen::VectorXd& w) {
  if (w.size() != um.m) {
    throw ValidationError("feasibility check: wind vector dimension mismatch");
  }
  const int N = c.num_units();
  const int H = c.horizon;
  const int K = c.num_lines();
  const PtdfMatrix ptdf = compute_ptdf(c);

  CkProblem ck;
  ck.units = N;
  ck.horizon = H;
  ck.lines = K;
  ck.m = um.m;

  LinearModel& mod = ck.model;
  char name[48];

  // dispatch: unconstrained here, every physical limit is a slacked row
  ck.p_offset = 0;
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "p:%s:%d", c.units[i].id.c_str(), h + 1);
      mod.add_var(-optkit::kInf, optkit::kInf, 0.0, name);
    }
  }
  auto pvar = [&](int i, int h) { return ck.p_offset + i * H + h; };

  // uncertain wind coordinates, fixed at the requested realization
  ck.w_offset = mod.num_vars();
  for (int n = 0; n < um.m; ++n) {
    mod.add_var(w(n), w(n), 0.0, "w:" + um.labels[n]);
  }

  ck.z_offset = mod.num_vars();
  auto add_slacked_row = [&](CkRowLabel label, std::vector<Term> terms,
                             double rhs, const char* slack_name) {
    const int z = mod.add_var(0.0, optkit::kInf, 1.0, slack_name);
    terms.push_back({z, -1.0});
    mod.add_row(Relation::LessEqual, rhs, std::move(terms));
    ck.row_labels.push_back(label);
    ck.row_slack.push_back(z);
  };

  // committed generation limits
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "za-:%s:%d", c.units[i].id.c_str(), h + 1);
      add_slacked_row(CkRowLabel::Capacity, {{pvar(i, h), -1.0}}, -k.p_lo(i, h),
                      name);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h < H; ++h) {
      std::snprintf(name, sizeof name, "za+:%s:%d", c.units[i].id.c_str(), h + 1);
      add_slacked_row(CkRowLabel::Capacity, {{pvar(i, h), 1.0}}, k.p_hi(i, h),
                      name);
    }
  }

  // ramping across consecutive hours under the committed pattern
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h + 1 < H; ++h) {
      std::snprintf(name, sizeof name, "zb+:%s:%d", c.units[i].id.c_str(), h + 1);
      add_slacked_row(CkRowLabel::Ramp,
                      {{pvar(i, h + 1), 1.0}, {pvar(i, h), -1.0}}, k.dp_hi(i, h),
                      name);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int h = 0; h + 1 < H; ++h) {
      std::snprintf(name, sizeof name, "zb-:%s:%d", c.units[i].id.c_str(), h + 1);
      add_slacked_row(CkRowLabel::Ramp,
                      {{pvar(i, h), 1.0}, {pvar(i, h + 1), -1.0}}, k.dp_lo(i, h),
                      name);
    }
  }

  // power balance, split into surplus (+) and deficit (-) halves so each
  // half keeps exactly one signed slack
  for (int h = 0; h < H; ++h) {
    std::vector<Term> surplus, deficit;
    for (int i = 0; i < N; ++i) {
      surplus.push_back({pvar(i, h), 1.0});
      deficit.push_back({pvar(i, h), -1.0});
    }
    for (int n = 0; n < um.m; ++n) {
      if (um.coords[n].second == h) {
        surplus.push_back({ck.w_offset + n, 1.0});
        deficit.push_back({ck.w_offset + n, -1.0});
      }
    }
    const double d = c.total_load(h);
    std::snprintf(name, sizeof name, "zc-:%d", h + 1);
    add_slacked_row(CkRowLabel::BalancePlus, std::move(surplus), d, name);
    std::snprintf(name, sizeof name, "zc+:%d", h + 1);
    add_slacked_row(CkRowLabel::BalanceMinus, std::move(deficit), -d, name);
  }

  // committed-band rows implied by the reserve requirements
  for (int h = 0; h < H; ++h) {
    std::vector<Term> floor_terms, cap_terms;
    for (int i = 0; i < N; ++i) {
      floor_terms.push_back({pvar(i, h), -1.0});
      cap_terms.push_back({pvar(i, h), 1.0});
    }
    std::snprintf(name, sizeof name, "zd-:%d", h + 1);
    add_slacked_row(CkRowLabel::Reserve, std::move(floor_terms), -k.r_lo(h),
                    name);
    std::snprintf(name, sizeof name, "zd+:%d", h + 1);
    add_slacked_row(CkRowLabel::Reserve, std::move(cap_terms), k.r_hi(h), name);
  }

  // line limits; wind enters through its connection bus sensitivity
  for (int kk = 0; kk < K; ++kk) {
    for (int h = 0; h < H; ++h) {
      double load_part = 0.0;
      for (int b = 0; b < c.buses; ++b) {
        load_part += ptdf.h(kk, b) * c.loads(b, h);
      }
      std::vector<Term> flow;
      for (int i = 0; i < N; ++i) {
        const double coef = ptdf.h(kk, c.units[i].bus);
        if (std::fabs(coef) > 1e-9) flow.push_back({pvar(i, h), coef});
      }
      for (int n = 0; n < um.m; ++n) {
        if (um.coords[n].second != h) continue;
        const double coef = ptdf.h(kk, c.wind[um.coords[n].first].bus);
        if (std::fabs(coef) > 1e-9) flow.push_back({ck.w_offset + n, coef});
      }
      // fixed zero-forecast coordinates contribute nothing
      std::vector<Term> neg = flow;
      for (Term& t : neg) t.coef = -t.coef;
      std::snprintf(name, sizeof name, "ze+:%s:%d", c.lines[kk].id.c_str(), h + 1);
      add_slacked_row(CkRowLabel::Line, std::move(flow),
                      c.lines[kk].limit + load_part, name);
      std::snprintf(name, sizeof name, "ze-:%s:%d", c.lines[kk].id.c_str(), h + 1);
      add_slacked_row(CkRowLabel::Line, std::move(neg),
                      c.lines[kk].limit - load_part, name);
    }
  }

  return ck;
}

CkReport evaluate_ck(const SystemCase& c, const CkConstants& k,
                     const UncertaintyModel& um, const Eigen::VectorXd& w,
                     const optkit::SolveOptions& options) {
  CkProblem ck = build_ck(c, k, um, w);
  const optkit::SolveOutcome out = optkit::solve_lp(ck.model, options);
  if (out.status != optkit::SolveStatus::Optimal) {
    throw Error(std::string("feasibility check did not solve to optimality: ") +
                optkit::to_string(out.status));
  }
  CkReport rep;
  rep.value = std::max(0.0, out.objective);
  for (int r = 0; r < ck.num_rows(); ++r) {
    const double z = out.primal[ck.row_slack[r]];
    if (z > 0) rep.slack_breakdown[to_string(ck.row_labels[r])] += z;
  }
  if (rep.value <= options.feas_tol * 10) {
    rep.dispatch.resize(ck.units, ck.horizon);
    for (int i = 0; i < ck.units; ++i) {
      for (int h = 0; h < ck.horizon; ++h) {
        rep.dispatch(i, h) = out.primal[ck.p_offset + i * ck.horizon + h];
      }
    }
  }
  return rep;
}

double StandardFormCK::residual(int row, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& w,
                                const Eigen::VectorXd& z) const {
  double a = -m_vec(row);
  for (const auto& [j, coef] : m_rows[row]) a += coef * p(j);
  for (const auto& [j, coef] : t_rows[row]) a += coef * w(j);
  a -= z(q_slack[row]);
  return a;
}

Eigen::VectorXd StandardFormCK::t_times(const Eigen::VectorXd& w) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_rows);
  for (int r = 0; r < num_rows; ++r) {
    for (const auto& [j, coef] : t_rows[r]) out(r) += coef * w(j);
  }
  return out;
}

StandardFormCK assemble_standard_form(const CkProblem& ck) {
  StandardFormCK sf;
  sf.num_rows = ck.num_rows();
  sf.num_p = ck.units * ck.horizon;
  sf.m = ck.m;
  sf.m_rows.resize(sf.num_rows);
  sf.t_rows.resize(sf.num_rows);
  sf.q_slack.resize(sf.num_rows);
  sf.m_vec.resize(sf.num_rows);
  sf.row_labels = ck.row_labels;

  const LinearModel& mod = ck.model;
  if (mod.num_rows() != sf.num_rows) {
    throw Error("standard form: row bookkeeping out of sync");
  }
  for (int r = 0; r < sf.num_rows; ++r) {
    const optkit::Row& row = mod.rows[r];
    if (row.rel != Relation::LessEqual) {
      throw Error("standard form: non-<= row");
    }
    sf.m_vec(r) = row.rhs;
    int slack_seen = 0;
    for (const Term& t : row.terms) {
      if (t.var < ck.w_offset) {
        sf.m_rows[r].emplace_back(t.var - ck.p_offset, t.coef);
      } else if (t.var < ck.z_offset) {
        sf.t_rows[r].emplace_back(t.var - ck.w_offset, t.coef);
      } else {
        if (t.coef != -1.0 || t.var != ck.row_slack[r]) {
          throw Error("standard form: row " + std::to_string(r) +
                      " must carry its own slack with coefficient -1");
        }
        ++slack_seen;
      }
    }
    if (slack_seen != 1) {
      throw Error("standard form: row " + std::to_string(r) +
                  " must have exactly one slack");
    }
    sf.q_slack[r] = ck.row_slack[r] - ck.z_offset;
    if (sf.q_slack[r] != r) {
      throw Error("standard form: slack order must follow row order");
    }
  }
  return sf;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> estimate_rho_bounds(
    const StandardFormCK& sf, const UncertaintyModel& um) {
  // rho = Lambda^(1/2) T' delta with every multiplier in [0, 1]
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(um.m);
  Eigen::VectorXd hi = Eigen::VectorXd::Zero(um.m);
  for (int r = 0; r < sf.num_rows; ++r) {
    if (sf.t_rows[r].empty()) continue;
    Eigen::VectorXd t_col = Eigen::VectorXd::Zero(um.m);
    for (const auto& [n, coef] : sf.t_rows[r]) t_col(n) = coef;
    const Eigen::VectorXd a_col = um.lambda_sqrt * t_col;  // column r of A
    for (int n = 0; n < um.m; ++n) {
      if (a_col(n) > 0) hi(n) += a_col(n);
      else lo(n) += a_col(n);
    }
  }
  return {lo, hi};
}

LinearModel build_dual_lp(const StandardFormCK& sf, const Eigen::VectorXd& w) {
  if (w.size() != sf.m) throw ValidationError("dual: wind dimension mismatch");
  LinearModel m;
  m.sense = optkit::Sense::Maximize;
  const Eigen::VectorXd tw = sf.t_times(w);
  for (int r = 0; r < sf.num_rows; ++r) {
    m.add_var(0.0, 1.0, tw(r) - sf.m_vec(r), "delta:" + std::to_string(r));
  }
  std::vector<std::vector<Term>> cols(sf.num_p);
  for (int r = 0; r < sf.num_rows; ++r) {
    for (const auto& [j, coef] : sf.m_rows[r]) cols[j].push_back({r, coef});
  }
  for (int j = 0; j < sf.num_p; ++j) {
    m.add_row(Relation::Equal, 0.0, std::move(cols[j]),
              "stationarity:" + std::to_string(j));
  }
  return m;
}

DualMilp build_dual_milp(const StandardFormCK& sf, const UncertaintyModel& um,
                         const BoxSet& box) {
  DualMilp dm;
  dm.num_rows = sf.num_rows;
  dm.m = um.m;
  LinearModel& m = dm.model;
  m.sense = optkit::Sense::Maximize;

  const auto [rho_lo, rho_hi] = estimate_rho_bounds(sf, um);
  const Eigen::VectorXd width = box.x_hi - box.x_lo;

  // multipliers: the slack pattern of Q turns the dual-feasibility rows
  // on the slacks into the upper bound 1
  dm.delta_offset = 0;
  for (int r = 0; r < sf.num_rows; ++r) {
    m.add_var(0.0, 1.0, -sf.m_vec(r), "delta:" + std::to_string(r));
  }
  dm.rho_offset = m.num_vars();
  for (int n = 0; n < um.m; ++n) {
    m.add_var(rho_lo(n), rho_hi(n), box.x_lo(n), "rho:" + um.labels[n]);
  }
  dm.t_offset = m.num_vars();
  for (int n = 0; n < um.m; ++n) {
    const double t_lo = std::min(0.0, rho_lo(n) * width(n));
    const double t_hi = std::max(0.0, rho_hi(n) * width(n));
    m.add_var(t_lo, t_hi, 1.0, "t:" + um.labels[n]);
  }
  dm.tau_offset = m.num_vars();
  for (int n = 0; n < um.m; ++n) {
    const int tau = m.add_binary(0.0, "tau:" + um.labels[n]);
    if (width(n) <= 0.0) {
      // degenerate coordinate: pin the corner choice and its term
      m.hi[tau] = 0.0;
      m.lo[dm.t_offset + n] = m.hi[dm.t_offset + n] = 0.0;
    }
  }

  // stationarity over the dispatch block
  std::vector<std::vector<Term>> cols(sf.num_p);
  for (int r = 0; r < sf.num_rows; ++r) {
    for (const auto& [j, coef] : sf.m_rows[r]) cols[j].push_back({r, coef});
  }
  for (int j = 0; j < sf.num_p; ++j) {
    m.add_row(Relation::Equal, 0.0, std::move(cols[j]),
              "stationarity:" + std::to_string(j));
  }

  // defining rows rho = Lambda^(1/2) T' delta
  std::vector<std::vector<Term>> rho_rows(um.m);
  for (int r = 0; r < sf.num_rows; ++r) {
    if (sf.t_rows[r].empty()) continue;
    Eigen::VectorXd t_col = Eigen::VectorXd::Zero(um.m);
    for (const auto& [n, coef] : sf.t_rows[r]) t_col(n) = coef;
    const Eigen::VectorXd a_col = um.lambda_sqrt * t_col;
    for (int n = 0; n < um.m; ++n) {
      if (a_col(n) != 0.0) rho_rows[n].push_back({dm.delta_offset + r, a_col(n)});
    }
  }
  for (int n = 0; n < um.m; ++n) {
    rho_rows[n].push_back({dm.rho_offset + n, -1.0});
    m.add_row(Relation::Equal, 0.0, std::move(rho_rows[n]),
              "rho_def:" + um.labels[n]);
  }

  // linearized corner terms: t_n picks up rho_n * width_n only on the
  // high face (tau_n = 1)
  for (int n = 0; n < um.m; ++n) {
    m.add_row(Relation::LessEqual, 0.0,
              {{dm.t_offset + n, 1.0},
               {dm.tau_offset + n, -rho_hi(n) * width(n)}},
              "t_cap_hi:" + um.labels[n]);
    m.add_row(Relation::LessEqual, -rho_lo(n) * width(n),
              {{dm.t_offset + n, 1.0},
               {dm.rho_offset + n, -width(n)},
               {dm.tau_offset + n, -rho_lo(n) * width(n)}},
              "t_cap_lo:" + um.labels[n]);
  }

  return dm;
}

WorstCaseResult solve_fw(const SystemCase& c, const CkConstants& k,
                         const UncertaintyModel& um, double alpha,
                         const optkit::SolveOptions& options) {
  const CkProblem ck = build_ck(c, k, um, um.w_e);
  const StandardFormCK sf = assemble_standard_form(ck);
  const BoxSet box = build_box(um, alpha);
  const DualMilp dm = build_dual_milp(sf, um, box);

  const optkit::SolveOutcome out = optkit::solve_milp(dm.model, options);
  if (out.status != optkit::SolveStatus::Optimal &&
      out.status != optkit::SolveStatus::IterationLimit) {
    throw Error(std::string("worst-case dual solve failed: ") +
                optkit::to_string(out.status));
  }

  WorstCaseResult r;
  r.conclusive = out.status == optkit::SolveStatus::Optimal;
  r.gap = out.gap;
  if (out.primal.empty()) {
    if (!r.conclusive) return r;  // node limit before any incumbent
    throw Error("worst-case dual solve returned no point");
  }
  r.value = out.objective;
  r.tau.resize(um.m);
  r.t.resize(um.m);
  r.rho.resize(um.m);
  for (int n = 0; n < um.m; ++n) {
    r.tau(n) = out.primal[dm.tau_offset + n] > 0.5 ? 1.0 : 0.0;
    r.t(n) = out.primal[dm.t_offset + n];
    r.rho(n) = out.primal[dm.rho_offset + n];
  }
  r.delta.resize(sf.num_rows);
  for (int row = 0; row < sf.num_rows; ++row) {
    r.delta(row) = out.primal[dm.delta_offset + row];
  }

  // recover the corner in original coordinates
  const Eigen::VectorXd x =
      box.x_lo + r.tau.cwiseProduct(box.x_hi - box.x_lo);
  r.w_worst = um.lambda_sqrt * x;

  // mandatory cross-check through the primal path
  const CkReport check = evaluate_ck(c, k, um, r.w_worst, options);
  r.cross_check = check.value;
  if (r.conclusive) {
    const double scale = std::max({1.0, std::fabs(r.value), check.value});
    if (std::fabs(r.value - check.value) > 1e-5 * scale) {
      throw NumericalError(
          "worst-case value disagrees with the direct check at the "
          "recovered corner: dual " + std::to_string(r.value) + " vs primal " +
          std::to_string(check.value));
    }
  }
  return r;
}

void write_worst_case_csv(const std::string& path, const UncertaintyModel& um,
                          const BoxSet& box, const WorstCaseResult& r) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open worst-case file for writing: " + path);
  f << "coordinate,forecast_mw,worst_mw,side\n";
  char buf[96];
  for (int n = 0; n < um.m; ++n) {
    const char* side = box.x_hi(n) - box.x_lo(n) <= 0.0
                           ? "point"
                           : (r.tau(n) > 0.5 ? "hi" : "lo");
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%s\n", um.labels[n].c_str(),
                  um.w_e(n), r.w_worst(n), side);
    f << buf;
  }
}

std::string slack_breakdown_json(const CkReport& report) {
  nlohmann::json j;
  j["value"] = report.value;
  j["breakdown"] = nlohmann::json::object();
  for (const auto& [label, sum] : report.slack_breakdown) {
    j["breakdown"][label] = sum;
  }
  return j.dump(2) + "\n";
}

}  // namespace windcap
