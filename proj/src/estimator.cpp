#include "windcap/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "windcap/errors.hpp"

namespace windcap {

const char* to_string(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::Converged: return "converged";
    case EstimateStatus::LowerBoundInfeasible: return "lower-bound-infeasible";
    case EstimateStatus::NonConclusive: return "non-conclusive";
  }
  return "?";
}

double default_eps_f(const SystemCase& c) {
  return 1e-6 * std::max(1.0, c.loads.sum());
}

EstimateResult bisect_generic(
    const std::function<FwEvaluation(double)>& evaluate, double alpha_lo,
    double alpha_hi, double eps_alpha, double eps_f) {
  if (!(alpha_lo >= 0.0) || !(alpha_hi <= 1.0) || !(alpha_lo < alpha_hi)) {
    throw ValidationError("bisection: need 0 <= alpha_lo < alpha_hi <= 1");
  }
  if (!(eps_alpha > 0.0) || !(eps_f >= 0.0)) {
    throw ValidationError("bisection: tolerances must be positive");
  }

  const auto t0 = std::chrono::steady_clock::now();
  EstimateResult r;
  r.eps_alpha = eps_alpha;
  r.eps_f = eps_f;

  const FwEvaluation preflight = evaluate(alpha_lo);
  r.preflight_fw = preflight.value;
  if (!preflight.conclusive) {
    r.status = EstimateStatus::NonConclusive;
    r.alpha0 = alpha_lo;
    return r;
  }
  if (preflight.value > eps_f) {
    r.status = EstimateStatus::LowerBoundInfeasible;
    r.alpha0 = alpha_lo;
    return r;
  }

  double lo = alpha_lo, hi = alpha_hi;
  int iteration = 0;
  while (hi - lo > eps_alpha) {
    const double mid = 0.5 * (lo + hi);
    const FwEvaluation ev = evaluate(std::min(mid, kAlphaCap));
    ++iteration;
    r.trace.push_back({iteration, lo, hi, mid, ev.value, ev.conclusive});
    if (!ev.conclusive) {
      r.status = EstimateStatus::NonConclusive;
      r.alpha0 = 0.5 * (lo + hi);
      r.wall_time_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
      return r;
    }
    if (ev.value <= eps_f) lo = mid;
    else hi = mid;
  }
  r.alpha0 = 0.5 * (lo + hi);
  r.status = EstimateStatus::Converged;
  r.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  // flag any observed non-monotonicity (possible only through solver
  // gaps); sort evaluations by alpha and compare
  std::vector<TraceRow> by_alpha = r.trace;
  std::sort(by_alpha.begin(), by_alpha.end(),
            [](const TraceRow& a, const TraceRow& b) {
              return a.alpha_mid < b.alpha_mid;
            });
  for (size_t i = 1; i < by_alpha.size(); ++i) {
    if (by_alpha[i].f_w < by_alpha[i - 1].f_w - 1e-9) r.monotonic = false;
  }
  return r;
}

EstimateResult bisect_alpha(const SystemCase& c, const CommitmentSchedule& s,
                            const UncertaintyModel& um, double eps_alpha,
                            double eps_f, double alpha_lo, double alpha_hi,
                            const optkit::SolveOptions& options) {
  const CkConstants constants = derive_ck_constants(c, s);
  WorstCaseResult last;
  auto evaluate = [&](double alpha) {
    WorstCaseResult w = solve_fw(c, constants, um, alpha, options);
    last = w;
    return FwEvaluation{w.value, w.conclusive};
  };
  EstimateResult r =
      bisect_generic(evaluate, alpha_lo, alpha_hi, eps_alpha, eps_f);
  r.final_worst = last;
  return r;
}

ValidationReport monte_carlo_validate(const SystemCase& c,
                                      const CommitmentSchedule& s,
                                      const UncertaintyModel& um,
                                      double alpha0, long n,
                                      std::uint64_t seed, double eps_f,
                                      int workers,
                                      const optkit::SolveOptions& options) {
  if (n < 1) throw ValidationError("validation: need at least one sample");
  const CkConstants constants = derive_ck_constants(c, s);
  const BoxSet box = build_box(um, std::min(alpha0, kAlphaCap));

  // one shared check problem; each sample re-fixes the wind coordinates
  // and warm-starts from the forecast basis
  CkProblem base = build_ck(c, constants, um, um.w_e);
  optkit::BasisState forecast_basis;
  const bool embedded =
      options.backend.empty() || options.backend == "embedded";
  if (embedded) {
    optkit::simplex_solve(base.model, options, nullptr, nullptr, nullptr,
                          &forecast_basis);
  }

  std::vector<std::uint8_t> feasible(n, 0), covered(n, 0);
  auto run_range = [&](long begin, long end) {
    std::vector<double> lo = base.model.lo, hi = base.model.hi;
    for (long i = begin; i < end; ++i) {
      const Eigen::VectorXd w = sample_one(um, seed + static_cast<std::uint64_t>(i));
      covered[i] = contains(box, um, w) ? 1 : 0;
      double value;
      if (embedded) {
        for (int k = 0; k < um.m; ++k) {
          lo[base.w_offset + k] = w(k);
          hi[base.w_offset + k] = w(k);
        }
        const optkit::SolveOutcome out = optkit::simplex_solve(
            base.model, options, &lo, &hi, &forecast_basis, nullptr);
        if (out.status != optkit::SolveStatus::Optimal) {
          throw Error("validation: per-sample check failed to solve");
        }
        value = std::max(0.0, out.objective);
      } else {
        value = evaluate_ck(c, constants, um, w, options).value;
      }
      feasible[i] = value <= eps_f ? 1 : 0;
    }
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    run_range(0, n);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const long begin = t * chunk;
      const long end = std::min<long>(n, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  ValidationReport rep;
  rep.n = n;
  rep.seed = seed;
  rep.alpha = alpha0;
  rep.eps_f = eps_f;
  long nf = 0, nc = 0;
  for (long i = 0; i < n; ++i) {
    nf += feasible[i];
    nc += covered[i];
  }
  rep.feasible_fraction = static_cast<double>(nf) / n;
  rep.coverage_fraction = static_cast<double>(nc) / n;
  const double se = std::sqrt(std::max(rep.coverage_fraction *
                                           (1 - rep.coverage_fraction), 1e-12) /
                              n);
  rep.lower_bound_consistent =
      rep.feasible_fraction >= rep.coverage_fraction - 4 * se;
  return rep;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& trace) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open trace file for writing: " + path);
  f << "iter,alpha_lo,alpha_hi,alpha_mid,fw,conclusive\n";
  char buf[160];
  for (const TraceRow& row : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%d\n",
                  row.iteration, row.alpha_lo, row.alpha_hi, row.alpha_mid,
                  row.f_w, row.conclusive ? 1 : 0);
    f << buf;
  }
}

std::string estimate_to_json_text(const EstimateResult& r,
                                  const UncertaintyModel& um) {
  nlohmann::json j;
  j["alpha0"] = r.alpha0;
  j["status"] = to_string(r.status);
  j["eps_alpha"] = r.eps_alpha;
  j["eps_f"] = r.eps_f;
  j["preflight_fw"] = r.preflight_fw;
  j["wall_time_s"] = r.wall_time_s;
  j["monotonic"] = r.monotonic;
  j["iterations"] = r.trace.size();
  j["trace"] = nlohmann::json::array();
  for (const TraceRow& row : r.trace) {
    j["trace"].push_back({{"iter", row.iteration},
                          {"alpha_lo", row.alpha_lo},
                          {"alpha_hi", row.alpha_hi},
                          {"alpha_mid", row.alpha_mid},
                          {"fw", row.f_w},
                          {"conclusive", row.conclusive}});
  }
  if (r.final_worst.w_worst.size() > 0) {
    nlohmann::json wc;
    wc["value"] = r.final_worst.value;
    wc["cross_check"] = r.final_worst.cross_check;
    wc["labels"] = um.labels;
    wc["forecast"] = std::vector<double>(um.w_e.data(),
                                         um.w_e.data() + um.m);
    wc["w_worst"] = std::vector<double>(
        r.final_worst.w_worst.data(), r.final_worst.w_worst.data() + um.m);
    j["worst_case"] = std::move(wc);
  }
  return j.dump(2) + "\n";
}

}  // namespace windcap
