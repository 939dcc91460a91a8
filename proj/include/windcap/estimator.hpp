#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "windcap/admissibility.hpp"
#include "windcap/commitment.hpp"
#include "windcap/model.hpp"
#include "windcap/uncertainty.hpp"

namespace windcap {

enum class EstimateStatus {
  Converged,
  LowerBoundInfeasible,  // the worst case already fails at alpha_lo
  NonConclusive          // a dual solve hit its node limit mid-search
};

const char* to_string(EstimateStatus s);

struct TraceRow {
  int iteration = 0;
  double alpha_lo = 0, alpha_hi = 0, alpha_mid = 0;
  double f_w = 0;
  bool conclusive = true;
};

struct EstimateResult {
  double alpha0 = 0.0;
  EstimateStatus status = EstimateStatus::Converged;
  std::vector<TraceRow> trace;
  double preflight_fw = 0.0;  // worst case at alpha_lo
  double eps_alpha = 0.0, eps_f = 0.0;
  double wall_time_s = 0.0;
  bool monotonic = true;  // observed worst-case ordering across the trace
  WorstCaseResult final_worst;  // at the last evaluated midpoint
};

struct ValidationReport {
  long n = 0;
  double feasible_fraction = 0.0;  // direct checks passing eps_f
  double coverage_fraction = 0.0;  // samples inside the alpha0 box
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double eps_f = 0.0;
  /// feasible_fraction >= coverage_fraction - 4 binomial standard errors
  bool lower_bound_consistent = true;
};

/// Violation tolerance scaled to system size: 1e-6 times the total
/// horizon load (at least 1 MW equivalent).
double default_eps_f(const SystemCase& c);

struct FwEvaluation {
  double value = 0.0;
  bool conclusive = true;
};

/// Interval-halving search for the largest probability whose box is
/// fully absorbable, over an arbitrary monotone evaluator. Exposed for
/// testing against synthetic threshold functions.
EstimateResult bisect_generic(
    const std::function<FwEvaluation(double)>& evaluate, double alpha_lo,
    double alpha_hi, double eps_alpha, double eps_f);

/// The full search over the dual MILP pipeline. Evaluations at
/// midpoints only; alpha_hi may be 1 even though boxes are capped.
EstimateResult bisect_alpha(const SystemCase& c, const CommitmentSchedule& s,
                            const UncertaintyModel& um, double eps_alpha,
                            double eps_f, double alpha_lo, double alpha_hi,
                            const optkit::SolveOptions& options = {});

/// Samples n scenarios (per-index seeds: seed + i) and checks each
/// against the committed schedule with a direct feasibility solve.
/// Deterministic for fixed (n, seed) regardless of worker count.
ValidationReport monte_carlo_validate(const SystemCase& c,
                                      const CommitmentSchedule& s,
                                      const UncertaintyModel& um,
                                      double alpha0, long n,
                                      std::uint64_t seed, double eps_f,
                                      int workers = 1,
                                      const optkit::SolveOptions& options = {});

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& trace);
std::string estimate_to_json_text(const EstimateResult& r,
                                  const UncertaintyModel& um);

}  // namespace windcap
