// windcap: estimates the guaranteed probability that a committed power
// system can fully absorb its uncertain wind generation.
//
//   windcap uc       <case> -o out/   day-ahead commitment
//   windcap estimate <case> -o out/   commitment + probability search
//   windcap validate <case> -o out/   Monte Carlo check of the bound
//   windcap coverage <case> -o out/   box-coverage experiment
//   windcap sample   <case> -o out/   scenario dump
//   windcap fullrun  <case> -o out/   uc + estimate + validate
//
// Exit codes: 0 success, 1 usage or input error, 2 model infeasible,
// 3 non-conclusive solve (node limit hit mid-search).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "windcap/admissibility.hpp"
#include "windcap/commitment.hpp"
#include "windcap/errors.hpp"
#include "windcap/estimator.hpp"
#include "windcap/model.hpp"
#include "windcap/uncertainty.hpp"

using namespace windcap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNonConclusive = 3;

struct Options {
  std::string case_path;
  std::string out = ".";
  std::string solver;
  std::string dump_model;
  std::uint64_t seed = 1;
  int workers = 1;
  double alpha = -1.0;
  double alpha_lo = 0.0;
  double alpha_hi = 1.0;
  double eps_alpha = 5e-4;
  double eps_f = -1.0;  // negative = scale to system load
  long samples = 500;
  int reps = 100;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("case", o.case_path, "case file (JSON)")->required();
  cmd->add_option("-o,--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--solver", o.solver,
                  "solver backend (default: $WINDCAP_SOLVER or embedded)");
  cmd->add_option("--dump-model", o.dump_model,
                  "write the commitment model in LP-format-style text");
  cmd->add_option("--workers", o.workers, "validation worker threads");
}

optkit::SolveOptions solve_options(const Options& o) {
  optkit::SolveOptions so;
  if (!o.solver.empty()) {
    so.backend = o.solver;
  } else if (const char* env = std::getenv("WINDCAP_SOLVER")) {
    so.backend = env;
  }
  return so;
}

double resolved_eps_f(const Options& o, const SystemCase& c) {
  return o.eps_f >= 0 ? o.eps_f : default_eps_f(c);
}

void ensure_out(const Options& o) {
  std::filesystem::create_directories(o.out);
}

std::string out_path(const Options& o, const std::string& name) {
  return (std::filesystem::path(o.out) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

// ---- subcommands ----

CommitmentSchedule run_uc_stage(const Options& o, const SystemCase& c) {
  optkit::SolveOptions so = solve_options(o);
  if (!o.dump_model.empty()) {
    const PtdfMatrix ptdf = compute_ptdf(c);
    build_uc(c, ptdf).dump_to_file(o.dump_model);
  }
  CommitmentSchedule s = solve_uc(c, so);
  save_schedule(s, out_path(o, "schedule.json"));
  return s;
}

int cmd_uc(const Options& o) {
  SystemCase c = load_case(o.case_path);
  ensure_out(o);
  CommitmentSchedule s = run_uc_stage(o, c);
  std::printf("%s", schedule_table(c, s).c_str());
  std::printf("schedule written to %s\n", out_path(o, "schedule.json").c_str());
  return kExitOk;
}

int run_estimate_stage(const Options& o, const SystemCase& c,
                       const CommitmentSchedule& s, EstimateResult* result) {
  const UncertaintyModel um = uncertainty_model_for(c);
  const double eps_f = resolved_eps_f(o, c);
  EstimateResult r = bisect_alpha(c, s, um, o.eps_alpha, eps_f, o.alpha_lo,
                                  o.alpha_hi, solve_options(o));
  write_text(out_path(o, "estimate.json"), estimate_to_json_text(r, um));
  write_trace_csv(out_path(o, "trace.csv"), r.trace);
  if (r.final_worst.w_worst.size() > 0) {
    const double last_alpha =
        r.trace.empty() ? o.alpha_lo : r.trace.back().alpha_mid;
    write_worst_case_csv(out_path(o, "worst_case.csv"), um,
                         build_box(um, std::min(last_alpha, kAlphaCap)),
                         r.final_worst);
  }
  std::printf("alpha0 = %.2f%%  (%s, %zu iterations, %.2fs)\n",
              100.0 * r.alpha0, to_string(r.status), r.trace.size(),
              r.wall_time_s);
  if (result) *result = r;
  return r.status == EstimateStatus::NonConclusive ? kExitNonConclusive
                                                   : kExitOk;
}

int cmd_estimate(const Options& o) {
  SystemCase c = load_case(o.case_path);
  ensure_out(o);
  CommitmentSchedule s = run_uc_stage(o, c);
  return run_estimate_stage(o, c, s, nullptr);
}

int run_validate_stage(const Options& o, const SystemCase& c,
                       const CommitmentSchedule& s, double alpha) {
  if (o.samples < 1) {
    std::fprintf(stderr, "validate: --samples must be at least 1\n");
    return kExitUsage;
  }
  const UncertaintyModel um = uncertainty_model_for(c);
  const double eps_f = resolved_eps_f(o, c);
  ValidationReport rep = monte_carlo_validate(
      c, s, um, alpha, o.samples, o.seed, eps_f, o.workers, solve_options(o));
  nlohmann::json j;
  j["n"] = rep.n;
  j["seed"] = rep.seed;
  j["alpha"] = rep.alpha;
  j["eps_f"] = rep.eps_f;
  j["feasible_fraction"] = rep.feasible_fraction;
  j["coverage_fraction"] = rep.coverage_fraction;
  j["lower_bound_consistent"] = rep.lower_bound_consistent;
  write_text(out_path(o, "validation.json"), j.dump(2) + "\n");
  std::printf(
      "validated %ld scenarios: feasible %.2f%%, inside box(%.4f) %.2f%%%s\n",
      rep.n, 100 * rep.feasible_fraction, rep.alpha,
      100 * rep.coverage_fraction,
      rep.lower_bound_consistent ? "" : "  [INCONSISTENT]");
  return kExitOk;
}

int cmd_validate(const Options& o) {
  SystemCase c = load_case(o.case_path);
  ensure_out(o);
  const std::string spath = out_path(o, "schedule.json");
  if (!std::filesystem::exists(spath)) {
    std::fprintf(stderr,
                 "validate: no schedule at %s (run `windcap uc` first)\n",
                 spath.c_str());
    return kExitUsage;
  }
  CommitmentSchedule s = load_schedule(spath);
  double alpha = o.alpha;
  if (alpha < 0) {
    const std::string epath = out_path(o, "estimate.json");
    if (!std::filesystem::exists(epath)) {
      std::fprintf(stderr,
                   "validate: pass --alpha or run `windcap estimate` first\n");
      return kExitUsage;
    }
    std::ifstream f(epath);
    nlohmann::json j;
    f >> j;
    alpha = j.at("alpha0").get<double>();
  }
  return run_validate_stage(o, c, s, alpha);
}

int cmd_coverage(const Options& o) {
  SystemCase c = load_case(o.case_path);
  ensure_out(o);
  if (o.samples < 1 || o.reps < 1) {
    std::fprintf(stderr, "coverage: --samples and --reps must be positive\n");
    return kExitUsage;
  }
  const double alpha = o.alpha < 0 ? 0.95 : o.alpha;
  const UncertaintyModel um = uncertainty_model_for(c);
  const BoxSet box = build_box(um, alpha);

  std::vector<double> fractions;
  fractions.reserve(o.reps);
  for (int rep = 0; rep < o.reps; ++rep) {
    const auto ws = sample_scenarios(um, static_cast<int>(o.samples),
                                     o.seed + static_cast<std::uint64_t>(rep));
    long in = 0;
    for (const auto& w : ws) in += contains(box, um, w) ? 1 : 0;
    fractions.push_back(static_cast<double>(in) / o.samples);
    if (rep == 0) {
      // scatter dump of the first repetition for plotting
      std::ofstream f(out_path(o, "coverage_scatter.csv"));
      for (int n = 0; n < um.m; ++n) f << um.labels[n] << ",";
      f << "inside\n";
      char buf[32];
      for (const auto& w : ws) {
        for (int n = 0; n < um.m; ++n) {
          std::snprintf(buf, sizeof buf, "%.10g,", w(n));
          f << buf;
        }
        f << (contains(box, um, w) ? 1 : 0) << "\n";
      }
    }
  }
  double mean = 0;
  for (double v : fractions) mean += v;
  mean /= fractions.size();
  double var = 0;
  for (double v : fractions) var += (v - mean) * (v - mean);
  var = fractions.size() > 1 ? var / (fractions.size() - 1) : 0.0;

  nlohmann::json j;
  j["alpha"] = alpha;
  j["samples"] = o.samples;
  j["reps"] = o.reps;
  j["seed"] = o.seed;
  j["mean"] = mean;
  j["std"] = std::sqrt(var);
  j["fractions"] = fractions;
  write_text(out_path(o, "coverage.json"), j.dump(2) + "\n");
  std::printf("coverage of box(%.4f): mean %.4f, std %.4f over %d x %ld\n",
              alpha, mean, std::sqrt(var), o.reps, o.samples);
  return kExitOk;
}

int cmd_sample(const Options& o) {
  SystemCase c = load_case(o.case_path);
  ensure_out(o);
  if (o.samples < 1) {
    std::fprintf(stderr, "sample: --samples must be at least 1\n");
    return kExitUsage;
  }
  const UncertaintyModel um = uncertainty_model_for(c);
  const auto ws = sample_scenarios(um, static_cast<int>(o.samples), o.seed);
  write_scenario_csv(out_path(o, "scenarios.csv"), um, ws);
  std::printf("wrote %ld scenarios to %s\n", o.samples,
              out_path(o, "scenarios.csv").c_str());
  return kExitOk;
}

int cmd_fullrun(const Options& o) {
  SystemCase c = load_case(o.case_path);
  ensure_out(o);
  CommitmentSchedule s = run_uc_stage(o, c);
  std::printf("%s", schedule_table(c, s).c_str());
  EstimateResult r;
  const int est = run_estimate_stage(o, c, s, &r);
  if (est != kExitOk) return est;
  return run_validate_stage(o, c, s, r.alpha0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wind accommodation probability estimator"};
  app.require_subcommand(1);

  Options o;
  CLI::App* uc = app.add_subcommand("uc", "solve the day-ahead commitment");
  CLI::App* est = app.add_subcommand(
      "estimate", "commitment plus the probability-bound search");
  CLI::App* val = app.add_subcommand(
      "validate", "Monte Carlo check of a previously computed bound");
  CLI::App* cov = app.add_subcommand(
      "coverage", "empirical coverage of the uncertainty box");
  CLI::App* smp = app.add_subcommand("sample", "dump wind scenarios");
  CLI::App* full = app.add_subcommand("fullrun",
                                      "uc + estimate + validate in one go");
  for (CLI::App* cmd : {uc, est, val, cov, smp, full}) add_common(cmd, o);
  for (CLI::App* cmd : {est, full}) {
    cmd->add_option("--alpha-lo", o.alpha_lo, "search interval start");
    cmd->add_option("--alpha-hi", o.alpha_hi, "search interval end");
    cmd->add_option("--eps-alpha", o.eps_alpha, "interval tolerance");
    cmd->add_option("--eps-f", o.eps_f,
                    "violation tolerance (default: 1e-6 x total load)");
  }
  for (CLI::App* cmd : {val, cov}) {
    cmd->add_option("--alpha", o.alpha, "probability level");
    cmd->add_option("--eps-f", o.eps_f,
                    "violation tolerance (default: 1e-6 x total load)");
  }
  for (CLI::App* cmd : {val, cov, smp, full}) {
    cmd->add_option("--samples", o.samples, "scenarios per repetition");
  }
  cov->add_option("--reps", o.reps, "repetitions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (uc->parsed()) return cmd_uc(o);
    if (est->parsed()) return cmd_estimate(o);
    if (val->parsed()) return cmd_validate(o);
    if (cov->parsed()) return cmd_coverage(o);
    if (smp->parsed()) return cmd_sample(o);
    if (full->parsed()) return cmd_fullrun(o);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
