#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "windcap/errors.hpp"
#include "windcap/estimator.hpp"

using namespace windcap;

namespace {

std::function<FwEvaluation(double)> threshold_stub(double alpha0) {
  return [alpha0](double alpha) {
    return FwEvaluation{std::max(0.0, alpha - alpha0), true};
  };
}

}  // namespace

TEST_CASE("bisection: eleven iterations on the unit interval") {
  EstimateResult r = bisect_generic(threshold_stub(0.42), 0.0, 1.0, 5e-4, 0.0);
  CHECK(r.status == EstimateStatus::Converged);
  CHECK(r.trace.size() == 11);
  CHECK(r.trace.size() ==
        static_cast<size_t>(std::ceil(std::log2(1.0 / 5e-4))));
  CHECK(std::fabs(r.alpha0 - 0.42) <= 5e-4);
}

TEST_CASE("bisection: random synthetic thresholds bracket the truth") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int it = 0; it < 20; ++it) {
    const double truth = u(rng);
    EstimateResult r = bisect_generic(threshold_stub(truth), 0.0, 1.0, 5e-4, 0.0);
    CHECK(std::fabs(r.alpha0 - truth) <= 5e-4);
    // trace invariants: halving interval, monotone bounds
    for (size_t i = 0; i < r.trace.size(); ++i) {
      const TraceRow& row = r.trace[i];
      CHECK(row.alpha_mid ==
            doctest::Approx(0.5 * (row.alpha_lo + row.alpha_hi)));
      if (i > 0) {
        CHECK(row.alpha_lo >= r.trace[i - 1].alpha_lo - 1e-15);
        CHECK(row.alpha_hi <= r.trace[i - 1].alpha_hi + 1e-15);
        CHECK(row.alpha_hi - row.alpha_lo ==
              doctest::Approx(0.5 * (r.trace[i - 1].alpha_hi -
                                     r.trace[i - 1].alpha_lo)));
      }
    }
  }
}

TEST_CASE("bisection: pre-flight failure short-circuits") {
  auto always_bad = [](double) { return FwEvaluation{1.0, true}; };
  EstimateResult r = bisect_generic(always_bad, 0.0, 1.0, 5e-4, 1e-6);
  CHECK(r.status == EstimateStatus::LowerBoundInfeasible);
  CHECK(r.alpha0 == 0.0);
  CHECK(r.trace.empty());
  CHECK(r.preflight_fw == 1.0);
}

TEST_CASE("bisection: non-conclusive evaluation aborts with partial trace") {
  int calls = 0;
  auto flaky = [&calls](double alpha) {
    ++calls;
    return FwEvaluation{std::max(0.0, alpha - 0.4), calls < 4};
  };
  EstimateResult r = bisect_generic(flaky, 0.0, 1.0, 5e-4, 0.0);
  CHECK(r.status == EstimateStatus::NonConclusive);
  CHECK(r.trace.size() == 3);
  CHECK_FALSE(r.trace.back().conclusive);
}

TEST_CASE("bisection: narrow starting interval needs at most one cut") {
  EstimateResult r =
      bisect_generic(threshold_stub(0.2), 0.5, 0.5001, 5e-4, 0.0);
  CHECK(r.trace.size() <= 1);
}

TEST_CASE("bisection: argument validation") {
  CHECK_THROWS_AS(bisect_generic(threshold_stub(0.5), 0.5, 0.4, 1e-3, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(bisect_generic(threshold_stub(0.5), 0.0, 1.0, 0.0, 0.0),
                  ValidationError);
}

TEST_CASE("bisection: reproducible trace") {
  auto run = [] {
    return bisect_generic(threshold_stub(0.137), 0.0, 1.0, 5e-4, 0.0);
  };
  EstimateResult a = run(), b = run();
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].alpha_mid == b.trace[i].alpha_mid);
    CHECK(a.trace[i].f_w == b.trace[i].f_w);
  }
  CHECK(a.alpha0 == b.alpha0);
}

TEST_CASE("estimator: desk pipeline matches a grid-search oracle") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s = solve_uc(c);
  UncertaintyModel um = uncertainty_model_for(c);
  CkConstants k = derive_ck_constants(c, s);
  const double eps_f = default_eps_f(c);
  const double eps_alpha = 2e-3;

  EstimateResult r = bisect_alpha(c, s, um, eps_alpha, eps_f, 0.0, 1.0);
  REQUIRE(r.status == EstimateStatus::Converged);
  CHECK(r.monotonic);
  // rows record the interval before their update; replay the last one
  {
    const TraceRow& last = r.trace.back();
    const double flo = last.f_w <= eps_f ? last.alpha_mid : last.alpha_lo;
    const double fhi = last.f_w <= eps_f ? last.alpha_hi : last.alpha_mid;
    CHECK(r.alpha0 == doctest::Approx(0.5 * (flo + fhi)).epsilon(1e-12).scale(1));
  }

  // grid-search oracle over alpha with the exhaustive corner maximum
  double oracle_lo = 0.0;
  for (double alpha = 0.0; alpha <= 1.0 - 1e-9; alpha += eps_alpha / 2) {
    BoxSet box = build_box(um, std::min(alpha, kAlphaCap));
    auto [value, mask] = fixtures::corner_max(c, k, um, box);
    if (value <= eps_f) oracle_lo = alpha;
    else break;
  }
  CHECK(std::fabs(r.alpha0 - oracle_lo) <= 2 * eps_alpha);
}

TEST_CASE("estimator: degenerate covariance validates everything") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s = solve_uc(c);
  UncertaintyModel um = uncertainty_model_for(c);
  um.lambda.setZero();
  um.lambda_sqrt.setZero();  // every sample collapses onto the forecast
  ValidationReport rep =
      monte_carlo_validate(c, s, um, 0.5, 64, 7, default_eps_f(c));
  CHECK(rep.coverage_fraction == 1.0);
  CHECK(rep.feasible_fraction == 1.0);
  CHECK(rep.lower_bound_consistent);
}

TEST_CASE("estimator: monte carlo is worker-count independent") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s = solve_uc(c);
  UncertaintyModel um = uncertainty_model_for(c);
  const double eps_f = default_eps_f(c);
  ValidationReport one = monte_carlo_validate(c, s, um, 0.3, 80, 123, eps_f, 1);
  ValidationReport four = monte_carlo_validate(c, s, um, 0.3, 80, 123, eps_f, 4);
  CHECK(one.feasible_fraction == four.feasible_fraction);
  CHECK(one.coverage_fraction == four.coverage_fraction);
  CHECK(one.lower_bound_consistent);
}

TEST_CASE("estimator: lower-bound semantics inside the final box") {
  SystemCase c = fixtures::desk_case();
  CommitmentSchedule s = solve_uc(c);
  UncertaintyModel um = uncertainty_model_for(c);
  CkConstants k = derive_ck_constants(c, s);
  const double eps_f = default_eps_f(c);
  EstimateResult r = bisect_alpha(c, s, um, 5e-3, eps_f, 0.0, 1.0);
  REQUIRE(r.status == EstimateStatus::Converged);

  // every point inside the box at the certified level passes the check;
  // sample uniformly over the box in decorrelated coordinates
  const double certified = r.trace.empty() ? 0.0 : r.trace.back().alpha_lo;
  BoxSet box = build_box(um, certified);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd x(um.m);
    for (int n = 0; n < um.m; ++n) {
      x(n) = box.x_lo(n) + u01(rng) * (box.x_hi(n) - box.x_lo(n));
    }
    const Eigen::VectorXd w = um.lambda_sqrt * x;
    CHECK(contains(box, um, w));
    CHECK(evaluate_ck(c, k, um, w).value <= eps_f + 1e-6);
  }

  // Monte Carlo feasibility dominates coverage up to binomial noise
  ValidationReport rep =
      monte_carlo_validate(c, s, um, certified, 400, 555, eps_f);
  CHECK(rep.lower_bound_consistent);
  CHECK(rep.feasible_fraction >= rep.coverage_fraction - 4 * 0.025);
}

TEST_CASE("estimator: trace and json exports") {
  EstimateResult r = bisect_generic(threshold_stub(0.42), 0.0, 1.0, 0.01, 0.0);
  const std::string path = "/tmp/windcap_test_trace.csv";
  write_trace_csv(path, r.trace);
  std::ifstream f(path);
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  CHECK(header == "iter,alpha_lo,alpha_hi,alpha_mid,fw,conclusive");
  int rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  CHECK(rows == static_cast<int>(r.trace.size()));

  SystemCase c = fixtures::desk_case();
  UncertaintyModel um = uncertainty_model_for(c);
  const std::string js = estimate_to_json_text(r, um);
  CHECK(js.find("\"alpha0\"") != std::string::npos);
  CHECK(js.find("\"trace\"") != std::string::npos);
}
