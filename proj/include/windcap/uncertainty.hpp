#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "windcap/model.hpp"

namespace windcap {

/// Covariance description of relative forecast errors: per-coordinate
/// standard deviations and a correlation matrix over the flattened
/// (farm, hour) coordinates.
struct CovarianceSpec {
  Eigen::VectorXd sigma;
  Eigen::MatrixXd corr;

  void validate() const;  // throws ValidationError / NumericalError
};

/// Wind uncertainty in absolute (MW) terms: forecast vector, covariance
/// and its symmetric PSD square root pair. Coordinates are the flattened
/// (farm, hour) pairs with strictly positive forecast.
struct UncertaintyModel {
  std::vector<std::pair<int, int>> coords;  // (farm, hour), farm-major
  std::vector<std::string> labels;          // "farm:hour"
  Eigen::VectorXd w_e;                      // MW, length m
  Eigen::MatrixXd lambda;                   // MW^2
  Eigen::MatrixXd lambda_sqrt;
  Eigen::MatrixXd lambda_sqrt_inv;
  int m = 0;

  /// Decorrelated coordinates of a wind vector: Lambda^{-1/2}(w - w_e).
  Eigen::VectorXd decorrelate(const Eigen::VectorXd& w) const;
};

/// Box over decorrelated coordinates that carries probability mass
/// alpha: |Lambda^{-1/2}(w - w_e)| <= u componentwise, with the equal
/// per-coordinate mass policy u_i = interval quantile of alpha^(1/m).
struct BoxSet {
  double alpha = 0;
  Eigen::VectorXd u;
  Eigen::VectorXd x_lo, x_hi;  // bounds on Lambda^{-1/2} w
};

/// Largest probability the box construction accepts; the interval
/// quantile diverges as the per-coordinate mass approaches 1.
inline constexpr double kAlphaCap = 0.9999;

/// Scales relative errors by the forecast level: Lambda =
/// diag(w_e) diag(sigma) corr diag(sigma) diag(w_e). All entries of w_e
/// must be positive. Throws NumericalError for non-PSD correlations
/// (eigenvalue below -1e-10, named in the message) and for
/// near-singular covariances.
UncertaintyModel build_covariance(const Eigen::VectorXd& sigma,
                                  const Eigen::MatrixXd& corr,
                                  const Eigen::VectorXd& w_e);

/// Half-width z >= 0 with Prob{-z <= N(0,1) <= z} = gamma.
/// Accurate to better than 1e-9 in probability; gamma must lie in [0,1).
double norm_interval_quantile(double gamma);

/// The case's covariance spec over a chosen coordinate subset: the
/// explicit uncertainty block when present, otherwise a default profile
/// whose accuracy declines over the horizon (sigma from 5% to 10%,
/// same-farm correlation decaying linearly from 1 to 0.1, independent
/// across farms).
CovarianceSpec covariance_spec_for(const SystemCase& c,
                                   const std::vector<std::pair<int, int>>& coords);

/// Builds the uncertainty model of a case over its positive-forecast
/// coordinates (zero-forecast hours carry no uncertainty and are
/// excluded from the uncertain space).
UncertaintyModel uncertainty_model_for(const SystemCase& c);

BoxSet build_box(const UncertaintyModel& model, double alpha);

/// Membership test in decorrelated coordinates, 1e-12 absolute slack.
bool contains(const BoxSet& box, const UncertaintyModel& model,
              const Eigen::VectorXd& w);

/// n multivariate-normal scenarios with mean w_e and covariance Lambda;
/// deterministic for a fixed seed.
std::vector<Eigen::VectorXd> sample_scenarios(const UncertaintyModel& model,
                                              int n, std::uint64_t seed);

/// One scenario drawn from the generator state seeded with `seed`;
/// sample_scenarios(model, n, s)[i] == sample_one(model, s + i) does NOT
/// hold (different streams); this is the per-index entry point used by
/// the Monte Carlo validator so results are worker-count independent.
Eigen::VectorXd sample_one(const UncertaintyModel& model, std::uint64_t seed);

/// Writes scenarios as CSV: header = coordinate labels, one row each.
void write_scenario_csv(const std::string& path, const UncertaintyModel& model,
                        const std::vector<Eigen::VectorXd>& scenarios);

}  // namespace windcap
