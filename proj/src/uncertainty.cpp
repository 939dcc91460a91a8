#include "windcap/uncertainty.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

#include "windcap/errors.hpp"

namespace windcap {

namespace {

constexpr double kPsdTol = 1e-10;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Rational approximation of the standard normal quantile (Acklam's
// coefficients), refined below with Newton steps against erfc.
double normal_quantile_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p <= phigh) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  q = std::sqrt(-2 * std::log(1 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

double normal_quantile(double p) {
  double z = normal_quantile_approx(p);
  for (int it = 0; it < 2; ++it) {
    const double err = std_normal_cdf(z) - p;
    const double dens = std_normal_pdf(z);
    if (dens <= 0) break;
    z -= err / dens;
  }
  return z;
}

}  // namespace

double norm_interval_quantile(double gamma) {
  if (!(gamma >= 0.0) || gamma >= 1.0) {
    throw ValidationError(
        "interval quantile: probability must lie in [0, 1) (got " +
        std::to_string(gamma) + "); the half-width is unbounded at 1");
  }
  if (gamma == 0.0) return 0.0;
  return normal_quantile(0.5 * (1.0 + gamma));
}

void CovarianceSpec::validate() const {
  const auto m = sigma.size();
  if (m == 0) throw ValidationError("covariance: empty sigma");
  if (corr.rows() != m || corr.cols() != m) {
    throw ValidationError("covariance: corr must be m x m");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(sigma(i) > 0)) {
      throw ValidationError("covariance: sigma must be positive (coordinate " +
                            std::to_string(i) + ")");
    }
    if (std::fabs(corr(i, i) - 1.0) > 1e-12) {
      throw ValidationError("covariance: corr diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::fabs(corr(i, j) - corr(j, i)) > 1e-12) {
        throw ValidationError("covariance: corr must be symmetric");
      }
      if (corr(i, j) < -1.0 - 1e-12 || corr(i, j) > 1.0 + 1e-12) {
        throw ValidationError("covariance: corr entries must lie in [-1, 1]");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr,
                                                    Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol) {
    throw NumericalError(
        "covariance: correlation matrix is not positive semidefinite "
        "(eigenvalue " + std::to_string(min_eig) + ")");
  }
}

UncertaintyModel build_covariance(const Eigen::VectorXd& sigma,
                                  const Eigen::MatrixXd& corr,
                                  const Eigen::VectorXd& w_e) {
  CovarianceSpec spec{sigma, corr};
  spec.validate();
  const Eigen::Index m = sigma.size();
  if (w_e.size() != m) {
    throw ValidationError("covariance: w_e dimension mismatch");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(w_e(i) > 0)) {
      throw ValidationError(
          "covariance: forecasts on uncertain coordinates must be positive "
          "(coordinate " + std::to_string(i) + ")");
    }
  }

  UncertaintyModel model;
  model.m = static_cast<int>(m);
  model.w_e = w_e;
  const Eigen::VectorXd scale = w_e.cwiseProduct(sigma);
  model.lambda = scale.asDiagonal() * corr * scale.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.lambda);
  Eigen::VectorXd eig = es.eigenvalues();
  const double max_eig = eig.maxCoeff();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (eig(i) < -kPsdTol) {
      throw NumericalError("covariance: negative eigenvalue " +
                           std::to_string(eig(i)));
    }
    eig(i) = std::max(eig(i), 0.0);
  }
  const double min_eig = eig.minCoeff();
  if (!(min_eig > 1e-12 * std::max(max_eig, 1e-300))) {
    throw NumericalError(
        "covariance: near-singular (smallest eigenvalue " +
        std::to_string(min_eig) + " vs largest " + std::to_string(max_eig) +
        "); the decorrelating transform would not be invertible");
  }
  const Eigen::MatrixXd& v = es.eigenvectors();
  model.lambda_sqrt = v * eig.cwiseSqrt().asDiagonal() * v.transpose();
  model.lambda_sqrt_inv =
      v * eig.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  return model;
}

Eigen::VectorXd UncertaintyModel::decorrelate(const Eigen::VectorXd& w) const {
  if (w.size() != m) throw ValidationError("decorrelate: dimension mismatch");
  return lambda_sqrt_inv * (w - w_e);
}

CovarianceSpec covariance_spec_for(
    const SystemCase& c, const std::vector<std::pair<int, int>>& coords) {
  const int m = static_cast<int>(coords.size());
  CovarianceSpec spec;
  spec.sigma.resize(m);
  spec.corr.resize(m, m);
  if (c.uncertainty) {
    // stored over all farm-major (farm, hour) pairs; select the subset
    const auto& ub = *c.uncertainty;
    auto flat = [&](const std::pair<int, int>& fh) {
      return fh.first * c.horizon + fh.second;
    };
    for (int i = 0; i < m; ++i) {
      spec.sigma(i) = ub.sigma[flat(coords[i])];
      for (int j = 0; j < m; ++j) {
        spec.corr(i, j) = ub.corr[flat(coords[i])][flat(coords[j])];
      }
    }
    return spec;
  }
  // default: accuracy declines over the horizon, correlation decays with
  // hour distance within a farm, farms independent
  const double span = std::max(1, c.horizon - 1);
  for (int i = 0; i < m; ++i) {
    spec.sigma(i) = 0.05 + 0.05 * coords[i].second / span;
    for (int j = 0; j < m; ++j) {
      if (coords[i].first != coords[j].first) {
        spec.corr(i, j) = i == j ? 1.0 : 0.0;
      } else {
        const int lag = std::abs(coords[i].second - coords[j].second);
        spec.corr(i, j) = 1.0 - 0.9 * lag / span;
      }
    }
  }
  return spec;
}

UncertaintyModel uncertainty_model_for(const SystemCase& c) {
  std::vector<std::pair<int, int>> coords;
  for (int f = 0; f < c.num_farms(); ++f) {
    for (int h = 0; h < c.horizon; ++h) {
      if (c.wind[f].forecast[h] > 0) coords.emplace_back(f, h);
    }
  }
  if (coords.empty()) {
    throw ValidationError(
        "uncertainty: no positive wind forecast; the uncertain space is "
        "empty");
  }
  CovarianceSpec spec = covariance_spec_for(c, coords);
  Eigen::VectorXd w_e(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) {
    w_e(i) = c.wind[coords[i].first].forecast[coords[i].second];
  }
  UncertaintyModel model = build_covariance(spec.sigma, spec.corr, w_e);
  model.coords = coords;
  for (const auto& [f, h] : coords) {
    model.labels.push_back(std::to_string(f) + ":" + std::to_string(h));
  }
  return model;
}

BoxSet build_box(const UncertaintyModel& model, double alpha) {
  if (!(alpha >= 0.0) || alpha > kAlphaCap) {
    throw ValidationError("box: probability must lie in [0, " +
                          std::to_string(kAlphaCap) + "] (got " +
                          std::to_string(alpha) + ")");
  }
  BoxSet box;
  box.alpha = alpha;
  const double gamma = std::pow(alpha, 1.0 / model.m);
  const double z = norm_interval_quantile(gamma);
  box.u = Eigen::VectorXd::Constant(model.m, z);
  const Eigen::VectorXd center = model.lambda_sqrt_inv * model.w_e;
  box.x_lo = center - box.u;
  box.x_hi = center + box.u;
  return box;
}

bool contains(const BoxSet& box, const UncertaintyModel& model,
              const Eigen::VectorXd& w) {
  if (w.size() != model.m) throw ValidationError("contains: dimension mismatch");
  const Eigen::VectorXd x = model.lambda_sqrt_inv * w;
  for (int i = 0; i < model.m; ++i) {
    if (x(i) < box.x_lo(i) - 1e-12 || x(i) > box.x_hi(i) + 1e-12) return false;
  }
  return true;
}

namespace {

Eigen::VectorXd draw(const UncertaintyModel& model, std::mt19937_64& rng,
                     std::normal_distribution<double>& normal) {
  Eigen::VectorXd v(model.m);
  for (int i = 0; i < model.m; ++i) v(i) = normal(rng);
  return model.w_e + model.lambda_sqrt * v;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_scenarios(const UncertaintyModel& model,
                                              int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sampling: need at least one scenario");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(draw(model, rng, normal));
  return out;
}

Eigen::VectorXd sample_one(const UncertaintyModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  return draw(model, rng, normal);
}

void write_scenario_csv(const std::string& path, const UncertaintyModel& model,
                        const std::vector<Eigen::VectorXd>& scenarios) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open scenario file for writing: " + path);
  for (int i = 0; i < model.m; ++i) {
    f << (i ? "," : "") << model.labels[i];
  }
  f << "\n";
  char buf[32];
  for (const Eigen::VectorXd& w : scenarios) {
    for (int i = 0; i < model.m; ++i) {
      std::snprintf(buf, sizeof buf, "%.10g", w(i));
      f << (i ? "," : "") << buf;
    }
    f << "\n";
  }
}

}  // namespace windcap
