// Independent numerical oracles used by the test suites. These must not
// share code with the implementation paths they check.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

// Standard normal CDF by composite Simpson integration of the density
// from 0 to |z| (no erf involved).
inline double normal_cdf_simpson(double z) {
  const double a = 0.0, b = std::fabs(z);
  const int n = 4000;  // even
  const double h = (b - a) / n;
  auto pdf = [](double t) {
    return 0.3989422804014326779 * std::exp(-0.5 * t * t);
  };
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  const double integral = s * h / 3.0;
  return z >= 0 ? 0.5 + integral : 0.5 - integral;
}

// Inverse of the two-sided interval mass by bisection on the Simpson CDF.
inline double interval_halfwidth_bisect(double gamma) {
  if (gamma < 0 || gamma >= 1) throw std::invalid_argument("gamma");
  if (gamma == 0) return 0.0;
  auto mass = [](double z) {
    return 2.0 * normal_cdf_simpson(z) - 1.0;
  };
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) < gamma) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracles
