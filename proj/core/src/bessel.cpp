// SPDX-License-Identifier: Apache-2.0
#include "raqr/linops/bessel.hpp"

#include <cmath>
#include <string>

#include "raqr/error.hpp"

namespace raqr::linops {
namespace {

constexpr double kCrossover = 50.0;

double series_ratio(double k) {
  // I0 = sum q^j/(j!)^2, I1 = (k/2) sum q^j/(j!(j+1)!) with q = k^2/4.
  // Both series have positive terms only.
  const double q = 0.25 * k * k;
  double t0 = 1.0, s0 = 1.0;
  double t1 = 1.0, s1 = 1.0;
  for (int j = 1; j < 1000; ++j) {
    t0 *= q / (static_cast<double>(j) * j);
    t1 *= q / (static_cast<double>(j) * (j + 1));
    s0 += t0;
    s1 += t1;
    if (t0 < 1e-18 * s0 && t1 < 1e-18 * s1) break;
  }
  return 0.5 * k * s1 / s0;
}

// sum of the scaled asymptotic series for I_nu (the e^k/sqrt(2 pi k)
// prefactor cancels in the ratio). Terms are added until they fall below
// 1e-18 relative or start growing (divergence onset of the asymptotic tail).
double asymptotic_scaled_sum(double k, double nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, s = 1.0;
  for (int j = 1; j < 60; ++j) {
    const double f = 2.0 * j - 1.0;
    const double next = term * (f * f - mu) / (8.0 * k * j);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    s += term;
    if (std::abs(term) < 1e-18 * std::abs(s)) break;
  }
  return s;
}

}  // namespace

double bessel_ratio(double kappa) {
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw DomainError("bessel_ratio: kappa must be finite and >= 0, got " +
                      std::to_string(kappa));
  if (kappa == 0.0) return 0.0;
  if (kappa < kCrossover) return series_ratio(kappa);
  return asymptotic_scaled_sum(kappa, 1.0) / asymptotic_scaled_sum(kappa, 0.0);
}

double bessel_ratio_derivative(double kappa) {
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw DomainError("bessel_ratio_derivative: kappa must be finite and >= 0, got " +
                      std::to_string(kappa));
  if (kappa == 0.0) return 0.5;
  const double r = bessel_ratio(kappa);
  return 1.0 - r / kappa - r * r;
}

}  // namespace raqr::linops
