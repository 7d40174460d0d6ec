#pragma once

// Exact PG(1, z) sampling via the alternating-series accept/reject scheme
// of Devroye (2009) in the form given by Polson, Scott & Windle (2013),
// with the two-piece inverse-Gaussian / exponential proposal split at 0.64.
// Only the b = 1 case is needed here (one Bernoulli trial per edge-time).

#include <cmath>
#include <limits>

#include "dynnet/common.hpp"
#include "dynnet/rng.hpp"

namespace dynnet {

namespace pg_detail {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTrunc = 0.64;  // proposal changeover point for J*(1, z)

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double norm_cdf_log(double x) {
  if (x > -10.0) return std::log(norm_cdf(x));
  // Mills-ratio asymptotic for the far lower tail.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.91893853320467274178 +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// n-th coefficient of the alternating series bounding the J*(1, 0) density.
inline double series_coef(int n, double x) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x > 0.0) {
    const double expnt =
        -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(expnt);
  }
  return 0.0;
}

// Probability that the proposal lands in the exponential (right) piece.
inline double right_piece_mass(double zhalf) {
  const double t = kTrunc;
  const double fz = 0.125 * kPi * kPi + 0.5 * zhalf * zhalf;
  const double b = std::sqrt(1.0 / t) * (t * zhalf - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * zhalf + 1.0);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - zhalf + norm_cdf_log(b);
  const double xa = x0 + zhalf + norm_cdf_log(a);
  const double qdivp = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + qdivp);
}

// Inverse-Gaussian(1/zhalf, 1) truncated to (0, kTrunc).
inline double trunc_inv_gauss(double zhalf, Rng& rng) {
  const double t = kTrunc;
  if (zhalf < 1.0 / t) {
    // mu > t: proposal from the zhalf = 0 left piece, thinned by exp(-z^2 x / 2).
    while (true) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / t) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform() <= std::exp(-0.5 * zhalf * zhalf * x)) return x;
    }
  }
  const double mu = 1.0 / zhalf;
  double x = t + 1.0;
  while (x >= t) {
    const double y = rng.normal() * rng.normal();
    const double muy = mu * y;
    x = mu + 0.5 * mu * muy - 0.5 * mu * std::sqrt(4.0 * muy + muy * muy);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
  }
  return x;
}

}  // namespace pg_detail

// E[PG(1, z)] = tanh(z/2) / (2z), with the analytic limit 1/4 at z = 0.
inline double pg_mean(double z) {
  require(std::isfinite(z), "pg_mean: non-finite argument");
  const double az = std::abs(z);
  if (az < 1e-4) {
    const double z2 = z * z;
    return 0.25 - z2 / 48.0 + z2 * z2 / 480.0;
  }
  return std::tanh(0.5 * az) / (2.0 * az);
}

// Exact draw from PG(1, z).  The distribution depends on |z| only.
inline double pg_draw(double z, Rng& rng) {
  using namespace pg_detail;
  require(std::isfinite(z), "pg_draw: non-finite argument");
  double az = std::abs(z);
  // Beyond this the likelihood is saturated and omega is numerically zero;
  // clamping keeps the proposal arithmetic stable.
  if (az > 500.0) az = 500.0;
  const double zhalf = 0.5 * az;  // PG(1, z) = J*(1, z/2) / 4
  const double fz = 0.125 * kPi * kPi + 0.5 * zhalf * zhalf;
  const double p_right = right_piece_mass(zhalf);

  for (int attempt = 0; attempt < 10000; ++attempt) {
    double x;
    if (rng.uniform() < p_right)
      x = kTrunc + rng.exponential() / fz;
    else
      x = trunc_inv_gauss(zhalf, rng);

    // Squeeze with the partial sums S_n; accept at odd n, restart at even n.
    double s = series_coef(0, x);
    const double y = rng.uniform() * s;
    int n = 0;
    while (true) {
      ++n;
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
  throw NumericError("pg_draw: rejection loop exceeded iteration cap (implementation bug)");
}

}  // namespace dynnet
