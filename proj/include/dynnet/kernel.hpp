#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "dynnet/common.hpp"
#include "dynnet/rng.hpp"

namespace dynnet {

// Squared-exponential covariance on a time grid, with the regularized
// Cholesky factor used for every prior draw and precision application.
// Entries of cov are exp(-kappa * (t_a - t_b)^2), unit diagonal; chol is
// the lower factor of cov + jitter_used * I.
struct KernelMatrix {
  Eigen::VectorXd grid;
  double kappa = 0.0;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;
  double jitter_used = 0.0;

  int size() const { return static_cast<int>(grid.size()); }
};

// Builds the kernel and factors cov + jitter*I.  On factorization failure
// jitter escalates tenfold up to 1e-4 before giving up.
inline KernelMatrix build_kernel(const Eigen::VectorXd& grid, double kappa,
                                 double jitter = 1e-6) {
  const int n = static_cast<int>(grid.size());
  require(n >= 1, "build_kernel: empty time grid");
  require(kappa > 0, "build_kernel: kappa must be positive");
  require(jitter >= 0, "build_kernel: jitter must be nonnegative");
  for (int a = 1; a < n; ++a)
    require(grid[a] > grid[a - 1], "build_kernel: time grid must be strictly increasing");

  KernelMatrix k;
  k.grid = grid;
  k.kappa = kappa;
  k.cov.resize(n, n);
  for (int a = 0; a < n; ++a) {
    k.cov(a, a) = 1.0;
    for (int b = 0; b < a; ++b) {
      const double d = grid[a] - grid[b];
      const double v = std::exp(-kappa * d * d);
      k.cov(a, b) = v;
      k.cov(b, a) = v;
    }
  }

  constexpr double kMaxJitter = 1e-4;
  double j = jitter;
  while (true) {
    Eigen::MatrixXd reg = k.cov;
    reg.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() == Eigen::Success) {
      k.chol = llt.matrixL();
      k.jitter_used = j;
      return k;
    }
    const double next = (j == 0.0) ? 1e-6 : j * 10.0;
    if (next > kMaxJitter) {
      std::ostringstream msg;
      msg << "build_kernel: Cholesky failed at max jitter " << kMaxJitter
          << " (n=" << n << ", kappa=" << kappa
          << ", grid range [" << grid[0] << ", " << grid[n - 1] << "])";
      throw NumericError(msg.str());
    }
    j = next;
  }
}

// Draw from N(0, scale * (cov + jitter*I)) as sqrt(scale) * chol * z.
inline Eigen::VectorXd gp_draw(const KernelMatrix& k, double scale, Rng& rng) {
  require(scale > 0, "gp_draw: scale must be positive");
  const int n = k.size();
  Eigen::VectorXd z(n);
  for (int a = 0; a < n; ++a) z[a] = rng.normal();
  Eigen::VectorXd draw = k.chol.triangularView<Eigen::Lower>() * z;
  draw *= std::sqrt(scale);
  return draw;
}

// Solves (cov + jitter*I) x = v with two triangular solves.
inline Eigen::VectorXd apply_precision(const KernelMatrix& k, const Eigen::VectorXd& v) {
  require(v.size() == k.grid.size(), "apply_precision: length mismatch");
  Eigen::VectorXd y = k.chol.triangularView<Eigen::Lower>().solve(v);
  return k.chol.transpose().triangularView<Eigen::Upper>().solve(y);
}

// Dense (cov + jitter*I)^{-1}, symmetrized.  Used to assemble posterior
// precisions; kernels are fixed per run so this is computed once.
inline Eigen::MatrixXd precision_matrix(const KernelMatrix& k) {
  const int n = k.size();
  Eigen::MatrixXd inv = k.chol.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(n, n));
  inv = k.chol.transpose().triangularView<Eigen::Upper>().solve(inv);
  return 0.5 * (inv + inv.transpose());
}

// The three kernels a model run needs: baseline, latent coordinates, and
// one per edge predictor.
struct KernelSet {
  KernelMatrix mu;
  KernelMatrix x;
  std::vector<KernelMatrix> beta;
};

}  // namespace dynnet
