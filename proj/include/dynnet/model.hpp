#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "dynnet/common.hpp"
#include "dynnet/kernel.hpp"
#include "dynnet/polya_gamma.hpp"
#include "dynnet/rng.hpp"
#include "dynnet/types.hpp"

namespace dynnet {

namespace model_detail {

// Shared accumulation core.  Summation order is fixed (p ascending, then
// h ascending) so swapped node arguments give bitwise-identical results.
inline double predictor_unchecked(const ModelState& state, const EdgeCovariates& covs,
                                  std::size_t e, int i, int j, int t) {
  double s = state.mu[t];
  const int P = state.predictors();
  for (int p = 0; p < P; ++p) s += covs.z_at(e, t, p) * state.beta(p, t);
  const int H = state.latent_dim();
  const int ri = i * H;
  const int rj = j * H;
  for (int h = 0; h < H; ++h) s += state.X(ri + h, t) * state.X(rj + h, t);
  return s;
}

}  // namespace model_detail

// s_ij(t) = mu(t) + z_ij(t)' beta(t) + x_i(t)' x_j(t).
inline double predictor(const ModelState& state, const EdgeCovariates& covs,
                        int i, int j, int t) {
  require(i != j, "predictor: self edges are undefined");
  require(i >= 0 && i < covs.nodes() && j >= 0 && j < covs.nodes(),
          "predictor: node index out of range");
  require(t >= 0 && t < covs.times(), "predictor: time index out of range");
  const std::size_t e = edge_index(i, j);
  // The dot product reads both units' coordinates in the same h order, so
  // the stored edge makes (i, j) and (j, i) literally the same computation.
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  return model_detail::predictor_unchecked(state, covs, e, hi, lo, t);
}

// Logistic link, overflow-safe on both tails and strictly inside (0, 1).
inline double link_probability(double s) {
  require(std::isfinite(s), "link_probability: non-finite predictor");
  double p;
  if (s >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-s));
  } else {
    const double e = std::exp(s);
    p = e / (1.0 + e);
  }
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::min(std::max(p, lo), hi);
}

namespace model_detail {

// log pi and log(1 - pi) directly from the predictor; finite for |s| <= 700
// even where the probability itself rounds to 0 or 1.
inline double log_link(double s) {
  return s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
}

}  // namespace model_detail

// Bernoulli log likelihood over observed (i > j, t); missing entries skipped.
inline double log_likelihood(const DynamicNetwork& net, const EdgeCovariates& covs,
                             const ModelState& state) {
  require(net.nodes() == covs.nodes() && net.times() == covs.times(),
          "log_likelihood: network / covariate dimension mismatch");
  state.check_dims(net.nodes(), net.times(), covs.predictors(), state.latent_dim());
  const int N = net.times();
  double ll = 0.0;
  std::size_t e = 0;
  for (int i = 1; i < net.nodes(); ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < N; ++t) {
        const std::int8_t y = net.y_at(e, t);
        if (y == DynamicNetwork::kMissing) continue;
        const double s = model_detail::predictor_unchecked(state, covs, e, i, j, t);
        ll += (y == 1) ? model_detail::log_link(s) : model_detail::log_link(-s);
      }
    }
  }
  return ll;
}

// Draws y_ij(t) ~ Bernoulli(pi_ij(t)) independently, edges in storage
// order with time innermost.
inline DynamicNetwork simulate(const ModelConfig& config, const EdgeCovariates& covs,
                               const ModelState& state, Rng& rng) {
  config.validate();
  require(config.times() == covs.times(), "simulate: config grid / covariate mismatch");
  const int V = covs.nodes();
  state.check_dims(V, covs.times(), covs.predictors(), state.latent_dim());
  DynamicNetwork net(V, covs.times());
  std::size_t e = 0;
  for (int i = 1; i < V; ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < covs.times(); ++t) {
        const double s = model_detail::predictor_unchecked(state, covs, e, i, j, t);
        net.set_at(e, t, rng.uniform() < link_probability(s) ? 1 : 0);
      }
    }
  }
  return net;
}

// In-place variant used where the network skeleton (labels) already exists.
inline void simulate_into(DynamicNetwork& net, const EdgeCovariates& covs,
                          const ModelState& state, Rng& rng) {
  const int V = net.nodes();
  const int N = net.times();
  require(V == covs.nodes() && N == covs.times(), "simulate_into: dimension mismatch");
  std::size_t e = 0;
  for (int i = 1; i < V; ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < N; ++t) {
        const double s = model_detail::predictor_unchecked(state, covs, e, i, j, t);
        net.set_at(e, t, rng.uniform() < link_probability(s) ? 1 : 0);
      }
    }
  }
}

namespace model_detail {

// omega is set to E[PG(1, s)] at the current state; the covariate term is
// evaluated at z = 0 when no covariate data accompanies the draw.
inline void init_omega_at_mean(ModelState& state, const EdgeCovariates* covs, int V) {
  const int N = state.times();
  const int H = state.latent_dim();
  state.omega.resize(edge_count(V), N);
  std::size_t e = 0;
  for (int i = 1; i < V; ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < N; ++t) {
        double s;
        if (covs != nullptr) {
          s = predictor_unchecked(state, *covs, e, i, j, t);
        } else {
          s = state.mu[t];
          for (int h = 0; h < H; ++h) s += state.X(i * H + h, t) * state.X(j * H + h, t);
        }
        state.omega(e, t) = pg_mean(s);
      }
    }
  }
}

}  // namespace model_detail

// Draws mu, beta, latent curves and shrinkage weights from their priors
// using prebuilt kernels; omega is set deterministically to the PG mean.
inline ModelState draw_state_from_prior(const ModelConfig& config, const KernelSet& kernels,
                                        int n_nodes, int n_predictors, Rng& rng) {
  config.validate();
  require(n_nodes >= 2, "draw_state_from_prior: need at least 2 nodes");
  require(static_cast<int>(config.kappa_beta.size()) == n_predictors &&
              static_cast<int>(kernels.beta.size()) == n_predictors,
          "draw_state_from_prior: kappa_beta / predictor count mismatch");
  const int N = config.times();
  const int H = config.H;

  ModelState state;
  state.mu = gp_draw(kernels.mu, 1.0, rng);
  state.beta.resize(n_predictors, N);
  for (int p = 0; p < n_predictors; ++p)
    state.beta.row(p) = gp_draw(kernels.beta[p], 1.0, rng).transpose();

  state.theta.resize(H);
  state.theta[0] = rng.gamma(config.a1, 1.0);
  for (int h = 1; h < H; ++h) state.theta[h] = rng.gamma(config.a2, 1.0);
  state.recompute_tau();

  state.X.resize(static_cast<Eigen::Index>(n_nodes) * H, N);
  for (int i = 0; i < n_nodes; ++i)
    for (int h = 0; h < H; ++h)
      state.X.row(i * H + h) = gp_draw(kernels.x, 1.0 / state.tau[h], rng).transpose();

  model_detail::init_omega_at_mean(state, nullptr, n_nodes);
  return state;
}

inline ModelState draw_state_from_prior(const ModelConfig& config, int n_nodes,
                                        int n_predictors, Rng& rng) {
  config.validate();
  KernelSet kernels;
  kernels.mu = build_kernel(config.grid_vector(), config.kappa_mu, config.jitter);
  kernels.x = build_kernel(config.grid_vector(), config.kappa_x, config.jitter);
  for (int p = 0; p < n_predictors; ++p)
    kernels.beta.push_back(build_kernel(config.grid_vector(), config.kappa_beta[p], config.jitter));
  return draw_state_from_prior(config, kernels, n_nodes, n_predictors, rng);
}

// Near-origin start for fitting: mu = 0, beta = 0, latent coordinates iid
// N(0, 0.01), theta = 1, omega at the PG mean of the resulting predictor.
inline ModelState initial_state(const ModelConfig& config, const EdgeCovariates& covs,
                                Rng& rng) {
  config.validate();
  const int V = covs.nodes();
  const int N = config.times();
  require(N == covs.times(), "initial_state: config grid / covariate mismatch");
  const int H = config.H;

  ModelState state;
  state.mu = Eigen::VectorXd::Zero(N);
  state.beta = Eigen::MatrixXd::Zero(covs.predictors(), N);
  state.theta = Eigen::VectorXd::Ones(H);
  state.recompute_tau();
  state.X.resize(static_cast<Eigen::Index>(V) * H, N);
  for (Eigen::Index r = 0; r < state.X.rows(); ++r)
    for (int t = 0; t < N; ++t) state.X(r, t) = 0.1 * rng.normal();
  model_detail::init_omega_at_mean(state, &covs, V);
  return state;
}

}  // namespace dynnet
