#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dynnet/common.hpp"
#include "dynnet/kernel.hpp"
#include "dynnet/model.hpp"
#include "dynnet/polya_gamma.hpp"
#include "dynnet/rng.hpp"
#include "dynnet/types.hpp"

namespace dynnet {

struct SamplerCheckpoint;

// Everything a run needs besides data: kernels on the config grid, their
// dense precisions (kernels are fixed per run), thinning, and operational
// hooks.  Update order is fixed: omega -> mu -> X -> beta -> shrinkage.
struct SamplerPlan {
  ModelConfig config;
  KernelSet kernels;
  Eigen::MatrixXd prec_mu;
  Eigen::MatrixXd prec_x;
  std::vector<Eigen::MatrixXd> prec_beta;
  int thin = 1;

  // Pause after this many sweeps (0 = run to completion).  Used with the
  // checkpoint sink to exercise resume paths.
  std::uint64_t stop_after = 0;
  int checkpoint_every = 0;
  std::function<void(const SamplerCheckpoint&)> checkpoint_sink;
  std::function<void(int sweep, int total, double loglik)> progress;
};

inline SamplerPlan make_plan(ModelConfig config, int n_predictors) {
  config.validate();
  if (config.kappa_beta.empty() && n_predictors > 0)
    config.kappa_beta.assign(n_predictors, 0.01);
  require(static_cast<int>(config.kappa_beta.size()) == n_predictors,
          "make_plan: kappa_beta size must match predictor count");
  SamplerPlan plan;
  plan.config = config;
  const Eigen::VectorXd grid = config.grid_vector();
  plan.kernels.mu = build_kernel(grid, config.kappa_mu, config.jitter);
  plan.kernels.x = build_kernel(grid, config.kappa_x, config.jitter);
  plan.prec_mu = precision_matrix(plan.kernels.mu);
  plan.prec_x = precision_matrix(plan.kernels.x);
  for (int p = 0; p < n_predictors; ++p) {
    plan.kernels.beta.push_back(build_kernel(grid, config.kappa_beta[p], config.jitter));
    plan.prec_beta.push_back(precision_matrix(plan.kernels.beta.back()));
  }
  return plan;
}

namespace gibbs_detail {

// Draw from N(Lambda^{-1} m, Lambda^{-1}).  Lambda is factored in place;
// only its lower triangle is read.
inline Eigen::VectorXd draw_gaussian_precision(Eigen::MatrixXd& lambda,
                                               const Eigen::VectorXd& m, Rng& rng,
                                               const char* what) {
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(lambda);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << what << ": posterior precision factorization failed (n=" << m.size() << ")";
    throw NumericError(msg.str());
  }
  Eigen::VectorXd mean = llt.solve(m);
  Eigen::VectorXd zeta(m.size());
  for (Eigen::Index k = 0; k < zeta.size(); ++k) zeta[k] = rng.normal();
  return mean + llt.matrixU().solve(zeta);
}

}  // namespace gibbs_detail

// omega_ij(t) ~ PG(1, s_ij(t)) at every observed edge-time; missing
// entries keep their current value.
inline void update_omega(ModelState& state, const DynamicNetwork& net,
                         const EdgeCovariates& covs, Rng& rng) {
  const int N = net.times();
  std::size_t e = 0;
  for (int i = 1; i < net.nodes(); ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < N; ++t) {
        if (net.y_at(e, t) == DynamicNetwork::kMissing) continue;
        const double s = model_detail::predictor_unchecked(state, covs, e, i, j, t);
        state.omega(e, t) = pg_draw(s, rng);
      }
    }
  }
}

// Baseline update: the beta update with constant predictor 1 and the whole
// remainder of s held out.
inline void update_mu(ModelState& state, const DynamicNetwork& net,
                      const EdgeCovariates& covs, const SamplerPlan& plan, Rng& rng) {
  const int N = net.times();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(N);
  std::size_t e = 0;
  for (int i = 1; i < net.nodes(); ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < N; ++t) {
        const std::int8_t y = net.y_at(e, t);
        if (y == DynamicNetwork::kMissing) continue;
        const double w = state.omega(e, t);
        const double rem =
            model_detail::predictor_unchecked(state, covs, e, i, j, t) - state.mu[t];
        m[t] += y - 0.5 - w * rem;
        d[t] += w;
      }
    }
  }
  Eigen::MatrixXd lambda = plan.prec_mu;
  lambda.diagonal() += d;
  state.mu = gibbs_detail::draw_gaussian_precision(lambda, m, rng, "update_mu");
}

// One coefficient curve beta_p from its N-variate Gaussian full conditional.
inline void update_beta_single(ModelState& state, const DynamicNetwork& net,
                               const EdgeCovariates& covs, const SamplerPlan& plan,
                               int p, Rng& rng) {
  const int N = net.times();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(N);
  std::size_t e = 0;
  for (int i = 1; i < net.nodes(); ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < N; ++t) {
        const std::int8_t y = net.y_at(e, t);
        if (y == DynamicNetwork::kMissing) continue;
        const double zp = covs.z_at(e, t, p);
        if (zp == 0.0) continue;
        const double w = state.omega(e, t);
        const double nu = model_detail::predictor_unchecked(state, covs, e, i, j, t) -
                          zp * state.beta(p, t);
        m[t] += zp * (y - 0.5 - w * nu);
        d[t] += zp * zp * w;
      }
    }
  }
  Eigen::MatrixXd lambda = plan.prec_beta[p];
  lambda.diagonal() += d;
  state.beta.row(p) =
      gibbs_detail::draw_gaussian_precision(lambda, m, rng, "update_beta").transpose();
}

inline void update_beta(ModelState& state, const DynamicNetwork& net,
                        const EdgeCovariates& covs, const SamplerPlan& plan, Rng& rng) {
  for (int p = 0; p < state.predictors(); ++p)
    update_beta_single(state, net, covs, plan, p, rng);
}

namespace gibbs_detail {

// Stacked H*N prior precision blockdiag_h(tau_h * Kx^{-1}), shared by all
// units within one sweep.
inline Eigen::MatrixXd latent_prior_precision(const ModelState& state,
                                              const SamplerPlan& plan) {
  const int H = state.latent_dim();
  const int N = state.times();
  Eigen::MatrixXd base = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(H) * N,
                                               static_cast<Eigen::Index>(H) * N);
  for (int h = 0; h < H; ++h)
    base.block(h * N, h * N, N, N) = state.tau[h] * plan.prec_x;
  return base;
}

// Per edge-time offset mu(t) + z'beta(t): the part of s that is constant
// while latent coordinates update.
inline Eigen::MatrixXd latent_offsets(const ModelState& state, const EdgeCovariates& covs) {
  const int N = state.times();
  const int P = state.predictors();
  const std::size_t E = edge_count(covs.nodes());
  Eigen::MatrixXd off(E, N);
  for (std::size_t e = 0; e < E; ++e) {
    for (int t = 0; t < N; ++t) {
      double c = state.mu[t];
      for (int p = 0; p < P; ++p) c += covs.z_at(e, t, p) * state.beta(p, t);
      off(static_cast<Eigen::Index>(e), t) = c;
    }
  }
  return off;
}

}  // namespace gibbs_detail

// Joint conditional draw of the stacked coordinate vector of one unit,
// given every other unit's current coordinates.  Stacking is h-major
// (position h*N + t); the likelihood couples coordinates only within a
// time point, contributing H x H blocks there.
inline void update_latent_unit(ModelState& state, const DynamicNetwork& net, int unit,
                               const Eigen::MatrixXd& prior_base,
                               const Eigen::MatrixXd& offsets, Rng& rng) {
  const int V = net.nodes();
  const int H = state.latent_dim();
  const int N = net.times();

  Eigen::MatrixXd lambda = prior_base;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(H) * N);

  for (int other = 0; other < V; ++other) {
    if (other == unit) continue;
    const std::size_t e = edge_index(unit, other);
    const int row_other = other * H;
    for (int t = 0; t < N; ++t) {
      const std::int8_t y = net.y_at(e, t);
      if (y == DynamicNetwork::kMissing) continue;
      const double w = state.omega(e, t);
      const double resid = y - 0.5 - w * offsets(static_cast<Eigen::Index>(e), t);
      for (int h1 = 0; h1 < H; ++h1) {
        const double a1 = state.X(row_other + h1, t);
        m[h1 * N + t] += resid * a1;
        // lower triangle only: h1*N+t >= h2*N+t iff h1 >= h2
        for (int h2 = 0; h2 <= h1; ++h2)
          lambda(h1 * N + t, h2 * N + t) += w * a1 * state.X(row_other + h2, t);
      }
    }
  }

  const Eigen::VectorXd draw =
      gibbs_detail::draw_gaussian_precision(lambda, m, rng, "update_latent");
  for (int h = 0; h < H; ++h)
    for (int t = 0; t < N; ++t) state.X(unit * H + h, t) = draw[h * N + t];
}

inline void update_latent(ModelState& state, const DynamicNetwork& net,
                          const EdgeCovariates& covs, const SamplerPlan& plan, Rng& rng) {
  const Eigen::MatrixXd prior_base = gibbs_detail::latent_prior_precision(state, plan);
  const Eigen::MatrixXd offsets = gibbs_detail::latent_offsets(state, covs);
  for (int unit = 0; unit < net.nodes(); ++unit)
    update_latent_unit(state, net, unit, prior_base, offsets, rng);
}

// Multiplicative-gamma increments: for each l, theta_l ~ Gamma(shape_l,
// rate_l) with the quadratic forms of the latent curves through Kx^{-1};
// tau is recomputed exactly afterwards.
inline void update_shrinkage(ModelState& state, const SamplerPlan& plan, Rng& rng) {
  const int H = state.latent_dim();
  const int N = state.times();
  const int V = state.nodes();
  const double a1 = plan.config.a1;
  const double a2 = plan.config.a2;

  Eigen::VectorXd q(H);
  for (int h = 0; h < H; ++h) {
    double acc = 0.0;
    for (int i = 0; i < V; ++i) {
      const Eigen::VectorXd xi = state.X.row(i * H + h).transpose();
      acc += xi.dot(plan.prec_x * xi);
    }
    if (!std::isfinite(acc))
      throw NumericError("update_shrinkage: non-finite quadratic form");
    q[h] = acc;
  }

  for (int l = 0; l < H; ++l) {
    const double shape = (l == 0 ? a1 : a2) +
                         0.5 * static_cast<double>(V) * N * (H - l);
    double rate = 1.0;
    for (int h = l; h < H; ++h) {
      double tau_wo_l = 1.0;
      for (int mIdx = 0; mIdx <= h; ++mIdx)
        if (mIdx != l) tau_wo_l *= state.theta[mIdx];
      rate += 0.5 * tau_wo_l * q[h];
    }
    state.theta[l] = rng.gamma(shape, rate);
  }
  state.recompute_tau();
}

// One full sweep in the fixed update order.
inline void gibbs_sweep(ModelState& state, const DynamicNetwork& net,
                        const EdgeCovariates& covs, const SamplerPlan& plan, Rng& rng) {
  update_omega(state, net, covs, rng);
  update_mu(state, net, covs, plan, rng);
  update_latent(state, net, covs, plan, rng);
  update_beta(state, net, covs, plan, rng);
  update_shrinkage(state, plan, rng);
}

// Sampler state at a sweep boundary; enough to continue a run exactly.
struct SamplerCheckpoint {
  std::uint64_t sweeps_done = 0;
  ModelState state;
  PosteriorSamples partial;
  std::string rng_state;
};

struct RunResult {
  PosteriorSamples samples;
  bool completed = true;
  std::uint64_t sweeps_done = 0;
};

namespace gibbs_detail {

inline int retained_capacity(const ModelConfig& config, int thin) {
  return (config.n_iter - config.n_burn + thin - 1) / thin;
}

inline void reserve_samples(PosteriorSamples& out, const SamplerPlan& plan,
                            const DynamicNetwork& net, const EdgeCovariates& covs) {
  const ModelConfig& c = plan.config;
  const int R = retained_capacity(c, plan.thin);
  const int N = c.times();
  out.config = c;
  out.V = net.nodes();
  out.P = covs.predictors();
  out.thin = plan.thin;
  out.node_labels = net.node_labels();
  out.predictor_labels = covs.predictor_labels();
  out.n_retained = 0;
  out.mu_draws.resize(R, N);
  out.beta_draws.resize(R, static_cast<Eigen::Index>(out.P) * N);
  out.tau_draws.resize(R, c.H);
  out.factor_energy.resize(R, c.H);
  out.pi_draws.assign(static_cast<std::size_t>(R) * edge_count(out.V) * N, 0.0f);
  out.loglik.assign(c.n_iter, 0.0);
}

// One pass over all edge-times: log likelihood on observed entries and,
// when retaining, the link probabilities for every entry.
inline double record_pass(const ModelState& state, const DynamicNetwork& net,
                          const EdgeCovariates& covs, PosteriorSamples& out,
                          int retain_row) {
  const int N = net.times();
  const std::size_t E = net.edges();
  double ll = 0.0;
  std::size_t e = 0;
  for (int i = 1; i < net.nodes(); ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < N; ++t) {
        const double s = model_detail::predictor_unchecked(state, covs, e, i, j, t);
        const std::int8_t y = net.y_at(e, t);
        if (y != DynamicNetwork::kMissing)
          ll += (y == 1) ? model_detail::log_link(s) : model_detail::log_link(-s);
        if (retain_row >= 0) {
          out.pi_draws[(static_cast<std::size_t>(retain_row) * E + e) * N + t] =
              static_cast<float>(link_probability(s));
        }
      }
    }
  }
  return ll;
}

inline void retain_curves(const ModelState& state, PosteriorSamples& out, int r) {
  const int N = state.times();
  const int H = state.latent_dim();
  const int V = state.nodes();
  out.mu_draws.row(r) = state.mu.transpose();
  for (int p = 0; p < state.predictors(); ++p)
    out.beta_draws.row(r).segment(static_cast<Eigen::Index>(p) * N, N) = state.beta.row(p);
  out.tau_draws.row(r) = state.tau.transpose();
  for (int h = 0; h < H; ++h) {
    double energy = 0.0;
    for (int i = 0; i < V; ++i) energy += state.X.row(i * H + h).squaredNorm();
    out.factor_energy(r, h) = energy;
  }
}

inline RunResult run_loop(const DynamicNetwork& net, const EdgeCovariates& covs,
                          const SamplerPlan& plan, Rng& rng, ModelState state,
                          std::uint64_t start_sweep, PosteriorSamples out) {
  const ModelConfig& config = plan.config;
  const int n_iter = config.n_iter;
  const int n_burn = config.n_burn;
  const int thin = plan.thin;

  auto checkpoint_now = [&](std::uint64_t sweep) {
    if (!plan.checkpoint_sink) return;
    SamplerCheckpoint ck;
    ck.sweeps_done = sweep;
    ck.state = state;
    ck.partial = out;
    ck.rng_state = rng.save_state();
    plan.checkpoint_sink(ck);
  };

  for (std::uint64_t sweep = start_sweep + 1; sweep <= static_cast<std::uint64_t>(n_iter);
       ++sweep) {
    try {
      gibbs_sweep(state, net, covs, plan, rng);
    } catch (const Error& err) {
      checkpoint_now(sweep - 1);
      std::ostringstream msg;
      msg << "run_sampler: sweep " << sweep << " failed: " << err.what();
      if (plan.checkpoint_sink)
        msg << " (state snapshot written at sweep " << (sweep - 1) << ")";
      throw NumericError(msg.str());
    }

    int retain_row = -1;
    if (sweep > static_cast<std::uint64_t>(n_burn) &&
        (sweep - n_burn - 1) % static_cast<std::uint64_t>(thin) == 0) {
      retain_row = out.n_retained;
    }
    const double ll = record_pass(state, net, covs, out, retain_row);
    out.loglik[sweep - 1] = ll;
    if (retain_row >= 0) {
      retain_curves(state, out, retain_row);
      out.n_retained = retain_row + 1;
    }
    if (plan.progress) plan.progress(static_cast<int>(sweep), n_iter, ll);

    const bool last = sweep == static_cast<std::uint64_t>(n_iter);
    if (plan.checkpoint_every > 0 && !last &&
        sweep % static_cast<std::uint64_t>(plan.checkpoint_every) == 0)
      checkpoint_now(sweep);
    if (plan.stop_after > 0 && sweep == plan.stop_after && !last) {
      checkpoint_now(sweep);
      return {std::move(out), false, sweep};
    }
  }
  return {std::move(out), true, static_cast<std::uint64_t>(n_iter)};
}

}  // namespace gibbs_detail

// Fresh run: initial state per the near-origin rule, n_iter sweeps,
// retention after n_burn.
inline RunResult run_sampler_with(const DynamicNetwork& net, const EdgeCovariates& covs,
                                  const SamplerPlan& plan, Rng& rng) {
  require(net.nodes() == covs.nodes() && net.times() == covs.times(),
          "run_sampler: network / covariate dimension mismatch");
  require(plan.config.times() == net.times(),
          "run_sampler: config grid / data dimension mismatch");
  require(plan.thin >= 1, "run_sampler: thinning must be >= 1");
  ModelState state = initial_state(plan.config, covs, rng);
  PosteriorSamples out;
  gibbs_detail::reserve_samples(out, plan, net, covs);
  return gibbs_detail::run_loop(net, covs, plan, rng, std::move(state), 0, std::move(out));
}

// Continue from a checkpoint; the passed rng is overwritten with the
// checkpointed stream so the continuation matches an uninterrupted run.
inline RunResult resume_sampler(const DynamicNetwork& net, const EdgeCovariates& covs,
                                const SamplerPlan& plan, Rng& rng,
                                const SamplerCheckpoint& ck) {
  require(net.nodes() == covs.nodes() && net.times() == covs.times(),
          "resume_sampler: network / covariate dimension mismatch");
  require(ck.sweeps_done <= static_cast<std::uint64_t>(plan.config.n_iter),
          "resume_sampler: checkpoint is beyond the configured run");
  rng.load_state(ck.rng_state);
  return gibbs_detail::run_loop(net, covs, plan, rng, ck.state, ck.sweeps_done, ck.partial);
}

inline PosteriorSamples run_sampler(const DynamicNetwork& net, const EdgeCovariates& covs,
                                    const ModelConfig& config, Rng& rng) {
  SamplerPlan plan = make_plan(config, covs.predictors());
  return run_sampler_with(net, covs, plan, rng).samples;
}

}  // namespace dynnet
