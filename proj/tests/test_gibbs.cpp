#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dynnet/gibbs.hpp"
#include "dynnet/io.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dynnet;

namespace {

// V=2, N=1 scalar setup: one observed edge with y = 1, omega = 0.25 and a
// unit prior precision.  Each conditional below reduces to N(0.4, 0.8):
// precision 1 * 0.25 + 1 = 1.25, mean 0.8 * (1 - 1/2 - 0) = 0.4.
struct ScalarCase {
  ModelConfig config;
  SamplerPlan plan;
  DynamicNetwork net{2, 1};
  EdgeCovariates covs{2, 1, 0};

  explicit ScalarCase(int n_predictors) : covs(2, 1, n_predictors) {
    config = helpers::tiny_config(1, 1, n_predictors);
    config.jitter = 0.0;  // makes the prior precision exactly 1
    plan = make_plan(config, n_predictors);
    net.set(1, 0, 0, true);
    for (int p = 0; p < n_predictors; ++p) covs.set(1, 0, 0, p, 1.0);
  }
};

void check_scalar_moments(const std::vector<double>& draws, double mean, double var) {
  CHECK(std::abs(oracle::mean(draws) - mean) <= 3.0 * oracle::se_mean(draws));
  CHECK(std::abs(oracle::variance(draws) - var) <= 3.0 * oracle::se_variance(draws));
}

}  // namespace

TEST_CASE("update_mu scalar conditional matches the hand formula") {
  ScalarCase sc(0);
  auto state = helpers::zero_state(2, 1, 1, 0);
  Rng rng(101);
  const int n = 100000;
  std::vector<double> draws(n);
  // remainder is identically zero, so iterating in place keeps the target fixed
  for (auto& d : draws) {
    update_mu(state, sc.net, sc.covs, sc.plan, rng);
    d = state.mu[0];
  }
  check_scalar_moments(draws, 0.4, 0.8);
}

TEST_CASE("update_mu with no observed edges draws from the prior") {
  auto config = helpers::tiny_config(2, 1, 0);
  auto plan = make_plan(config, 0);
  DynamicNetwork net(2, 2);  // all missing
  EdgeCovariates covs(2, 2, 0);
  auto state = helpers::zero_state(2, 2, 1, 0);
  Rng rng(103);
  const int n = 20000;
  std::vector<double> first(n);
  std::vector<double> second(n);
  for (int k = 0; k < n; ++k) {
    update_mu(state, net, covs, plan, rng);
    first[k] = state.mu[0];
    second[k] = state.mu[1];
  }
  const double marginal = 1.0 + plan.kernels.mu.jitter_used;
  CHECK(std::abs(oracle::mean(first)) <= 3.0 * oracle::se_mean(first));
  CHECK(std::abs(oracle::variance(first) - marginal) <= 3.0 * oracle::se_variance(first));
  CHECK(std::abs(oracle::variance(second) - marginal) <= 3.0 * oracle::se_variance(second));
}

TEST_CASE("update_mu posterior mean negates under a response flip") {
  ScalarCase sc(0);
  auto flipped = sc.net;
  flipped.set(1, 0, 0, false);
  auto state = helpers::zero_state(2, 1, 1, 0);
  Rng rng(107);
  const int n = 30000;
  std::vector<double> pos(n), neg(n);
  for (auto& d : pos) {
    update_mu(state, sc.net, sc.covs, sc.plan, rng);
    d = state.mu[0];
    state.mu[0] = 0.0;
  }
  for (auto& d : neg) {
    update_mu(state, flipped, sc.covs, sc.plan, rng);
    d = state.mu[0];
    state.mu[0] = 0.0;
  }
  const double se =
      std::sqrt(oracle::se_mean(pos) * oracle::se_mean(pos) +
                oracle::se_mean(neg) * oracle::se_mean(neg));
  CHECK(std::abs(oracle::mean(pos) + oracle::mean(neg)) <= 3.0 * se);
}

TEST_CASE("update_beta scalar conditional matches the hand formula") {
  ScalarCase sc(1);
  auto state = helpers::zero_state(2, 1, 1, 1);
  Rng rng(109);
  const int n = 100000;
  std::vector<double> draws(n);
  for (auto& d : draws) {
    update_beta(state, sc.net, sc.covs, sc.plan, rng);
    d = state.beta(0, 0);
  }
  check_scalar_moments(draws, 0.4, 0.8);
}

TEST_CASE("update_beta with zero design reduces to the GP prior") {
  auto config = helpers::tiny_config(3, 1, 1);
  auto plan = make_plan(config, 1);
  DynamicNetwork net(3, 3);
  for (int i = 1; i < 3; ++i)
    for (int j = 0; j < i; ++j)
      for (int t = 0; t < 3; ++t) net.set(i, j, t, (i + t) % 2 == 0);
  EdgeCovariates covs(3, 3, 1);  // z identically zero
  auto state = helpers::zero_state(3, 3, 1, 1);
  Rng rng(113);
  const int n = 20000;
  std::vector<double> first(n);
  double cross = 0.0;
  for (int k = 0; k < n; ++k) {
    update_beta(state, net, covs, plan, rng);
    first[k] = state.beta(0, 0);
    cross += state.beta(0, 0) * state.beta(0, 1);
  }
  const auto& kx = plan.kernels.beta[0];
  CHECK(std::abs(oracle::mean(first)) <= 3.0 * oracle::se_mean(first));
  CHECK(std::abs(oracle::variance(first) - (1.0 + kx.jitter_used)) <=
        3.0 * oracle::se_variance(first));
  CHECK(std::abs(cross / n - kx.cov(0, 1)) <= 0.03);
}

TEST_CASE("doubling omega shrinks the conditional variance") {
  ScalarCase sc(1);
  auto state = helpers::zero_state(2, 1, 1, 1);
  Rng rng(127);
  const int n = 20000;
  std::vector<double> base(n), tight(n);
  state.omega(0, 0) = 0.25;
  for (auto& d : base) {
    update_beta(state, sc.net, sc.covs, sc.plan, rng);
    d = state.beta(0, 0);
  }
  state.omega(0, 0) = 0.5;  // nu = 0, so the linear term is unchanged
  for (auto& d : tight) {
    update_beta(state, sc.net, sc.covs, sc.plan, rng);
    d = state.beta(0, 0);
  }
  CHECK(oracle::variance(tight) < oracle::variance(base));
}

TEST_CASE("update_latent scalar conditional matches the hand formula") {
  ScalarCase sc(0);
  auto state = helpers::zero_state(2, 1, 1, 0);
  state.x(1, 0, 0) = 1.0;  // the other unit's coordinate
  const Eigen::MatrixXd prior_base = gibbs_detail::latent_prior_precision(state, sc.plan);
  const Eigen::MatrixXd offsets = gibbs_detail::latent_offsets(state, sc.covs);
  Rng rng(131);
  const int n = 100000;
  std::vector<double> draws(n);
  for (auto& d : draws) {
    update_latent_unit(state, sc.net, 0, prior_base, offsets, rng);
    d = state.x(0, 0, 0);
  }
  check_scalar_moments(draws, 0.4, 0.8);
}

TEST_CASE("update_latent with a zero neighbour reduces to the prior") {
  ScalarCase sc(0);
  auto state = helpers::zero_state(2, 1, 1, 0);
  state.theta[0] = 2.0;  // tau_1 = 2
  state.recompute_tau();
  const Eigen::MatrixXd prior_base = gibbs_detail::latent_prior_precision(state, sc.plan);
  const Eigen::MatrixXd offsets = gibbs_detail::latent_offsets(state, sc.covs);
  Rng rng(137);
  const int n = 50000;
  std::vector<double> draws(n);
  for (auto& d : draws) {
    update_latent_unit(state, sc.net, 0, prior_base, offsets, rng);
    d = state.x(0, 0, 0);
    state.x(1, 0, 0) = 0.0;  // keep the neighbour pinned at zero
  }
  check_scalar_moments(draws, 0.0, 0.5);
}

TEST_CASE("update_omega") {
  SECTION("missing entries are untouched") {
    auto config = helpers::tiny_config(2, 1, 0);
    DynamicNetwork net(2, 2);
    net.set(1, 0, 0, true);  // t = 1 stays missing
    EdgeCovariates covs(2, 2, 0);
    auto state = helpers::zero_state(2, 2, 1, 0);
    state.omega(0, 1) = 7.0;
    Rng rng(139);
    update_omega(state, net, covs, rng);
    CHECK(state.omega(0, 1) == 7.0);
    CHECK(state.omega(0, 0) != 0.25);
  }

  SECTION("fixed seed reproduces the field") {
    DynamicNetwork net(3, 2);
    for (int i = 1; i < 3; ++i)
      for (int j = 0; j < i; ++j)
        for (int t = 0; t < 2; ++t) net.set(i, j, t, true);
    EdgeCovariates covs(3, 2, 0);
    auto s1 = helpers::zero_state(3, 2, 1, 0);
    auto s2 = helpers::zero_state(3, 2, 1, 0);
    Rng r1(141), r2(141);
    update_omega(s1, net, covs, r1);
    update_omega(s2, net, covs, r2);
    CHECK((s1.omega - s2.omega).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("draws at s = 0 average to the PG mean") {
    DynamicNetwork net(2, 1);
    net.set(1, 0, 0, true);
    EdgeCovariates covs(2, 1, 0);
    auto state = helpers::zero_state(2, 1, 1, 0);
    Rng rng(149);
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& d : draws) {
      state.X.setZero();  // keep s = 0
      update_omega(state, net, covs, rng);
      d = state.omega(0, 0);
    }
    CHECK(std::abs(oracle::mean(draws) - 0.25) <= 3.0 * oracle::se_mean(draws));
  }
}

TEST_CASE("update_shrinkage") {
  SECTION("zero latent curves give the prior-plus-count gamma") {
    auto config = helpers::tiny_config(2, 2, 0);
    auto plan = make_plan(config, 0);
    Rng rng(151);
    const int n = 20000;
    // V=3, N=2, H=2: shape_1 = 2 + 6, shape_2 = 2 + 3, both rate 1
    std::vector<double> t1(n), t2(n);
    for (int k = 0; k < n; ++k) {
      auto state = helpers::zero_state(3, 2, 2, 0);
      update_shrinkage(state, plan, rng);
      t1[k] = state.theta[0];
      t2[k] = state.theta[1];
    }
    CHECK(std::abs(oracle::mean(t1) - 8.0) <= 3.0 * oracle::se_mean(t1));
    CHECK(std::abs(oracle::mean(t2) - 5.0) <= 3.0 * oracle::se_mean(t2));
  }

  SECTION("tau is recomputed exactly") {
    auto config = helpers::tiny_config(2, 3, 0);
    auto plan = make_plan(config, 0);
    auto state = helpers::zero_state(2, 2, 3, 0);
    Rng rng(157);
    update_shrinkage(state, plan, rng);
    CHECK(state.tau[2] == state.theta[0] * state.theta[1] * state.theta[2]);
    CHECK(state.tau[1] == state.theta[0] * state.theta[1]);
  }

  SECTION("H = 1 conditional matches grid integration of its density") {
    auto config = helpers::tiny_config(2, 1, 0);
    auto plan = make_plan(config, 0);
    auto state = helpers::zero_state(2, 2, 1, 0);
    state.x(0, 0, 0) = 0.9;
    state.x(0, 0, 1) = -0.3;
    state.x(1, 0, 0) = 0.4;
    state.x(1, 0, 1) = 1.1;

    double quad = 0.0;
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXd xi = state.X.row(i).transpose();
      quad += xi.dot(apply_precision(plan.kernels.x, xi));
    }
    const double shape = config.a1 + 0.5 * 2 * 2 * 1;
    const double rate = 1.0 + 0.5 * quad;

    // trapezoid integration of x^(shape-1) exp(-rate x)
    const double hi = 60.0 / rate;
    const int grid_n = 200000;
    double norm = 0.0;
    double first_moment = 0.0;
    for (int g = 0; g <= grid_n; ++g) {
      const double x = hi * g / grid_n;
      const double w = (g == 0 || g == grid_n) ? 0.5 : 1.0;
      const double f = (x == 0.0) ? 0.0 : std::exp((shape - 1.0) * std::log(x) - rate * x);
      norm += w * f;
      first_moment += w * f * x;
    }
    const double expected_mean = first_moment / norm;

    Rng rng(163);
    const int n = 20000;
    std::vector<double> draws(n);
    const Eigen::MatrixXd x_fixed = state.X;
    for (auto& d : draws) {
      state.X = x_fixed;
      update_shrinkage(state, plan, rng);
      d = state.theta[0];
    }
    CHECK(std::abs(oracle::mean(draws) - expected_mean) <= 3.0 * oracle::se_mean(draws));
  }

  SECTION("prior shrinkage weights grow stochastically with depth") {
    Rng rng(167);
    const int n = 20000;
    double t1 = 0.0, t3 = 0.0, t5 = 0.0;
    for (int k = 0; k < n; ++k) {
      double prod = rng.gamma(2.0, 1.0);
      double tau_h[6];
      tau_h[0] = prod;
      for (int h = 1; h < 6; ++h) {
        prod *= rng.gamma(2.0, 1.0);
        tau_h[h] = prod;
      }
      t1 += tau_h[0];
      t3 += tau_h[2];
      t5 += tau_h[4];
    }
    CHECK(t1 / n < t3 / n);
    CHECK(t3 / n < t5 / n);
  }
}

TEST_CASE("run_sampler bookkeeping and determinism") {
  auto config = helpers::tiny_config(3, 2, 1);
  config.n_iter = 10;
  config.n_burn = 5;
  config.seed = 91;
  EdgeCovariates covs(4, 3, 1);
  Rng sim_rng(71);
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j)
      for (int t = 0; t < 3; ++t) covs.set(i, j, t, 0, sim_rng.bernoulli(0.5) ? 1.0 : 0.0);
  auto truth = draw_state_from_prior(config, 4, 1, sim_rng);
  auto net = simulate(config, covs, truth, sim_rng);

  SECTION("retains n_iter - n_burn draws") {
    Rng rng(config.seed);
    auto samples = run_sampler(net, covs, config, rng);
    CHECK(samples.n_retained == 5);
    CHECK(samples.mu_draws.rows() == 5);
    CHECK(samples.loglik.size() == 10);
    for (int r = 0; r < samples.n_retained; ++r)
      for (std::size_t e = 0; e < samples.edges(); ++e)
        for (int t = 0; t < 3; ++t) {
          REQUIRE(samples.pi_at(r, e, t) > 0.0);
          REQUIRE(samples.pi_at(r, e, t) < 1.0);
        }
  }

  SECTION("same seed gives bitwise-identical draws") {
    Rng r1(config.seed), r2(config.seed);
    auto s1 = run_sampler(net, covs, config, r1);
    auto s2 = run_sampler(net, covs, config, r2);
    CHECK(s1.mu_draws == s2.mu_draws);
    CHECK(s1.beta_draws == s2.beta_draws);
    CHECK(s1.tau_draws == s2.tau_draws);
    CHECK(s1.pi_draws == s2.pi_draws);
    CHECK(s1.loglik == s2.loglik);
  }

  SECTION("checkpoint resume reproduces the uninterrupted run") {
    auto plan = make_plan(config, 1);
    Rng r1(config.seed);
    auto full = run_sampler_with(net, covs, plan, r1);
    REQUIRE(full.completed);

    SamplerCheckpoint saved;
    auto plan_stop = plan;
    plan_stop.stop_after = 7;
    plan_stop.checkpoint_sink = [&](const SamplerCheckpoint& ck) { saved = ck; };
    Rng r2(config.seed);
    auto partial = run_sampler_with(net, covs, plan_stop, r2);
    CHECK_FALSE(partial.completed);
    CHECK(partial.sweeps_done == 7);
    REQUIRE(saved.sweeps_done == 7);

    Rng r3(0);  // overwritten by the checkpointed stream
    auto resumed = resume_sampler(net, covs, plan, r3, saved);
    CHECK(resumed.completed);
    CHECK(resumed.samples.mu_draws == full.samples.mu_draws);
    CHECK(resumed.samples.beta_draws == full.samples.beta_draws);
    CHECK(resumed.samples.pi_draws == full.samples.pi_draws);
    CHECK(resumed.samples.loglik == full.samples.loglik);
  }

  SECTION("mismatched covariate grid is rejected before sampling") {
    EdgeCovariates bad(4, 2, 1);
    Rng rng(1);
    CHECK_THROWS_AS(run_sampler(net, bad, config, rng), DataError);
  }
}
