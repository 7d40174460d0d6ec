#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dynnet/model.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dynnet;

TEST_CASE("predictor evaluates the linear-plus-latent form") {
  SECTION("all-zero state gives zero") {
    auto state = helpers::zero_state(3, 2, 2, 1);
    EdgeCovariates covs(3, 2, 1);
    CHECK(predictor(state, covs, 1, 0, 0) == 0.0);
  }

  SECTION("hand case") {
    auto state = helpers::zero_state(2, 1, 2, 2);
    EdgeCovariates covs(2, 1, 2);
    state.mu[0] = 0.5;
    covs.set(1, 0, 0, 0, 1.0);
    covs.set(1, 0, 0, 1, 0.0);
    state.beta(0, 0) = 0.4;
    state.beta(1, 0) = -0.3;
    // x_1 . x_0 = 0.5*0.4 + 0.1*1.0 = 0.3
    state.x(1, 0, 0) = 0.5;
    state.x(1, 1, 0) = 0.1;
    state.x(0, 0, 0) = 0.4;
    state.x(0, 1, 0) = 1.0;
    CHECK(predictor(state, covs, 1, 0, 0) == Catch::Approx(1.2).margin(1e-12));
  }

  SECTION("bitwise symmetric under node swap with asymmetric coordinates") {
    auto state = helpers::zero_state(4, 3, 3, 0);
    EdgeCovariates covs(4, 3, 0);
    Rng rng(3);
    for (Eigen::Index r = 0; r < state.X.rows(); ++r)
      for (int t = 0; t < 3; ++t) state.X(r, t) = rng.normal();
    state.mu[1] = -0.7;
    for (int t = 0; t < 3; ++t) {
      const double a = predictor(state, covs, 3, 1, t);
      const double b = predictor(state, covs, 1, 3, t);
      CHECK(a == b);
    }
  }

  SECTION("rejects self edges and bad indices") {
    auto state = helpers::zero_state(3, 2, 1, 0);
    EdgeCovariates covs(3, 2, 0);
    CHECK_THROWS_AS(predictor(state, covs, 1, 1, 0), DataError);
    CHECK_THROWS_AS(predictor(state, covs, 3, 0, 0), DataError);
    CHECK_THROWS_AS(predictor(state, covs, 1, 0, 2), DataError);
  }
}

TEST_CASE("link_probability") {
  CHECK(link_probability(0.0) == 0.5);
  CHECK(link_probability(1.2) == Catch::Approx(0.768525).margin(1e-6));

  const double tail = link_probability(-50.0);
  CHECK(tail > 0.0);
  CHECK(tail < 1e-20);

  SECTION("complement identity across the stable range") {
    for (double s : {0.0, 0.3, 1.2, 7.0, 35.0, 200.0, 700.0}) {
      CHECK(std::abs(link_probability(s) + link_probability(-s) - 1.0) <= 1e-12);
      CHECK(link_probability(s) > 0.0);
      CHECK(link_probability(s) < 1.0);
    }
  }

  SECTION("monotone in s") {
    double prev = 0.0;
    for (double s = -20.0; s <= 20.0; s += 0.5) {
      const double p = link_probability(s);
      CHECK(p > prev);
      prev = p;
    }
  }

  CHECK_THROWS_AS(link_probability(std::nan("")), DataError);
}

TEST_CASE("log_likelihood") {
  SECTION("single observed edge at s = 0") {
    auto state = helpers::zero_state(2, 1, 1, 0);
    EdgeCovariates covs(2, 1, 0);
    DynamicNetwork net(2, 1);
    net.set(1, 0, 0, true);
    CHECK(log_likelihood(net, covs, state) == Catch::Approx(-0.693147).margin(1e-6));
  }

  SECTION("all missing gives the empty sum") {
    auto state = helpers::zero_state(3, 2, 1, 0);
    EdgeCovariates covs(3, 2, 0);
    DynamicNetwork net(3, 2);  // everything missing by construction
    CHECK(log_likelihood(net, covs, state) == 0.0);
  }

  SECTION("additivity over independent edges") {
    auto state = helpers::zero_state(3, 1, 1, 0);
    state.x(0, 0, 0) = 0.8;
    state.x(1, 0, 0) = -0.4;
    state.x(2, 0, 0) = 1.3;
    EdgeCovariates covs(3, 1, 0);

    DynamicNetwork both(3, 1);
    both.set(1, 0, 0, true);
    both.set(2, 1, 0, false);
    DynamicNetwork first(3, 1);
    first.set(1, 0, 0, true);
    DynamicNetwork second(3, 1);
    second.set(2, 1, 0, false);
    CHECK(log_likelihood(both, covs, state) ==
          Catch::Approx(log_likelihood(first, covs, state) +
                        log_likelihood(second, covs, state)).margin(1e-12));
  }

  SECTION("flipping y away from the modal value lowers the likelihood") {
    auto state = helpers::zero_state(2, 1, 1, 0);
    state.mu[0] = 2.5;  // pi far above one half
    EdgeCovariates covs(2, 1, 0);
    DynamicNetwork net(2, 1);
    net.set(1, 0, 0, true);
    const double ll_modal = log_likelihood(net, covs, state);
    net.set(1, 0, 0, false);
    CHECK(log_likelihood(net, covs, state) < ll_modal);
  }

  SECTION("dimension mismatch is rejected") {
    auto state = helpers::zero_state(2, 1, 1, 0);
    EdgeCovariates covs(3, 1, 0);
    DynamicNetwork net(2, 1);
    CHECK_THROWS_AS(log_likelihood(net, covs, state), DataError);
  }
}

TEST_CASE("simulate") {
  auto config = helpers::tiny_config(1, 1, 0);

  SECTION("saturated predictor forces the edge on") {
    auto state = helpers::zero_state(2, 1, 1, 0);
    state.mu[0] = 50.0;
    EdgeCovariates covs(2, 1, 0);
    Rng rng(17);
    int ones = 0;
    for (int k = 0; k < 10000; ++k)
      ones += simulate(config, covs, state, rng).y(1, 0, 0);
    CHECK(ones == 10000);
  }

  SECTION("fair predictor gives frequency one half") {
    auto state = helpers::zero_state(2, 1, 1, 0);
    EdgeCovariates covs(2, 1, 0);
    Rng rng(18);
    int ones = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) ones += simulate(config, covs, state, rng).y(1, 0, 0);
    const double se = std::sqrt(0.25 / n);
    CHECK(std::abs(ones / static_cast<double>(n) - 0.5) <= 3.0 * se);
  }

  SECTION("empirical frequency tracks an off-center pi") {
    const double target = 0.3;
    auto state = helpers::zero_state(2, 1, 1, 0);
    state.mu[0] = std::log(target / (1.0 - target));
    EdgeCovariates covs(2, 1, 0);
    Rng rng(19);
    int ones = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) ones += simulate(config, covs, state, rng).y(1, 0, 0);
    const double se = std::sqrt(target * (1.0 - target) / n);
    CHECK(std::abs(ones / static_cast<double>(n) - target) <= 3.0 * se);
  }

  SECTION("same seed reproduces the network") {
    auto cfg = helpers::tiny_config(4, 2, 1);
    EdgeCovariates covs(5, 4, 1);
    Rng rs(23);
    auto state = draw_state_from_prior(cfg, 5, 1, rs);
    Rng r1(5), r2(5);
    CHECK(simulate(cfg, covs, state, r1) == simulate(cfg, covs, state, r2));
  }
}

TEST_CASE("draw_state_from_prior") {
  SECTION("single time point baseline is standard normal") {
    auto config = helpers::tiny_config(1, 2, 0);
    Rng rng(31);
    const int n = 10000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = draw_state_from_prior(config, 3, 0, rng).mu[0];
    CHECK(std::abs(oracle::mean(draws)) <= 3.0 * oracle::se_mean(draws));
    CHECK(std::abs(oracle::variance(draws) - 1.0) <= 3.0 * oracle::se_variance(draws));
  }

  SECTION("shrinkage products match increments exactly") {
    auto config = helpers::tiny_config(3, 5, 0);
    Rng rng(37);
    const auto state = draw_state_from_prior(config, 4, 0, rng);
    for (int h = 0; h < 5; ++h) {
      REQUIRE(state.theta[h] > 0.0);
      double prod = 1.0;
      for (int l = 0; l <= h; ++l) prod *= state.theta[l];
      CHECK(state.tau[h] == prod);
    }
  }

  SECTION("omega is initialized at the PG mean of the predictor") {
    auto config = helpers::tiny_config(3, 2, 1);
    Rng rng(41);
    const auto state = draw_state_from_prior(config, 3, 1, rng);
    EdgeCovariates covs(3, 3, 1);  // zero covariates match the init rule
    for (int i = 1; i < 3; ++i)
      for (int j = 0; j < i; ++j)
        for (int t = 0; t < 3; ++t)
          CHECK(state.omega(edge_index(i, j), t) ==
                pg_mean(predictor(state, covs, i, j, t)));
  }
}
