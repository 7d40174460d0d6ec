#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dynnet/kernel.hpp"
#include "oracles.hpp"

using namespace dynnet;

namespace {
Eigen::VectorXd make_grid(std::initializer_list<double> v) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) g[k++] = x;
  return g;
}
}  // namespace

TEST_CASE("kernel entries match the squared-exponential form") {
  const auto k = build_kernel(make_grid({1, 3, 6, 11}), 0.02);
  for (int a = 0; a < k.size(); ++a) CHECK(k.cov(a, a) == 1.0);
  // |t - t'| = 5 at kappa 0.02: exp(-0.5)
  CHECK(k.cov(3, 0) == Catch::Approx(0.606531).margin(1e-6));
  CHECK(k.cov(0, 3) == k.cov(3, 0));

  const auto k2 = build_kernel(make_grid({1, 2}), 0.01);
  CHECK(k2.cov(1, 0) == Catch::Approx(0.990050).margin(1e-6));
}

TEST_CASE("kernel depends only on pairwise distances") {
  const auto a = build_kernel(make_grid({1, 2, 4}), 0.05);
  const auto b = build_kernel(make_grid({101, 102, 104}), 0.05);
  CHECK((a.cov - b.cov).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky factor reconstructs the regularized kernel") {
  Eigen::VectorXd grid(40);
  for (int t = 0; t < 40; ++t) grid[t] = t + 1.0;
  const auto k = build_kernel(grid, 0.02);
  Eigen::MatrixXd reg = k.cov;
  reg.diagonal().array() += k.jitter_used;
  const double rel = (k.chol * k.chol.transpose() - reg).norm() / reg.norm();
  CHECK(rel <= 1e-8);
}

TEST_CASE("kernel preconditions") {
  CHECK_THROWS_AS(build_kernel(make_grid({1, 1, 2}), 0.02), DataError);
  CHECK_THROWS_AS(build_kernel(make_grid({2, 1}), 0.02), DataError);
  CHECK_THROWS_AS(build_kernel(make_grid({1, 2}), 0.0), DataError);
  CHECK_THROWS_AS(build_kernel(make_grid({1, 2}), 0.02, -1.0), DataError);
}

TEST_CASE("factorization succeeds on long unit grids at the default scales") {
  Eigen::VectorXd grid(200);
  for (int t = 0; t < 200; ++t) grid[t] = t + 1.0;
  for (double kappa : {0.01, 0.02}) {
    const auto k = build_kernel(grid, kappa);
    CHECK(k.jitter_used <= 1e-4);
  }
}

TEST_CASE("gp_draw moments and determinism") {
  const auto k = build_kernel(make_grid({1, 2, 3}), 0.5);

  SECTION("same seed gives the identical vector") {
    Rng r1(42), r2(42);
    const Eigen::VectorXd d1 = gp_draw(k, 2.0, r1);
    const Eigen::VectorXd d2 = gp_draw(k, 2.0, r2);
    CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("single-point kernel is a scalar normal with sd sqrt(scale)") {
    const auto k1 = build_kernel(make_grid({5}), 0.02, 0.0);
    Rng rng(7);
    std::vector<double> draws(100000);
    for (auto& d : draws) d = gp_draw(k1, 4.0, rng)[0];
    CHECK(std::abs(oracle::mean(draws)) <= 3.0 * oracle::se_mean(draws));
    CHECK(std::abs(oracle::variance(draws) - 4.0) <= 3.0 * oracle::se_variance(draws));
  }

  SECTION("first coordinate variance matches scale") {
    Rng rng(11);
    const double scale = 2.5;
    std::vector<double> draws(100000);
    for (auto& d : draws) d = gp_draw(k, scale, rng)[0];
    const double expected = scale * (1.0 + k.jitter_used);
    CHECK(std::abs(oracle::variance(draws) - expected) <= 3.0 * oracle::se_variance(draws));
  }

  SECTION("non-positive scale is rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(gp_draw(k, 0.0, rng), DataError);
    CHECK_THROWS_AS(gp_draw(k, -1.0, rng), DataError);
  }
}

TEST_CASE("apply_precision inverts the regularized kernel") {
  Eigen::VectorXd grid(12);
  for (int t = 0; t < 12; ++t) grid[t] = t + 1.0;
  const auto k = build_kernel(grid, 0.1);

  SECTION("construct-then-invert recovers the input") {
    Eigen::VectorXd u(12);
    for (int t = 0; t < 12; ++t) u[t] = std::sin(t + 1.0);
    // v built from the exact matrix the solver inverts
    const Eigen::VectorXd v =
        k.chol.triangularView<Eigen::Lower>() * (k.chol.transpose() * u);
    const Eigen::VectorXd x = apply_precision(k, v);
    CHECK((x - u).norm() / u.norm() <= 1e-6);
  }

  SECTION("near-identity kernel acts as identity") {
    const auto kid = build_kernel(make_grid({1, 2, 3}), 1e6);
    Eigen::VectorXd v = make_grid({1.0, -2.0, 0.5});
    const Eigen::VectorXd x = apply_precision(kid, v);
    CHECK((x - v).norm() <= 1e-5 * v.norm());
  }

  SECTION("zero maps to zero") {
    const Eigen::VectorXd x = apply_precision(k, Eigen::VectorXd::Zero(12));
    CHECK(x.norm() == 0.0);
  }

  SECTION("length mismatch is rejected") {
    CHECK_THROWS_AS(apply_precision(k, Eigen::VectorXd::Zero(5)), DataError);
  }
}

TEST_CASE("precision_matrix agrees with apply_precision") {
  Eigen::VectorXd grid(8);
  for (int t = 0; t < 8; ++t) grid[t] = 2.0 * t + 1.0;
  const auto k = build_kernel(grid, 0.05);
  const Eigen::MatrixXd prec = precision_matrix(k);
  Eigen::VectorXd v(8);
  for (int t = 0; t < 8; ++t) v[t] = std::cos(t * 0.7);
  CHECK((prec * v - apply_precision(k, v)).norm() <= 1e-10);
  CHECK((prec - prec.transpose()).cwiseAbs().maxCoeff() == 0.0);
}
