#pragma once

#include <Eigen/Dense>

#include "dynnet/types.hpp"

namespace helpers {

// Zero state with unit shrinkage and omega at the PG(1, 0) mean.
inline dynnet::ModelState zero_state(int v, int n, int h, int p) {
  dynnet::ModelState s;
  s.mu = Eigen::VectorXd::Zero(n);
  s.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(v) * h, n);
  s.beta = Eigen::MatrixXd::Zero(p, n);
  s.theta = Eigen::VectorXd::Ones(h);
  s.recompute_tau();
  s.omega = Eigen::MatrixXd::Constant(dynnet::edge_count(v), n, 0.25);
  return s;
}

inline dynnet::ModelConfig tiny_config(int n_times, int h, int n_predictors,
                                       double kappa = 0.3) {
  dynnet::ModelConfig c;
  c.H = h;
  c.kappa_mu = kappa;
  c.kappa_x = kappa;
  c.kappa_beta.assign(n_predictors, kappa);
  c.n_iter = 10;
  c.n_burn = 5;
  c.time_grid = dynnet::ModelConfig::unit_grid(n_times);
  return c;
}

}  // namespace helpers
