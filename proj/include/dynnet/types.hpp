#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dynnet/common.hpp"

namespace dynnet {

// Binary symmetric adjacency sequence over V nodes and N time points.
// Only the lower triangle (i > j) is stored; the (j, i) accessor resolves
// to the same entry.  Entries are 0, 1, or missing.
class DynamicNetwork {
 public:
  static constexpr std::int8_t kMissing = -1;

  DynamicNetwork(int n_nodes, int n_times, std::vector<std::string> labels)
      : v_(n_nodes), n_(n_times), labels_(std::move(labels)),
        y_(edge_count(n_nodes) * n_times, kMissing) {
    require(v_ >= 2, "DynamicNetwork: need at least 2 nodes");
    require(n_ >= 1, "DynamicNetwork: need at least 1 time point");
    require(labels_.size() == static_cast<std::size_t>(v_),
            "DynamicNetwork: label count does not match node count");
  }

  DynamicNetwork(int n_nodes, int n_times)
      : DynamicNetwork(n_nodes, n_times, default_labels(n_nodes)) {}

  int nodes() const { return v_; }
  int times() const { return n_; }
  std::size_t edges() const { return edge_count(v_); }
  const std::vector<std::string>& node_labels() const { return labels_; }

  // Returns 0, 1, or kMissing.
  std::int8_t y(int i, int j, int t) const { return y_[offset(i, j, t)]; }
  std::int8_t y_at(std::size_t e, int t) const { return y_[e * n_ + t]; }
  bool observed(int i, int j, int t) const { return y(i, j, t) != kMissing; }

  void set(int i, int j, int t, bool value) {
    y_[offset(i, j, t)] = value ? 1 : 0;
  }
  void set_missing(int i, int j, int t) { y_[offset(i, j, t)] = kMissing; }
  void set_at(std::size_t e, int t, std::int8_t value) {
    require(value == 0 || value == 1 || value == kMissing, "DynamicNetwork: bad value");
    y_[e * n_ + t] = value;
  }

  std::size_t observed_count() const {
    std::size_t c = 0;
    for (auto v : y_) c += (v != kMissing);
    return c;
  }
  double missing_rate() const {
    return 1.0 - static_cast<double>(observed_count()) / static_cast<double>(y_.size());
  }

  bool operator==(const DynamicNetwork& o) const = default;

 private:
  // Zero-padded so lexicographic order matches construction order.
  static std::vector<std::string> default_labels(int v) {
    const std::size_t width = std::to_string(v).size();
    std::vector<std::string> out;
    out.reserve(v);
    for (int i = 0; i < v; ++i) {
      std::string num = std::to_string(i + 1);
      out.push_back("v" + std::string(width - num.size(), '0') + num);
    }
    return out;
  }

  std::size_t offset(int i, int j, int t) const {
    require(i != j, "DynamicNetwork: self edges are undefined");
    require(i >= 0 && i < v_ && j >= 0 && j < v_, "DynamicNetwork: node index out of range");
    require(t >= 0 && t < n_, "DynamicNetwork: time index out of range");
    return edge_index(i, j) * n_ + t;
  }

  int v_ = 0;
  int n_ = 0;
  std::vector<std::string> labels_;
  std::vector<std::int8_t> y_;
};

// P-dimensional real predictor vector per unordered node pair per time point.
class EdgeCovariates {
 public:
  EdgeCovariates(int n_nodes, int n_times, std::vector<std::string> predictor_labels)
      : v_(n_nodes), n_(n_times), p_(static_cast<int>(predictor_labels.size())),
        labels_(std::move(predictor_labels)),
        z_(edge_count(n_nodes) * n_times * labels_.size(), 0.0) {
    require(v_ >= 2, "EdgeCovariates: need at least 2 nodes");
    require(n_ >= 1, "EdgeCovariates: need at least 1 time point");
  }

  EdgeCovariates(int n_nodes, int n_times, int n_predictors)
      : EdgeCovariates(n_nodes, n_times, default_labels(n_predictors)) {}

  int nodes() const { return v_; }
  int times() const { return n_; }
  int predictors() const { return p_; }
  const std::vector<std::string>& predictor_labels() const { return labels_; }

  double z(int i, int j, int t, int p) const { return z_[offset(i, j, t, p)]; }
  double z_at(std::size_t e, int t, int p) const {
    return z_[(e * n_ + t) * p_ + p];
  }
  void set(int i, int j, int t, int p, double value) {
    require(std::isfinite(value), "EdgeCovariates: non-finite value");
    z_[offset(i, j, t, p)] = value;
  }

  bool operator==(const EdgeCovariates& o) const = default;

 private:
  static std::vector<std::string> default_labels(int p) {
    std::vector<std::string> out;
    out.reserve(p);
    for (int q = 0; q < p; ++q) out.push_back("z" + std::to_string(q + 1));
    return out;
  }

  std::size_t offset(int i, int j, int t, int p) const {
    require(i != j, "EdgeCovariates: self edges are undefined");
    require(i >= 0 && i < v_ && j >= 0 && j < v_, "EdgeCovariates: node index out of range");
    require(t >= 0 && t < n_, "EdgeCovariates: time index out of range");
    require(p >= 0 && p < p_, "EdgeCovariates: predictor index out of range");
    return (edge_index(i, j) * n_ + t) * p_ + p;
  }

  int v_ = 0;
  int n_ = 0;
  int p_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> z_;
};

// Run settings: latent truncation, kernel length scales, shrinkage shapes,
// iteration counts, and the observation time grid.
struct ModelConfig {
  int H = 15;
  double kappa_mu = 0.02;
  double kappa_x = 0.01;
  std::vector<double> kappa_beta;  // one per predictor
  double a1 = 2.0;
  double a2 = 2.0;
  int n_iter = 5000;
  int n_burn = 1000;
  double jitter = 1e-6;
  std::uint64_t seed = 0;
  std::vector<double> time_grid;

  int times() const { return static_cast<int>(time_grid.size()); }

  Eigen::VectorXd grid_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(time_grid.data(), time_grid.size());
  }

  void validate() const {
    require(H >= 1, "ModelConfig: H must be >= 1");
    require(n_iter > n_burn && n_burn >= 0, "ModelConfig: need n_iter > n_burn >= 0");
    require(kappa_mu > 0 && kappa_x > 0, "ModelConfig: kernel length scales must be positive");
    for (double k : kappa_beta) require(k > 0, "ModelConfig: kappa_beta entries must be positive");
    require(a1 > 0 && a2 > 0, "ModelConfig: shrinkage shapes must be positive");
    require(jitter >= 0, "ModelConfig: jitter must be nonnegative");
    require(!time_grid.empty(), "ModelConfig: empty time grid");
    for (std::size_t a = 1; a < time_grid.size(); ++a)
      require(time_grid[a] > time_grid[a - 1],
              "ModelConfig: time grid must be strictly increasing");
  }

  // Unit-spaced grid 1..N, the default for quarterly applications.
  static std::vector<double> unit_grid(int n) {
    std::vector<double> g(n);
    for (int t = 0; t < n; ++t) g[t] = t + 1.0;
    return g;
  }
};

// Current sampler state.  X is stored as a (V*H) x N matrix whose row
// (i*H + h) is the curve of coordinate h of unit i over time; omega is
// one positive auxiliary per stored edge and time.
struct ModelState {
  Eigen::VectorXd mu;      // N
  Eigen::MatrixXd X;       // (V*H) x N
  Eigen::MatrixXd beta;    // P x N
  Eigen::VectorXd theta;   // H, gamma increments
  Eigen::VectorXd tau;     // H, cumulative products of theta
  Eigen::MatrixXd omega;   // E x N

  int times() const { return static_cast<int>(mu.size()); }
  int latent_dim() const { return static_cast<int>(theta.size()); }
  int predictors() const { return static_cast<int>(beta.rows()); }
  int nodes() const {
    return latent_dim() == 0 ? 0 : static_cast<int>(X.rows()) / latent_dim();
  }

  double x(int i, int h, int t) const { return X(i * latent_dim() + h, t); }
  double& x(int i, int h, int t) { return X(i * latent_dim() + h, t); }

  void recompute_tau() {
    tau.resize(theta.size());
    double prod = 1.0;
    for (int h = 0; h < theta.size(); ++h) {
      prod *= theta[h];
      tau[h] = prod;
    }
  }

  void check_dims(int n_nodes, int n_times, int n_predictors, int latent) const {
    require(mu.size() == n_times, "ModelState: mu length mismatch");
    require(X.rows() == static_cast<Eigen::Index>(n_nodes) * latent && X.cols() == n_times,
            "ModelState: X dimension mismatch");
    require(beta.rows() == n_predictors && (n_predictors == 0 || beta.cols() == n_times),
            "ModelState: beta dimension mismatch");
    require(theta.size() == latent && tau.size() == latent,
            "ModelState: shrinkage dimension mismatch");
    require(omega.rows() == static_cast<Eigen::Index>(edge_count(n_nodes)) &&
                omega.cols() == n_times,
            "ModelState: omega dimension mismatch");
  }
};

// Post-burn-in draws.  Link probabilities are kept in single precision to
// bound memory; curve and shrinkage draws stay double.
struct PosteriorSamples {
  ModelConfig config;
  int V = 0;
  int P = 0;
  int thin = 1;
  std::vector<std::string> node_labels;
  std::vector<std::string> predictor_labels;
  std::vector<std::string> period_labels;  // optional; empty means use time_grid

  int n_retained = 0;
  Eigen::MatrixXd mu_draws;          // R x N
  Eigen::MatrixXd beta_draws;        // R x (P*N), predictor-major blocks
  Eigen::MatrixXd tau_draws;         // R x H
  Eigen::MatrixXd factor_energy;     // R x H, sum_{i,t} x_{ih}(t)^2 per draw
  std::vector<float> pi_draws;       // R * E * N, draw-major then edge then time
  std::vector<double> loglik;        // one per sweep, all n_iter sweeps

  // Present when the last time point was held out: truth per edge at t_hold.
  bool has_holdout = false;
  int holdout_time = -1;
  std::vector<std::int8_t> holdout_truth;  // E entries, 0/1/missing

  int times() const { return config.times(); }
  std::size_t edges() const { return edge_count(V); }

  double pi_at(int r, std::size_t e, int t) const {
    return pi_draws[(static_cast<std::size_t>(r) * edges() + e) * times() + t];
  }

  std::vector<double> pi_chain(std::size_t e, int t) const {
    std::vector<double> out(n_retained);
    for (int r = 0; r < n_retained; ++r) out[r] = pi_at(r, e, t);
    return out;
  }

  double pi_mean(std::size_t e, int t) const {
    double s = 0;
    for (int r = 0; r < n_retained; ++r) s += pi_at(r, e, t);
    return s / n_retained;
  }

  double beta_at(int r, int p, int t) const { return beta_draws(r, p * times() + t); }
};

}  // namespace dynnet
