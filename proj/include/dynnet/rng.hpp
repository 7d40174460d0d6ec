#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "dynnet/common.hpp"

namespace dynnet {

// Random stream owned by one sampler execution.  Distributions are
// constructed per call so the full stream state is the engine state,
// which keeps save/load round trips exact.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double normal() {
    return std::normal_distribution<double>(0.0, 1.0)(engine_);
  }

  // Exponential with unit rate.
  double exponential() {
    return std::exponential_distribution<double>(1.0)(engine_);
  }

  // Gamma(shape, rate) with density proportional to x^(shape-1) exp(-rate x).
  double gamma(double shape, double rate) {
    require(shape > 0 && rate > 0, "Rng::gamma: shape and rate must be positive");
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (is.fail()) throw IoError("Rng::load_state: malformed engine state");
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dynnet
