#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dynnet/common.hpp"
#include "dynnet/types.hpp"

namespace dynnet {

struct HpdInterval {
  double lower = 0.0;
  double upper = 0.0;
  // Set when the 25 shortest candidate windows disagree in location by
  // more than two window widths; the shortest-interval summary is then
  // suspect (possible multimodality).
  bool multimodal = false;
};

// Shortest contiguous interval among the sorted samples containing
// ceil(level * n) of them; ties broken by the smallest lower endpoint.
inline HpdInterval hpd_interval(std::vector<double> samples, double level) {
  const std::size_t n = samples.size();
  require(n >= 20, "hpd_interval: need at least 20 samples");
  require(level > 0.0 && level < 1.0, "hpd_interval: level must be in (0, 1)");
  std::sort(samples.begin(), samples.end());

  std::size_t m = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  m = std::min(std::max<std::size_t>(m, 1), n);
  const std::size_t n_windows = n - m + 1;

  std::size_t best = 0;
  double best_width = samples[m - 1] - samples[0];
  for (std::size_t i = 1; i < n_windows; ++i) {
    const double w = samples[i + m - 1] - samples[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }

  HpdInterval out{samples[best], samples[best + m - 1], false};
  if (best_width > 0.0 && n_windows > 1) {
    std::vector<std::size_t> order(n_windows);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t k = std::min<std::size_t>(25, n_windows);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return samples[a + m - 1] - samples[a] < samples[b + m - 1] - samples[b];
                      });
    for (std::size_t r = 0; r < k; ++r) {
      if (std::abs(samples[order[r]] - samples[best]) > 2.0 * best_width) {
        out.multimodal = true;
        break;
      }
    }
  }
  return out;
}

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;  // zero-variance chain
};

// Effective sample size n / (1 + 2 sum rho_k) with the autocorrelation sum
// truncated by Geyer's initial monotone positive sequence; clipped to (0, n].
inline EssResult effective_sample_size(const std::vector<double>& chain) {
  const std::size_t n = chain.size();
  require(n >= 100, "effective_sample_size: need at least 100 samples");

  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / n;
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = chain[t] - mean;
  double c0 = 0.0;
  for (double v : centered) c0 += v * v;
  c0 /= n;
  if (c0 <= 0.0) return {static_cast<double>(n), true};

  auto rho = [&](std::size_t k) {
    double c = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) c += centered[t] * centered[t + k];
    return c / (n * c0);
  };

  // Paired sums Gamma_m = rho_{2m} + rho_{2m+1}: keep while positive,
  // then enforce monotone non-increase.
  double tau = 0.0;
  double prev_gamma = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double gamma = rho(2 * m) + rho(2 * m + 1);
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev_gamma);
    tau += 2.0 * gamma;
    prev_gamma = gamma;
  }
  tau -= 1.0;  // the 2*Gamma sum counts rho_0 = 1 twice

  double ess = (tau <= 0.0) ? static_cast<double>(n) : static_cast<double>(n) / tau;
  ess = std::min(ess, static_cast<double>(n));
  return {ess, false};
}

// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked
// correctly, ties counted one half.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  require(scores.size() == labels.size(), "auc: scores / labels length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks over tied score groups.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    require(labels[k] == 0 || labels[k] == 1, "auc: labels must be 0/1");
    if (labels[k] == 1) {
      rank_sum_pos += rank[k];
      ++n_pos;
    } else {
      ++n_neg;
    }
  }
  require(n_pos > 0 && n_neg > 0, "auc: need both classes present");
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct EdgeWeight {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

// Per-edge mean of pi over retained draws and the inclusive time window
// [t_lo, t_hi]; sorted by (i, j).
inline std::vector<EdgeWeight> window_average_network(const PosteriorSamples& samples,
                                                      int t_lo, int t_hi) {
  require(samples.n_retained > 0, "window_average_network: no retained draws");
  require(t_lo >= 0 && t_hi < samples.times() && t_lo <= t_hi,
          "window_average_network: window outside the time grid");
  const int n_times = t_hi - t_lo + 1;
  std::vector<EdgeWeight> out;
  out.reserve(samples.edges());
  std::size_t e = 0;
  for (int i = 1; i < samples.V; ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      double acc = 0.0;
      for (int r = 0; r < samples.n_retained; ++r)
        for (int t = t_lo; t <= t_hi; ++t) acc += samples.pi_at(r, e, t);
      out.push_back({i, j, acc / (static_cast<double>(samples.n_retained) * n_times)});
    }
  }
  return out;
}

// Per-time posterior mean and HPD band for one scalar target curve.
struct SummarySeries {
  std::string label;
  std::vector<double> mean;
  std::vector<double> hpd_lo;
  std::vector<double> hpd_hi;
};

namespace diag_detail {

template <typename ChainAt>
SummarySeries summarize_curve(const std::string& label, int n_times, int n_draws,
                              double level, ChainAt&& chain_at) {
  SummarySeries s;
  s.label = label;
  s.mean.resize(n_times);
  s.hpd_lo.resize(n_times);
  s.hpd_hi.resize(n_times);
  for (int t = 0; t < n_times; ++t) {
    std::vector<double> chain(n_draws);
    double acc = 0.0;
    for (int r = 0; r < n_draws; ++r) {
      chain[r] = chain_at(r, t);
      acc += chain[r];
    }
    s.mean[t] = acc / n_draws;
    const HpdInterval h = hpd_interval(std::move(chain), level);
    s.hpd_lo[t] = h.lower;
    s.hpd_hi[t] = h.upper;
  }
  return s;
}

}  // namespace diag_detail

inline SummarySeries summarize_mu(const PosteriorSamples& samples, double level = 0.95) {
  return diag_detail::summarize_curve(
      "mu", samples.times(), samples.n_retained, level,
      [&](int r, int t) { return samples.mu_draws(r, t); });
}

inline SummarySeries summarize_beta(const PosteriorSamples& samples, int p,
                                    double level = 0.95) {
  require(p >= 0 && p < samples.P, "summarize_beta: predictor index out of range");
  const std::string label = "beta_" + samples.predictor_labels[p];
  return diag_detail::summarize_curve(
      label, samples.times(), samples.n_retained, level,
      [&](int r, int t) { return samples.beta_at(r, p, t); });
}

inline SummarySeries summarize_pi(const PosteriorSamples& samples, int i, int j,
                                  double level = 0.95) {
  require(i != j && i >= 0 && i < samples.V && j >= 0 && j < samples.V,
          "summarize_pi: bad edge");
  const std::size_t e = edge_index(i, j);
  const std::string label =
      "pi_" + samples.node_labels[std::max(i, j)] + ":" + samples.node_labels[std::min(i, j)];
  return diag_detail::summarize_curve(
      label, samples.times(), samples.n_retained, level,
      [&](int r, int t) { return samples.pi_at(r, e, t); });
}

}  // namespace dynnet
