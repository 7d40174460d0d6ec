#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynnet/common.hpp"
#include "dynnet/csv.hpp"
#include "dynnet/types.hpp"

namespace dynnet {

// Log-return table on a common period grid; NaN marks a missing value.
struct ReturnsTable {
  std::vector<std::string> periods;       // sorted
  std::vector<std::string> index_labels;  // sorted
  Eigen::MatrixXd values;                 // V x T

  std::size_t missing_count() const {
    std::size_t c = 0;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      for (Eigen::Index t = 0; t < values.cols(); ++t)
        if (std::isnan(values(i, t))) ++c;
    return c;
  }
};

// Cooperation / conflict event counts per unordered country pair, period
// and channel.  Pairs never mentioned in the input stay at zero.
struct EventCounts {
  static constexpr int kVerbal = 0;
  static constexpr int kMaterial = 1;
  static const std::array<std::string, 2>& channel_names() {
    static const std::array<std::string, 2> names{"verbal", "material"};
    return names;
  }

  std::vector<std::string> periods;    // sorted
  std::vector<std::string> countries;  // sorted
  // [channel][e * periods + m]
  std::array<std::vector<long long>, 2> cooperation;
  std::array<std::vector<long long>, 2> conflict;

  std::size_t pair_count() const { return edge_count(static_cast<int>(countries.size())); }

  long long net_count(int channel, std::size_t e, std::size_t m) const {
    return cooperation[channel][e * periods.size() + m] -
           conflict[channel][e * periods.size() + m];
  }
};

// ---------------------------------------------------------------------------
// File readers

inline ReturnsTable read_returns_csv(const std::string& path, bool from_prices = false) {
  const auto table = csv::read_table(path, {"period", "index", from_prices ? "price"
                                                                           : "log_return"});
  std::set<std::string> period_set;
  std::set<std::string> label_set;
  for (const auto& row : table.rows) {
    period_set.insert(row[0]);
    label_set.insert(row[1]);
  }
  ReturnsTable out;
  out.periods.assign(period_set.begin(), period_set.end());
  out.index_labels.assign(label_set.begin(), label_set.end());
  for (const auto& l : out.index_labels) csv::check_label(l, path);
  for (const auto& p : out.periods) csv::check_label(p, path);

  std::map<std::string, int> period_ix;
  std::map<std::string, int> label_ix;
  for (std::size_t k = 0; k < out.periods.size(); ++k) period_ix[out.periods[k]] = k;
  for (std::size_t k = 0; k < out.index_labels.size(); ++k) label_ix[out.index_labels[k]] = k;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.values = Eigen::MatrixXd::Constant(out.index_labels.size(), out.periods.size(), nan);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int i = label_ix[row[1]];
    const int t = period_ix[row[0]];
    double v;
    if (row[2] == "NA" || row[2].empty()) {
      v = nan;
    } else {
      v = csv::parse_double(row[2], path, table.line_numbers[r]);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << path << ":" << table.line_numbers[r] << ": non-finite value";
        throw DataError(msg.str());
      }
    }
    if (!std::isnan(out.values(i, t))) {
      std::ostringstream msg;
      msg << path << ":" << table.line_numbers[r] << ": duplicate entry for ("
          << row[0] << ", " << row[1] << ")";
      throw DataError(msg.str());
    }
    out.values(i, t) = v;
  }
  if (from_prices) {
    require(out.periods.size() >= 2, path + ": need at least 2 periods to form returns");
    const Eigen::Index v_count = out.values.rows();
    const Eigen::Index t_count = out.values.cols();
    Eigen::MatrixXd returns(v_count, t_count - 1);
    for (Eigen::Index i = 0; i < v_count; ++i) {
      for (Eigen::Index t = 1; t < t_count; ++t) {
        const double prev = out.values(i, t - 1);
        const double cur = out.values(i, t);
        if (std::isnan(prev) || std::isnan(cur)) {
          returns(i, t - 1) = nan;
          continue;
        }
        require(prev > 0 && cur > 0, path + ": prices must be positive to take log returns");
        returns(i, t - 1) = std::log(cur / prev);
      }
    }
    out.values = returns;
    out.periods.erase(out.periods.begin());
  }
  return out;
}

inline EventCounts read_events_csv(const std::string& path) {
  const auto table = csv::read_table(
      path, {"period", "country_a", "country_b", "channel", "cooperation", "conflict"});
  std::set<std::string> period_set;
  std::set<std::string> country_set;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[1] == row[2]) {
      std::ostringstream msg;
      msg << path << ":" << table.line_numbers[r] << ": self pair '" << row[1] << "'";
      throw DataError(msg.str());
    }
    period_set.insert(row[0]);
    country_set.insert(row[1]);
    country_set.insert(row[2]);
  }
  EventCounts out;
  out.periods.assign(period_set.begin(), period_set.end());
  out.countries.assign(country_set.begin(), country_set.end());
  for (const auto& l : out.countries) csv::check_label(l, path);

  std::map<std::string, int> period_ix;
  std::map<std::string, int> country_ix;
  for (std::size_t k = 0; k < out.periods.size(); ++k) period_ix[out.periods[k]] = k;
  for (std::size_t k = 0; k < out.countries.size(); ++k) country_ix[out.countries[k]] = k;

  const std::size_t cells = out.pair_count() * out.periods.size();
  for (int c = 0; c < 2; ++c) {
    out.cooperation[c].assign(cells, 0);
    out.conflict[c].assign(cells, 0);
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    int channel;
    if (row[3] == "verbal") {
      channel = EventCounts::kVerbal;
    } else if (row[3] == "material") {
      channel = EventCounts::kMaterial;
    } else {
      std::ostringstream msg;
      msg << path << ":" << table.line_numbers[r] << ": unknown channel '" << row[3]
          << "' (expected verbal or material)";
      throw DataError(msg.str());
    }
    const std::size_t e = edge_index(country_ix[row[1]], country_ix[row[2]]);
    const std::size_t cell = e * out.periods.size() + period_ix[row[0]];
    out.cooperation[channel][cell] += csv::parse_count(row[4], path, table.line_numbers[r]);
    out.conflict[channel][cell] += csv::parse_count(row[5], path, table.line_numbers[r]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Response network

enum class ZeroReturnRule { positive, missing };

// Co-movement response: y = 1 where both returns share a sign, 0 where
// they differ, missing where either return is missing.  Exact zeros
// count as positive under the default rule.
struct NetworkData {
  DynamicNetwork net;
  std::vector<std::string> periods;
};

inline NetworkData build_comovement(const ReturnsTable& returns,
                                    ZeroReturnRule zero_rule = ZeroReturnRule::positive) {
  const int v_count = static_cast<int>(returns.index_labels.size());
  const int t_count = static_cast<int>(returns.periods.size());
  require(v_count >= 2, "build_comovement: need at least 2 indices");
  require(t_count >= 1, "build_comovement: need at least 1 period");

  DynamicNetwork net(v_count, t_count, returns.index_labels);
  for (int i = 1; i < v_count; ++i) {
    for (int j = 0; j < i; ++j) {
      for (int t = 0; t < t_count; ++t) {
        const double ri = returns.values(i, t);
        const double rj = returns.values(j, t);
        if (std::isnan(ri) || std::isnan(rj)) continue;  // stays missing
        if (zero_rule == ZeroReturnRule::missing && (ri == 0.0 || rj == 0.0)) continue;
        const int si = ri >= 0.0 ? 1 : -1;  // sign(0) := +1
        const int sj = rj >= 0.0 ? 1 : -1;
        net.set(i, j, t, si * sj > 0);
      }
    }
  }
  return {std::move(net), returns.periods};
}

// ---------------------------------------------------------------------------
// Cooperation covariates

// Standardized first differences e_t = (c_t - c_{t-1}) / sd of one
// channel's net count series, one row per pair, columns on periods[1..].
// Rows of pairs whose differences have zero standard deviation are NaN.
inline Eigen::MatrixXd standardized_differences(const EventCounts& events, int channel) {
  const std::size_t n_pairs = events.pair_count();
  const std::size_t m_count = events.periods.size();
  require(m_count >= 2, "standardized_differences: need at least 2 periods");
  const std::size_t d_count = m_count - 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Eigen::MatrixXd e = Eigen::MatrixXd::Constant(n_pairs, d_count, nan);
  for (std::size_t pr = 0; pr < n_pairs; ++pr) {
    Eigen::VectorXd d(d_count);
    for (std::size_t t = 1; t < m_count; ++t)
      d[t - 1] = static_cast<double>(events.net_count(channel, pr, t) -
                                     events.net_count(channel, pr, t - 1));
    if (d_count < 2) {
      // A single difference has no sample standard deviation.
      continue;
    }
    const double mean = d.mean();
    const double ss = (d.array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(d_count - 1));
    if (sd == 0.0) continue;
    for (std::size_t t = 0; t < d_count; ++t)
      e(static_cast<Eigen::Index>(pr), static_cast<Eigen::Index>(t)) = d[t] / sd;
  }
  return e;
}

// Binary indicator z = 1 where a pair's standardized increment exceeds the
// cross-pair average at that time.  Degenerate (sd = 0) pairs stay 0 and do
// not enter the average.
struct BinaryCovariate {
  std::vector<std::string> countries;  // sorted, from the event table
  std::vector<std::string> periods;    // event periods from the second on
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> z;  // pairs x periods
};

inline BinaryCovariate build_covariate(const EventCounts& events, int channel) {
  require(channel == EventCounts::kVerbal || channel == EventCounts::kMaterial,
          "build_covariate: unknown channel");
  const Eigen::MatrixXd e = standardized_differences(events, channel);
  const Eigen::Index n_pairs = e.rows();
  const Eigen::Index d_count = e.cols();

  BinaryCovariate out;
  out.countries = events.countries;
  out.periods.assign(events.periods.begin() + 1, events.periods.end());
  out.z.setZero(n_pairs, d_count);
  for (Eigen::Index t = 0; t < d_count; ++t) {
    double acc = 0.0;
    Eigen::Index defined = 0;
    for (Eigen::Index pr = 0; pr < n_pairs; ++pr) {
      if (std::isnan(e(pr, t))) continue;
      acc += e(pr, t);
      ++defined;
    }
    if (defined == 0) continue;
    const double threshold = acc / static_cast<double>(defined);
    for (Eigen::Index pr = 0; pr < n_pairs; ++pr)
      if (!std::isnan(e(pr, t)) && e(pr, t) > threshold) out.z(pr, t) = 1;
  }
  return out;
}

// Restrict an event table to the given countries (analysis universe).
inline EventCounts filter_events(const EventCounts& events,
                                 const std::vector<std::string>& keep) {
  std::set<std::string> keep_set(keep.begin(), keep.end());
  EventCounts out;
  out.periods = events.periods;
  for (const auto& c : events.countries)
    if (keep_set.count(c)) out.countries.push_back(c);
  const std::size_t cells = out.pair_count() * out.periods.size();
  for (int c = 0; c < 2; ++c) {
    out.cooperation[c].assign(cells, 0);
    out.conflict[c].assign(cells, 0);
  }
  std::map<std::string, int> new_ix;
  for (std::size_t k = 0; k < out.countries.size(); ++k) new_ix[out.countries[k]] = k;
  const std::size_t m_count = events.periods.size();
  for (int i = 1; i < static_cast<int>(events.countries.size()); ++i) {
    for (int j = 0; j < i; ++j) {
      auto it_i = new_ix.find(events.countries[i]);
      auto it_j = new_ix.find(events.countries[j]);
      if (it_i == new_ix.end() || it_j == new_ix.end()) continue;
      const std::size_t e_old = edge_index(i, j);
      const std::size_t e_new = edge_index(it_i->second, it_j->second);
      for (std::size_t m = 0; m < m_count; ++m) {
        for (int c = 0; c < 2; ++c) {
          out.cooperation[c][e_new * m_count + m] = events.cooperation[c][e_old * m_count + m];
          out.conflict[c][e_new * m_count + m] = events.conflict[c][e_old * m_count + m];
        }
      }
    }
  }
  return out;
}

struct CovariateData {
  EdgeCovariates covs;
  std::vector<std::string> node_labels;
  std::vector<std::string> periods;
};

// Builds the two-channel binary covariates on the network's node set and
// period grid.  The covariate series lives on event periods from the
// second on; network periods with no preceding count difference get z = 0.
// Pairs without event coverage get z = 0 throughout.
inline CovariateData assemble_covariates(const EventCounts& events,
                                         const std::vector<std::string>& node_labels,
                                         const std::vector<std::string>& net_periods) {
  const int v_count = static_cast<int>(node_labels.size());
  EdgeCovariates covs(v_count, static_cast<int>(net_periods.size()),
                      std::vector<std::string>{"verbal", "material"});
  if (events.periods.size() < 2) return {std::move(covs), net_periods};

  const EventCounts local = filter_events(events, node_labels);
  if (local.countries.size() < 2) return {std::move(covs), net_periods};

  std::map<std::string, int> country_ix;
  for (std::size_t k = 0; k < local.countries.size(); ++k) country_ix[local.countries[k]] = k;
  std::map<std::string, int> period_ix;
  for (std::size_t k = 0; k < net_periods.size(); ++k) period_ix[net_periods[k]] = k;

  for (int channel = 0; channel < 2; ++channel) {
    const BinaryCovariate cov = build_covariate(local, channel);
    for (std::size_t m = 0; m < cov.periods.size(); ++m) {
      const auto it_t = period_ix.find(cov.periods[m]);
      if (it_t == period_ix.end()) continue;
      for (int i = 1; i < v_count; ++i) {
        const auto it_i = country_ix.find(node_labels[i]);
        if (it_i == country_ix.end()) continue;
        for (int j = 0; j < i; ++j) {
          const auto it_j = country_ix.find(node_labels[j]);
          if (it_j == country_ix.end()) continue;
          const std::size_t e_local = edge_index(it_i->second, it_j->second);
          covs.set(i, j, it_t->second, channel,
                   static_cast<double>(cov.z(static_cast<Eigen::Index>(e_local),
                                             static_cast<Eigen::Index>(m))));
        }
      }
    }
  }
  return {std::move(covs), node_labels, net_periods};
}

// ---------------------------------------------------------------------------
// Alignment

struct HoldoutTruth {
  int time_index = -1;                  // index into the aligned grid
  std::vector<std::int8_t> y;           // per edge, 0/1/missing
};

struct AlignedData {
  DynamicNetwork net;
  EdgeCovariates covs;
  std::vector<std::string> periods;
  std::optional<HoldoutTruth> holdout;
};

// Intersects node sets and period grids of the response and covariate
// tables; optionally masks the last aligned time point, keeping its truth
// for predictive evaluation.
inline AlignedData align(const NetworkData& network, const CovariateData& covariates,
                         bool holdout_last) {
  // Common node labels, kept sorted.
  std::set<std::string> cov_label_set(covariates.node_labels.begin(),
                                      covariates.node_labels.end());
  std::vector<std::string> labels;
  for (const auto& l : network.net.node_labels())
    if (cov_label_set.count(l)) labels.push_back(l);
  std::sort(labels.begin(), labels.end());
  require(labels.size() >= 2,
          "align: node sets of network and covariates share fewer than 2 nodes");

  std::set<std::string> net_periods(network.periods.begin(), network.periods.end());
  std::vector<std::string> common;
  for (const auto& p : covariates.periods)
    if (net_periods.count(p)) common.push_back(p);
  std::sort(common.begin(), common.end());
  require(!common.empty(), "align: period grids do not intersect");

  std::map<std::string, int> net_node_ix;
  for (std::size_t k = 0; k < network.net.node_labels().size(); ++k)
    net_node_ix[network.net.node_labels()[k]] = k;
  std::map<std::string, int> cov_node_ix;
  for (std::size_t k = 0; k < covariates.node_labels.size(); ++k)
    cov_node_ix[covariates.node_labels[k]] = k;
  std::map<std::string, int> net_period_ix;
  for (std::size_t k = 0; k < network.periods.size(); ++k)
    net_period_ix[network.periods[k]] = k;
  std::map<std::string, int> cov_period_ix;
  for (std::size_t k = 0; k < covariates.periods.size(); ++k)
    cov_period_ix[covariates.periods[k]] = k;

  const int v_count = static_cast<int>(labels.size());
  const int t_count = static_cast<int>(common.size());
  DynamicNetwork net(v_count, t_count, labels);
  EdgeCovariates covs(v_count, t_count, covariates.covs.predictor_labels());
  for (int t = 0; t < t_count; ++t) {
    const int ts = net_period_ix[common[t]];
    const int tc = cov_period_ix[common[t]];
    for (int i = 1; i < v_count; ++i) {
      const int ni = net_node_ix[labels[i]];
      const int ci = cov_node_ix[labels[i]];
      for (int j = 0; j < i; ++j) {
        const int nj = net_node_ix[labels[j]];
        const int cj = cov_node_ix[labels[j]];
        net.set_at(edge_index(i, j), t, network.net.y(ni, nj, ts));
        for (int p = 0; p < covs.predictors(); ++p)
          covs.set(i, j, t, p, covariates.covs.z(ci, cj, tc, p));
      }
    }
  }

  AlignedData out{std::move(net), std::move(covs), std::move(common), std::nullopt};
  if (holdout_last) {
    HoldoutTruth truth;
    truth.time_index = t_count - 1;
    truth.y.resize(out.net.edges());
    for (std::size_t e = 0; e < out.net.edges(); ++e) {
      truth.y[e] = out.net.y_at(e, truth.time_index);
      const auto [i, j] = edge_pair(e);
      out.net.set_missing(i, j, truth.time_index);
    }
    out.holdout = std::move(truth);
  }
  return out;
}

}  // namespace dynnet
