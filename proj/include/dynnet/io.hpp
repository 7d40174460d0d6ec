#pragma once

// Interchange tables, the posterior artifact, sampler checkpoints and run
// manifests.  Binary formats are native little-endian with a sentinel
// word; layouts are documented in the README.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynnet/common.hpp"
#include "dynnet/csv.hpp"
#include "dynnet/gibbs.hpp"
#include "dynnet/ingest.hpp"
#include "dynnet/types.hpp"

namespace dynnet {

// ---------------------------------------------------------------------------
// Interchange tables

// `t,i,j,y` with one row per stored edge and period, y in {0, 1, NA}.
inline void write_network_csv(const std::string& path, const NetworkData& data) {
  require(data.periods.size() == static_cast<std::size_t>(data.net.times()),
          "write_network_csv: period labels / grid mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "t,i,j,y\n";
  const auto& labels = data.net.node_labels();
  std::size_t e = 0;
  for (int i = 1; i < data.net.nodes(); ++i) {
    for (int j = 0; j < i; ++j, ++e) {
      for (int t = 0; t < data.net.times(); ++t) {
        const std::int8_t y = data.net.y_at(e, t);
        out << data.periods[t] << ',' << labels[i] << ',' << labels[j] << ',';
        if (y == DynamicNetwork::kMissing)
          out << "NA\n";
        else
          out << static_cast<int>(y) << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

// Node labels are canonicalized by sorting; every (pair, period) cell must
// appear exactly once.
inline NetworkData read_network_csv(const std::string& path) {
  const auto table = csv::read_table(path, {"t", "i", "j", "y"});
  require(!table.rows.empty(), path + ": no data rows");
  std::set<std::string> label_set;
  std::set<std::string> period_set;
  for (const auto& row : table.rows) {
    period_set.insert(row[0]);
    label_set.insert(row[1]);
    label_set.insert(row[2]);
  }
  std::vector<std::string> labels(label_set.begin(), label_set.end());
  std::vector<std::string> periods(period_set.begin(), period_set.end());
  std::map<std::string, int> label_ix;
  std::map<std::string, int> period_ix;
  for (std::size_t k = 0; k < labels.size(); ++k) label_ix[labels[k]] = k;
  for (std::size_t k = 0; k < periods.size(); ++k) period_ix[periods[k]] = k;

  DynamicNetwork net(static_cast<int>(labels.size()), static_cast<int>(periods.size()),
                     labels);
  std::vector<bool> seen(net.edges() * periods.size(), false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int i = label_ix[row[1]];
    const int j = label_ix[row[2]];
    const int t = period_ix[row[0]];
    std::ostringstream where;
    where << path << ":" << table.line_numbers[r];
    if (i == j) throw DataError(where.str() + ": self edge");
    const std::size_t cell = edge_index(i, j) * periods.size() + t;
    if (seen[cell]) throw DataError(where.str() + ": duplicate edge-period cell");
    seen[cell] = true;
    if (row[3] == "NA") {
      net.set_missing(i, j, t);
    } else if (row[3] == "0" || row[3] == "1") {
      net.set(i, j, t, row[3] == "1");
    } else {
      throw DataError(where.str() + ": y must be 0, 1, or NA, got '" + row[3] + "'");
    }
  }
  for (bool s : seen)
    require(s, path + ": incomplete table, every pair-period cell must be present");
  return {std::move(net), std::move(periods)};
}

// `t,i,j,predictor,value` covering the full grid for every predictor.
// Values round-trip exactly.
inline void write_covariates_csv(const std::string& path, const CovariateData& data) {
  require(data.periods.size() == static_cast<std::size_t>(data.covs.times()),
          "write_covariates_csv: period labels / grid mismatch");
  require(data.node_labels.size() == static_cast<std::size_t>(data.covs.nodes()),
          "write_covariates_csv: node labels / node count mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "t,i,j,predictor,value\n";
  const auto& plabels = data.covs.predictor_labels();
  for (int i = 1; i < data.covs.nodes(); ++i) {
    for (int j = 0; j < i; ++j) {
      for (int t = 0; t < data.covs.times(); ++t) {
        for (int p = 0; p < data.covs.predictors(); ++p) {
          out << data.periods[t] << ',' << data.node_labels[i] << ',' << data.node_labels[j]
              << ',' << plabels[p] << ',' << csv::format_double(data.covs.z(i, j, t, p))
              << '\n';
        }
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

// Node labels sorted; predictor labels keep first-appearance order.
inline CovariateData read_covariates_csv(const std::string& path) {
  const auto table = csv::read_table(path, {"t", "i", "j", "predictor", "value"});
  require(!table.rows.empty(), path + ": no data rows");
  std::set<std::string> label_set;
  std::set<std::string> period_set;
  std::vector<std::string> predictors;
  std::map<std::string, int> predictor_ix;
  for (const auto& row : table.rows) {
    period_set.insert(row[0]);
    label_set.insert(row[1]);
    label_set.insert(row[2]);
    if (!predictor_ix.count(row[3])) {
      predictor_ix[row[3]] = static_cast<int>(predictors.size());
      predictors.push_back(row[3]);
    }
  }
  std::vector<std::string> labels(label_set.begin(), label_set.end());
  std::vector<std::string> periods(period_set.begin(), period_set.end());
  std::map<std::string, int> label_ix;
  std::map<std::string, int> period_ix;
  for (std::size_t k = 0; k < labels.size(); ++k) label_ix[labels[k]] = k;
  for (std::size_t k = 0; k < periods.size(); ++k) period_ix[periods[k]] = k;

  EdgeCovariates covs(static_cast<int>(labels.size()), static_cast<int>(periods.size()),
                      predictors);
  std::vector<bool> seen(edge_count(covs.nodes()) * periods.size() * predictors.size(),
                         false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int i = label_ix[row[1]];
    const int j = label_ix[row[2]];
    const int t = period_ix[row[0]];
    const int p = predictor_ix[row[3]];
    std::ostringstream where;
    where << path << ":" << table.line_numbers[r];
    if (i == j) throw DataError(where.str() + ": self edge");
    const std::size_t cell =
        (edge_index(i, j) * periods.size() + t) * predictors.size() + p;
    if (seen[cell]) throw DataError(where.str() + ": duplicate cell");
    seen[cell] = true;
    covs.set(i, j, t, p, csv::parse_double(row[4], path, table.line_numbers[r]));
  }
  for (bool s : seen)
    require(s, path + ": incomplete table, every pair-period-predictor cell must be present");
  return {std::move(covs), std::move(labels), std::move(periods)};
}

// ---------------------------------------------------------------------------
// Summary tables

inline void write_summary_csv(const std::string& path,
                              const std::vector<SummarySeries>& series,
                              const std::vector<std::string>& time_labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "target,t,mean,hpd_lo,hpd_hi\n";
  for (const auto& s : series) {
    require(s.mean.size() == time_labels.size(), "write_summary_csv: grid mismatch");
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      out << s.label << ',' << time_labels[t] << ',' << csv::format_double(s.mean[t]) << ','
          << csv::format_double(s.hpd_lo[t]) << ',' << csv::format_double(s.hpd_hi[t])
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

inline void write_window_csv(const std::string& path, const std::vector<EdgeWeight>& weights,
                             const std::vector<std::string>& node_labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "i,j,weight\n";
  for (const auto& w : weights)
    out << node_labels[w.i] << ',' << node_labels[w.j] << ','
        << csv::format_double(w.weight) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Binary primitives

namespace bin {

constexpr std::uint32_t kSentinel = 0x01020304u;

inline void write_raw(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
inline void read_raw(std::istream& in, void* p, std::size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    throw IoError(std::string("truncated input while reading ") + what);
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  write_raw(out, &v, sizeof(T));
}
template <typename T>
T read_pod(std::istream& in, const char* what) {
  T v;
  read_raw(in, &v, sizeof(T), what);
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint64_t>(out, s.size());
  write_raw(out, s.data(), s.size());
}
inline std::string read_string(std::istream& in, const char* what) {
  const auto n = read_pod<std::uint64_t>(in, what);
  require(n < (1ull << 32), std::string("implausible string length in ") + what);
  std::string s(n, '\0');
  read_raw(in, s.data(), n, what);
  return s;
}

inline void write_strings(std::ostream& out, const std::vector<std::string>& v) {
  write_pod<std::uint64_t>(out, v.size());
  for (const auto& s : v) write_string(out, s);
}
inline std::vector<std::string> read_strings(std::istream& in, const char* what) {
  const auto n = read_pod<std::uint64_t>(in, what);
  std::vector<std::string> v(n);
  for (auto& s : v) s = read_string(in, what);
  return v;
}

inline void write_vec(std::ostream& out, const std::vector<double>& v) {
  write_pod<std::uint64_t>(out, v.size());
  write_raw(out, v.data(), v.size() * sizeof(double));
}
inline std::vector<double> read_vec(std::istream& in, const char* what) {
  const auto n = read_pod<std::uint64_t>(in, what);
  std::vector<double> v(n);
  read_raw(in, v.data(), n * sizeof(double), what);
  return v;
}

inline void write_floats(std::ostream& out, const std::vector<float>& v) {
  write_pod<std::uint64_t>(out, v.size());
  write_raw(out, v.data(), v.size() * sizeof(float));
}
inline std::vector<float> read_floats(std::istream& in, const char* what) {
  const auto n = read_pod<std::uint64_t>(in, what);
  std::vector<float> v(n);
  read_raw(in, v.data(), n * sizeof(float), what);
  return v;
}

inline void write_bytes(std::ostream& out, const std::vector<std::int8_t>& v) {
  write_pod<std::uint64_t>(out, v.size());
  write_raw(out, v.data(), v.size());
}
inline std::vector<std::int8_t> read_bytes(std::istream& in, const char* what) {
  const auto n = read_pod<std::uint64_t>(in, what);
  std::vector<std::int8_t> v(n);
  read_raw(in, v.data(), n, what);
  return v;
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  write_raw(out, m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}
inline Eigen::MatrixXd read_matrix(std::istream& in, const char* what) {
  const auto rows = read_pod<std::uint64_t>(in, what);
  const auto cols = read_pod<std::uint64_t>(in, what);
  Eigen::MatrixXd m(rows, cols);
  read_raw(in, m.data(), static_cast<std::size_t>(m.size()) * sizeof(double), what);
  return m;
}

inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
  write_raw(out, v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}
inline Eigen::VectorXd read_vector(std::istream& in, const char* what) {
  const auto n = read_pod<std::uint64_t>(in, what);
  Eigen::VectorXd v(n);
  read_raw(in, v.data(), static_cast<std::size_t>(v.size()) * sizeof(double), what);
  return v;
}

inline void write_header(std::ostream& out, const char magic[8]) {
  write_raw(out, magic, 8);
  write_pod<std::uint32_t>(out, kSentinel);
}
inline void read_header(std::istream& in, const char magic[8], const char* what) {
  char got[8];
  read_raw(in, got, 8, what);
  if (std::memcmp(got, magic, 8) != 0)
    throw IoError(std::string(what) + ": bad magic, not a " + what + " file");
  const auto sentinel = read_pod<std::uint32_t>(in, what);
  if (sentinel != kSentinel)
    throw IoError(std::string(what) + ": endianness sentinel mismatch");
}

}  // namespace bin

// ---------------------------------------------------------------------------
// Config JSON

inline nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["H"] = c.H;
  j["kappa_mu"] = c.kappa_mu;
  j["kappa_x"] = c.kappa_x;
  j["kappa_beta"] = c.kappa_beta;
  j["a1"] = c.a1;
  j["a2"] = c.a2;
  j["n_iter"] = c.n_iter;
  j["n_burn"] = c.n_burn;
  j["jitter"] = c.jitter;
  j["seed"] = c.seed;
  j["time_grid"] = c.time_grid;
  return j;
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.H = j.value("H", c.H);
  c.kappa_mu = j.value("kappa_mu", c.kappa_mu);
  c.kappa_x = j.value("kappa_x", c.kappa_x);
  if (j.contains("kappa_beta")) {
    if (j["kappa_beta"].is_number()) {
      c.kappa_beta = {j["kappa_beta"].get<double>()};
    } else {
      c.kappa_beta = j["kappa_beta"].get<std::vector<double>>();
    }
  }
  c.a1 = j.value("a1", c.a1);
  c.a2 = j.value("a2", c.a2);
  c.n_iter = j.value("n_iter", c.n_iter);
  c.n_burn = j.value("n_burn", c.n_burn);
  c.jitter = j.value("jitter", c.jitter);
  c.seed = j.value("seed", c.seed);
  if (j.contains("time_grid")) c.time_grid = j["time_grid"].get<std::vector<double>>();
  return c;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Posterior artifact

namespace io_detail {

constexpr char kArtifactMagic[8] = {'D', 'N', 'P', 'O', 'S', 'T', '0', '1'};
constexpr char kCheckpointMagic[8] = {'D', 'N', 'C', 'K', 'P', 'T', '0', '1'};

inline void write_config(std::ostream& out, const ModelConfig& c) {
  bin::write_pod<std::int32_t>(out, c.H);
  bin::write_pod<double>(out, c.kappa_mu);
  bin::write_pod<double>(out, c.kappa_x);
  bin::write_vec(out, c.kappa_beta);
  bin::write_pod<double>(out, c.a1);
  bin::write_pod<double>(out, c.a2);
  bin::write_pod<std::int32_t>(out, c.n_iter);
  bin::write_pod<std::int32_t>(out, c.n_burn);
  bin::write_pod<double>(out, c.jitter);
  bin::write_pod<std::uint64_t>(out, c.seed);
  bin::write_vec(out, c.time_grid);
}

inline ModelConfig read_config(std::istream& in) {
  ModelConfig c;
  c.H = bin::read_pod<std::int32_t>(in, "config");
  c.kappa_mu = bin::read_pod<double>(in, "config");
  c.kappa_x = bin::read_pod<double>(in, "config");
  c.kappa_beta = bin::read_vec(in, "config");
  c.a1 = bin::read_pod<double>(in, "config");
  c.a2 = bin::read_pod<double>(in, "config");
  c.n_iter = bin::read_pod<std::int32_t>(in, "config");
  c.n_burn = bin::read_pod<std::int32_t>(in, "config");
  c.jitter = bin::read_pod<double>(in, "config");
  c.seed = bin::read_pod<std::uint64_t>(in, "config");
  c.time_grid = bin::read_vec(in, "config");
  return c;
}

inline void write_samples_body(std::ostream& out, const PosteriorSamples& s) {
  write_config(out, s.config);
  bin::write_pod<std::int32_t>(out, s.V);
  bin::write_pod<std::int32_t>(out, s.P);
  bin::write_pod<std::int32_t>(out, s.thin);
  bin::write_strings(out, s.node_labels);
  bin::write_strings(out, s.predictor_labels);
  bin::write_strings(out, s.period_labels);
  bin::write_pod<std::int32_t>(out, s.n_retained);
  bin::write_matrix(out, s.mu_draws);
  bin::write_matrix(out, s.beta_draws);
  bin::write_matrix(out, s.tau_draws);
  bin::write_matrix(out, s.factor_energy);
  bin::write_floats(out, s.pi_draws);
  bin::write_vec(out, s.loglik);
  bin::write_pod<std::uint8_t>(out, s.has_holdout ? 1 : 0);
  bin::write_pod<std::int32_t>(out, s.holdout_time);
  bin::write_bytes(out, s.holdout_truth);
}

inline PosteriorSamples read_samples_body(std::istream& in) {
  PosteriorSamples s;
  s.config = read_config(in);
  s.V = bin::read_pod<std::int32_t>(in, "samples");
  s.P = bin::read_pod<std::int32_t>(in, "samples");
  s.thin = bin::read_pod<std::int32_t>(in, "samples");
  s.node_labels = bin::read_strings(in, "samples");
  s.predictor_labels = bin::read_strings(in, "samples");
  s.period_labels = bin::read_strings(in, "samples");
  s.n_retained = bin::read_pod<std::int32_t>(in, "samples");
  s.mu_draws = bin::read_matrix(in, "samples");
  s.beta_draws = bin::read_matrix(in, "samples");
  s.tau_draws = bin::read_matrix(in, "samples");
  s.factor_energy = bin::read_matrix(in, "samples");
  s.pi_draws = bin::read_floats(in, "samples");
  s.loglik = bin::read_vec(in, "samples");
  s.has_holdout = bin::read_pod<std::uint8_t>(in, "samples") != 0;
  s.holdout_time = bin::read_pod<std::int32_t>(in, "samples");
  s.holdout_truth = bin::read_bytes(in, "samples");
  return s;
}

}  // namespace io_detail

inline void write_artifact(const std::string& path, const PosteriorSamples& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  bin::write_header(out, io_detail::kArtifactMagic);
  io_detail::write_samples_body(out, samples);
  if (!out) throw IoError("write failed: " + path);
}

inline PosteriorSamples read_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  bin::read_header(in, io_detail::kArtifactMagic, "posterior artifact");
  return io_detail::read_samples_body(in);
}

// ---------------------------------------------------------------------------
// Checkpoints

inline void write_checkpoint(const std::string& path, const SamplerCheckpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  bin::write_header(out, io_detail::kCheckpointMagic);
  bin::write_pod<std::uint64_t>(out, ck.sweeps_done);
  bin::write_vector(out, ck.state.mu);
  bin::write_matrix(out, ck.state.X);
  bin::write_matrix(out, ck.state.beta);
  bin::write_vector(out, ck.state.theta);
  bin::write_vector(out, ck.state.tau);
  bin::write_matrix(out, ck.state.omega);
  bin::write_string(out, ck.rng_state);
  io_detail::write_samples_body(out, ck.partial);
  if (!out) throw IoError("write failed: " + path);
}

inline SamplerCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  bin::read_header(in, io_detail::kCheckpointMagic, "checkpoint");
  SamplerCheckpoint ck;
  ck.sweeps_done = bin::read_pod<std::uint64_t>(in, "checkpoint");
  ck.state.mu = bin::read_vector(in, "checkpoint");
  ck.state.X = bin::read_matrix(in, "checkpoint");
  ck.state.beta = bin::read_matrix(in, "checkpoint");
  ck.state.theta = bin::read_vector(in, "checkpoint");
  ck.state.tau = bin::read_vector(in, "checkpoint");
  ck.state.omega = bin::read_matrix(in, "checkpoint");
  ck.rng_state = bin::read_string(in, "checkpoint");
  ck.partial = io_detail::read_samples_body(in);
  return ck;
}

// ---------------------------------------------------------------------------
// Run manifest

// Written alongside every output set: command, inputs, config and its
// hash, seed, library version.  Deliberately timestamp-free so repeated
// runs are byte-identical.
inline void write_manifest(const std::string& path, const std::string& command,
                           const nlohmann::ordered_json& inputs, const ModelConfig& config,
                           std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["tool"] = "dynnet";
  j["version"] = "0.1.0";
  j["command"] = command;
  j["inputs"] = inputs;
  j["config"] = config_to_json(config);
  j["config_hash"] = fnv1a(j["config"].dump());
  j["seed"] = seed;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace dynnet
