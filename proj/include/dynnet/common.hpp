#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace dynnet {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (bad tables, dimension mismatch, bad arguments).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical failure (factorization breakdown, non-finite values, rejection cap).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Filesystem / serialization failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

// Unordered node pairs (i, j), i > j, stored in lexicographic order:
// (1,0), (2,0), (2,1), (3,0), ...  Edge index e = i*(i-1)/2 + j.
inline std::size_t edge_count(int n_nodes) {
  return static_cast<std::size_t>(n_nodes) * (n_nodes - 1) / 2;
}

inline std::size_t edge_index(int i, int j) {
  if (i < j) std::swap(i, j);
  return static_cast<std::size_t>(i) * (i - 1) / 2 + j;
}

// Inverse of edge_index.
inline std::pair<int, int> edge_pair(std::size_t e) {
  int i = static_cast<int>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(e))) / 2.0);
  while (static_cast<std::size_t>(i) * (i - 1) / 2 > e) --i;
  while (static_cast<std::size_t>(i + 1) * i / 2 <= e) ++i;
  int j = static_cast<int>(e - static_cast<std::size_t>(i) * (i - 1) / 2);
  return {i, j};
}

}  // namespace dynnet
