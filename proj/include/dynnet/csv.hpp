#pragma once

// Minimal comma-separated table reading: no quoting, labels must not
// contain commas, CRLF tolerated.  Errors carry the offending line number.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dynnet/common.hpp"

namespace dynnet::csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

inline double parse_double(const std::string& tok, const std::string& file, std::size_t line_no) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    std::ostringstream msg;
    msg << file << ":" << line_no << ": cannot parse '" << tok << "' as a number";
    throw DataError(msg.str());
  }
  return value;
}

inline long long parse_count(const std::string& tok, const std::string& file,
                             std::size_t line_no) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || value < 0) {
    std::ostringstream msg;
    msg << file << ":" << line_no << ": cannot parse '" << tok << "' as a nonnegative count";
    throw DataError(msg.str());
  }
  return value;
}

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string file;
};

// Reads the file and checks the header columns are exactly `expected`,
// naming the first missing column otherwise.
inline Table read_table(const std::string& path, const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Table table;
  table.file = path;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file, expected a header row");
  ++line_no;
  table.header = split_line(line);
  for (const auto& col : expected) {
    bool found = false;
    for (const auto& have : table.header)
      if (have == col) found = true;
    if (!found) throw DataError(path + ": header is missing column '" + col + "'");
  }
  if (table.header.size() != expected.size() || table.header != expected)
    throw DataError(path + ": header must be exactly '" +
                    [&] {
                      std::string s;
                      for (std::size_t c = 0; c < expected.size(); ++c)
                        s += (c ? "," : "") + expected[c];
                      return s;
                    }() +
                    "'");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() != expected.size()) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << expected.size() << " fields, got "
          << fields.size();
      throw DataError(msg.str());
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  return table;
}

inline void check_label(const std::string& label, const std::string& context) {
  require(!label.empty(), context + ": empty label");
  require(label.find(',') == std::string::npos, context + ": label '" + label +
                                                    "' must not contain commas");
}

}  // namespace dynnet::csv
