#pragma once

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "wgs/errors.hpp"
#include "wgs/lattice.hpp"
#include "wgs/series.hpp"

namespace wgs {

// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strict full-token double parse.
inline double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw domain_error("cannot parse number: '" + std::string(s) + "'");
  return v;
}

// Number with an optional "pi" suffix: "3pi" = 3*pi, "pi" = pi, "0.5pi", "6.28".
inline double parse_time(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.substr(s.size() - 2) == "pi" || s.substr(s.size() - 2) == "PI")) {
    std::string_view head = trim(s.substr(0, s.size() - 2));
    if (head.empty()) return kPi;
    if (head == "-") return -kPi;
    return parse_double(head) * kPi;
  }
  return parse_double(s);
}

struct Range {
  double start = 0.0, stop = 0.0, step = 0.0;
};

// "start:stop:step", each field accepting the pi suffix.
inline Range parse_range(std::string_view s) {
  std::size_t c1 = s.find(':');
  std::size_t c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos ||
      s.find(':', c2 + 1) != std::string_view::npos)
    throw domain_error("range must be start:stop:step, got '" + std::string(s) + "'");
  Range r;
  r.start = parse_time(s.substr(0, c1));
  r.stop = parse_time(s.substr(c1 + 1, c2 - c1 - 1));
  r.step = parse_time(s.substr(c2 + 1));
  return r;
}

// Comma-separated values, each accepting the pi suffix.
inline std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = s.find(',', pos);
    out.push_back(parse_time(s.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

// One grammar for value arguments: "a:b:c" expands the inclusive range,
// "x,y,z" is an explicit list, anything else is a single value.
inline std::vector<double> parse_values(std::string_view s) {
  if (s.find(':') != std::string_view::npos) {
    Range r = parse_range(s);
    return uniform_grid(r.start, r.stop, r.step);
  }
  return parse_list(s);
}

inline std::string utc_timestamp() {
  std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Output stem <dir>/<name>-<stamp>; a numeric suffix resolves collisions so
// the .csv/.json pair never overwrites an earlier run.
inline std::filesystem::path unique_output_stem(const std::filesystem::path& dir,
                                                std::string_view name, std::string_view stamp) {
  std::filesystem::create_directories(dir);
  std::string base = std::string(name) + "-" + std::string(stamp);
  std::filesystem::path stem = dir / base;
  for (int k = 1; std::filesystem::exists(stem.string() + ".csv") ||
                  std::filesystem::exists(stem.string() + ".json");
       ++k)
    stem = dir / (base + "-" + std::to_string(k));
  return stem;
}

// Rectangular CSV assembled cell-by-cell as already-formatted strings, so the
// bytes depend only on the values (never on evaluation order or locale).
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw domain_error("CSV row width mismatch");
    rows_.push_back(std::move(cells));
  }

  std::size_t n_rows() const { return rows_.size(); }

  std::string to_string() const {
    std::string out;
    auto append_line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    append_line(header_);
    for (const auto& r : rows_) append_line(r);
    return out;
  }

  void write(const std::filesystem::path& p) const {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw domain_error("cannot open " + p.string() + " for writing");
    f << to_string();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw domain_error("cannot open " + p.string() + " for writing");
  f << j.dump(2) << '\n';
}

}  // namespace wgs
