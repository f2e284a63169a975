#pragma once

#include <map>
#include <string>
#include <vector>

#include "wgs/errors.hpp"

namespace wgs {

// A sampled curve: strictly increasing abscissa (t, alpha, theta, N or z),
// one real value per grid point, and free-form run metadata.
struct MetricSeries {
  std::vector<double> grid;
  std::vector<double> values;
  std::map<std::string, std::string> metadata;

  void validate() const {
    if (grid.size() != values.size())
      throw domain_error("series grid/value lengths differ");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1]))
        throw domain_error("series grid must be strictly increasing");
  }
};

// Uniform grid helper: start, start+step, ... up to stop (inclusive within
// half a step, so floating accumulation cannot drop the endpoint).
inline std::vector<double> uniform_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop > start))
    throw domain_error("range needs start < stop and step > 0");
  std::vector<double> g;
  auto n = static_cast<std::size_t>((stop - start) / step + 0.5);
  g.reserve(n + 1);
  for (std::size_t i = 0;; ++i) {
    double v = start + step * static_cast<double>(i);
    if (v > stop + 0.5 * step) break;
    g.push_back(v);
  }
  return g;
}

}  // namespace wgs
