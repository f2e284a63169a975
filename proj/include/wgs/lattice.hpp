#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wgs/errors.hpp"

namespace wgs {

inline constexpr double kPi = 3.14159265358979323846;

enum class LatticeKind { Chain, Deformed2D };

// Declarative lattice description.  Sites are indexed 1..N throughout the
// public API; for the 2D lattice, site i = (i_x - 1) * L + i_y with
// i_x, i_y in 1..L (column-within-row ordering).
struct LatticeSpec {
  LatticeKind kind = LatticeKind::Chain;
  std::size_t n_sites = 2;   // N for chains, L*L for Deformed2D
  std::size_t side = 0;      // L (Deformed2D only)
  double theta_deg = 90.0;   // bond angle (Deformed2D only), in [90, 150]

  static LatticeSpec chain(std::size_t n) {
    if (n < 2) throw domain_error("chain needs at least 2 sites");
    LatticeSpec s;
    s.kind = LatticeKind::Chain;
    s.n_sites = n;
    return s;
  }

  static LatticeSpec deformed2d(std::size_t L, double theta_deg) {
    if (L < 2) throw domain_error("2D lattice needs side length >= 2");
    if (!(theta_deg >= 90.0 && theta_deg <= 150.0))
      throw domain_error("theta must lie in [90, 150] degrees");
    LatticeSpec s;
    s.kind = LatticeKind::Deformed2D;
    s.side = L;
    s.n_sites = L * L;
    s.theta_deg = theta_deg;
    return s;
  }
};

struct SitePosition {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

// cos/sin of an angle given in degrees, with exact values at the right
// angle so the 90-degree lattice is a machine-exact integer grid.
inline void cos_sin_deg(double deg, double& c, double& s) {
  if (deg == 90.0) {
    c = 0.0;
    s = 1.0;
    return;
  }
  double rad = deg * (kPi / 180.0);
  c = std::cos(rad);
  s = std::sin(rad);
}

}  // namespace detail

// Positions in units where every nearest-neighbor bond has length 1.
//
// 2D construction: rows are zig-zag chains.  The in-row bond leaving
// (i_x, i_y) toward (i_x, i_y+1) points along (cos T, sin T) when i_x+i_y is
// even and (-cos T, sin T) when odd; rows are tied together by unit bonds
// (1, 0) leaving the even-parity sites.  Anchoring p(1,1) = (0,0) gives the
// closed form
//   x = (i_x - 1) * (1 - cos T) + cos T * ((i_x + i_y) mod 2)
//   y = (i_y - 1) * sin T
// which reduces to the square grid at T = 90 and regular hexagons at T = 120.
inline std::vector<SitePosition> site_positions(const LatticeSpec& spec) {
  std::vector<SitePosition> pos(spec.n_sites);
  if (spec.kind == LatticeKind::Chain) {
    for (std::size_t i = 0; i < spec.n_sites; ++i)
      pos[i] = {static_cast<double>(i), 0.0};
    return pos;
  }
  if (!(spec.theta_deg >= 90.0 && spec.theta_deg <= 150.0))
    throw domain_error("theta must lie in [90, 150] degrees");
  if (spec.side < 2) throw domain_error("2D lattice needs side length >= 2");
  double c, s;
  detail::cos_sin_deg(spec.theta_deg, c, s);
  const std::size_t L = spec.side;
  for (std::size_t ix = 1; ix <= L; ++ix) {
    for (std::size_t iy = 1; iy <= L; ++iy) {
      double parity = static_cast<double>((ix + iy) % 2);
      pos[(ix - 1) * L + (iy - 1)] = {
          static_cast<double>(ix - 1) * (1.0 - c) + c * parity,
          static_cast<double>(iy - 1) * s};
    }
  }
  return pos;
}

// Euclidean distance between sites i and j (1-based).  Self-distances are a
// domain error: distances exist only to feed coupling weights.
inline double distance(const std::vector<SitePosition>& pos, std::size_t i, std::size_t j) {
  if (i == j) throw domain_error("distance requires two distinct sites");
  if (i < 1 || j < 1 || i > pos.size() || j > pos.size())
    throw domain_error("site index out of range");
  double dx = pos[i - 1].x - pos[j - 1].x;
  double dy = pos[i - 1].y - pos[j - 1].y;
  return std::sqrt(dx * dx + dy * dy);
}

// Power-law coupling g_ij(t) = t * r_ij^(-alpha) with a range cutoff z.
// Chains: pairs with |i-j| <= z are coupled.  2D lattices are always
// all-to-all (z = N-1); a distance-rank cutoff is deliberately not defined
// for them.
struct CouplingModel {
  LatticeSpec lattice;
  double alpha = 1.0;
  std::size_t z = 1;
  std::vector<SitePosition> positions;  // cached from site_positions

  CouplingModel(const LatticeSpec& spec, double alpha_, std::size_t z_)
      : lattice(spec), alpha(alpha_), z(z_), positions(site_positions(spec)) {
    if (alpha < 0.0) throw domain_error("alpha must be >= 0");
    if (spec.kind == LatticeKind::Deformed2D) {
      z = spec.n_sites - 1;  // all-to-all, by definition
    } else if (z < 1 || z > spec.n_sites - 1) {
      throw domain_error("z must lie in [1, N-1]");
    }
  }

  static CouplingModel chain(std::size_t n, double alpha, std::size_t z) {
    return CouplingModel(LatticeSpec::chain(n), alpha, z);
  }
  static CouplingModel chain_full(std::size_t n, double alpha) {
    return CouplingModel(LatticeSpec::chain(n), alpha, n - 1);
  }
  static CouplingModel deformed2d(std::size_t L, double theta_deg, double alpha) {
    return CouplingModel(LatticeSpec::deformed2d(L, theta_deg), alpha, L * L - 1);
  }

  std::size_t n_sites() const { return lattice.n_sites; }

  bool coupled(std::size_t i, std::size_t j) const {
    if (i == j) return false;
    if (lattice.kind == LatticeKind::Chain)
      return (i > j ? i - j : j - i) <= z;
    return true;
  }

  // Static weight phi_ij = r_ij^(-alpha), or 0 beyond the cutoff.
  double phi(std::size_t i, std::size_t j) const {
    if (i == j) throw domain_error("no self-coupling");
    if (!coupled(i, j)) return 0.0;
    if (lattice.kind == LatticeKind::Chain) {
      double r = static_cast<double>(i > j ? i - j : j - i);
      return std::pow(r, -alpha);
    }
    return std::pow(distance(positions, i, j), -alpha);
  }

  // Time-dependent weight g_ij(t) = t * phi_ij.
  double weight(std::size_t i, std::size_t j, double t) const { return t * phi(i, j); }
};

// Dense symmetric matrix of g_ij(t), zero diagonal, row-major N x N.
// Capped: the large-N paths evaluate weights lazily instead.
inline std::vector<double> materialize_weights(const CouplingModel& model, double t,
                                               std::size_t cap = 4096) {
  const std::size_t n = model.n_sites();
  if (n > cap)
    throw capacity_error("dense weight matrix capped at " + std::to_string(cap) +
                         " sites; evaluate weights lazily instead");
  std::vector<double> g(n * n, 0.0);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) {
      double w = model.weight(i, j, t);
      g[(i - 1) * n + (j - 1)] = w;
      g[(j - 1) * n + (i - 1)] = w;
    }
  return g;
}

}  // namespace wgs
