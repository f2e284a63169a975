#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "wgs/errors.hpp"
#include "wgs/lattice.hpp"
#include "wgs/numerics.hpp"

namespace wgs {

// GGM value produced by the closed form: value = 1/2 - (1/2) exp(log_product)
// where log_product = ln prod_{j != k*} |cos(g_{k*j}/2)| at the argmax site k*.
struct GgmValue {
  double value = 0.0;
  std::size_t argmax_site = 1;  // 1-based
  double log_product = 0.0;     // <= 0; -inf allowed (value exactly 1/2)
};

inline GgmValue make_ggm_from_log(double log_product, std::size_t site) {
  double p = std::exp(log_product);  // exp(-inf) == 0
  return GgmValue{0.5 - 0.5 * p, site, log_product};
}

// Single-site reduced density matrix of the WGS: diag (1/2, 1/2), off-diagonal
// x with |x| = (1/2) prod_{j != k} |cos(g_kj/2)| and arg x = sum g_kj / 2 (mod
// sign flips from negative cosines).
struct SingleSiteRdm {
  std::complex<double> offdiag{0.0, 0.0};
  double log_mag = 0.0;  // ln(2|x|); -inf when the product underflows
  double top_eigenvalue() const { return 0.5 + std::abs(offdiag); }
};

inline SingleSiteRdm single_site_rdm(const CouplingModel& model, std::size_t k, double t) {
  const std::size_t n = model.n_sites();
  if (k < 1 || k > n) throw domain_error("site index out of range");
  double logmag = 0.0;
  double phase = 0.0;
  long negs = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    if (j == k || !model.coupled(k, j)) continue;
    double g = model.weight(k, j, t);
    double c = std::cos(0.5 * g);
    if (c < 0) ++negs;
    logmag += log_abs_cos(0.5 * g);
    phase += 0.5 * g;
  }
  SingleSiteRdm r;
  r.log_mag = logmag;
  double mag = 0.5 * std::exp(logmag);
  double ph = std::fmod(phase, 2.0 * kPi) + ((negs % 2) ? kPi : 0.0);
  r.offdiag = std::polar(mag, ph);
  return r;
}

namespace detail {

// Prefix sums S[m] = sum_{r=1..m} ln|cos(t r^(-alpha)/2)| for m = 0..mmax.
inline std::vector<double> chain_logcos_prefix(double t, double alpha, std::size_t mmax) {
  std::vector<double> S(mmax + 1, 0.0);
  if (alpha == 0.0) {
    double lc = log_abs_cos(0.5 * t);
    for (std::size_t m = 1; m <= mmax; ++m) S[m] = S[m - 1] + lc;
    return S;
  }
  for (std::size_t r = 1; r <= mmax; ++r)
    S[r] = S[r - 1] + log_abs_cos(0.5 * t * std::pow(static_cast<double>(r), -alpha));
  return S;
}

// Per-site maximum of S(min(k-1,z)) + S(min(N-k,z)) given the prefix array.
inline GgmValue chain_site_max(const std::vector<double>& S, std::size_t n, std::size_t z) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    double ls = S[std::min(k - 1, z)] + S[std::min(n - k, z)];
    if (ls > best) {
      best = ls;
      best_k = k;
    }
  }
  return make_ggm_from_log(best, best_k);
}

}  // namespace detail

// Eq.-style 1D closed form: GGM of the chain-end site, prod_{r=1}^{z}
// |cos(t / (2 r^alpha))|, in O(z) log-space.  Equals the full per-site
// maximum whenever the end site dominates (always true for z <= N/2; the
// full maximum is authoritative elsewhere).
inline GgmValue ggm_chain_fastpath(std::size_t n, std::size_t z, double alpha, double t) {
  if (z < 1 || z > n - 1) throw domain_error("z must lie in [1, N-1]");
  double logsum = 0.0;
  if (alpha == 0.0) {
    logsum = static_cast<double>(z) * log_abs_cos(0.5 * t);
  } else {
    for (std::size_t r = 1; r <= z; ++r) {
      logsum += log_abs_cos(0.5 * t * std::pow(static_cast<double>(r), -alpha));
      if (std::isinf(logsum)) break;
    }
  }
  return make_ggm_from_log(logsum, 1);
}

// Distance-class engine for the deformed 2D lattice: pairs are grouped by
// their exact (bitwise) distance value, so an (alpha, t) evaluation costs one
// pow/cos/log per distinct distance plus one add per pair per endpoint.
class Deformed2DGgmEvaluator {
 public:
  explicit Deformed2DGgmEvaluator(const CouplingModel& model)
      : n_(model.n_sites()) {
    if (model.lattice.kind != LatticeKind::Deformed2D)
      throw domain_error("2D evaluator requires a Deformed2D lattice");
    if (n_ > 4096) throw capacity_error("2D evaluator capped at 4096 sites");
    const auto& pos = model.positions;
    classes_.reserve(n_ * (n_ - 1) / 2);
    std::unordered_map<double, std::uint32_t> idx;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        double dx = pos[i].x - pos[j].x;
        double dy = pos[i].y - pos[j].y;
        double d = std::sqrt(dx * dx + dy * dy);
        auto [it, inserted] = idx.try_emplace(d, static_cast<std::uint32_t>(dists_.size()));
        if (inserted) dists_.push_back(d);
        classes_.push_back(it->second);
      }
    }
  }

  std::size_t n_sites() const { return n_; }
  std::size_t n_classes() const { return dists_.size(); }

  GgmValue eval(double alpha, double t) const {
    std::vector<double> lc(dists_.size());
    for (std::size_t c = 0; c < dists_.size(); ++c)
      lc[c] = log_abs_cos(0.5 * t * std::pow(dists_[c], -alpha));
    std::vector<double> sums(n_, 0.0);
    std::size_t p = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j, ++p) {
        double v = lc[classes_[p]];
        sums[i] += v;
        sums[j] += v;
      }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n_; ++i)
      if (sums[i] > sums[best]) best = i;
    return make_ggm_from_log(sums[best], best + 1);
  }

 private:
  std::size_t n_;
  std::vector<double> dists_;
  std::vector<std::uint32_t> classes_;
};

// Full single-site-maximum GGM.  Chains use prefix/suffix log-sums (O(N + z)
// per t); 2D lattices use the distance-class engine.
inline GgmValue ggm_general(const CouplingModel& model, double t) {
  const std::size_t n = model.n_sites();
  if (model.lattice.kind == LatticeKind::Chain) {
    auto S = detail::chain_logcos_prefix(t, model.alpha, std::min(model.z, n - 1));
    return detail::chain_site_max(S, n, model.z);
  }
  Deformed2DGgmEvaluator ev(model);
  return ev.eval(model.alpha, t);
}

// GGM sampled over a strictly increasing t grid.
inline std::vector<GgmValue> ggm_curve(const CouplingModel& model,
                                       const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw domain_error("empty t grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw domain_error("t grid must be strictly increasing");
  std::vector<GgmValue> out(t_grid.size());
  if (model.lattice.kind == LatticeKind::Deformed2D) {
    Deformed2DGgmEvaluator ev(model);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      out[i] = ev.eval(model.alpha, t_grid[i]);
    return out;
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    out[i] = ggm_general(model, t_grid[i]);
  return out;
}

// A period of the chain GGM for integer alpha: all weights are t / r^alpha
// with r in 1..z, so t -> t + 2*pi*lcm(1..z)^alpha maps every phase to
// itself mod 2*pi.  Not necessarily the fundamental period.
inline double period_of_chain(std::size_t n, double alpha, std::size_t z) {
  if (z < 1 || z > n - 1) throw domain_error("z must lie in [1, N-1]");
  if (!(alpha >= 0.0) || std::floor(alpha) != alpha)
    throw domain_error("periodicity requires a non-negative integer alpha");
  std::uint64_t l = 1;
  for (std::size_t r = 2; r <= z; ++r) {
    std::uint64_t g = std::gcd(l, static_cast<std::uint64_t>(r));
    std::uint64_t factor = static_cast<std::uint64_t>(r) / g;
    if (l > std::numeric_limits<std::uint64_t>::max() / factor)
      throw domain_error("period overflows 64-bit arithmetic");
    l *= factor;
  }
  double period = 2.0 * kPi * std::pow(static_cast<double>(l), alpha);
  if (!std::isfinite(period)) throw domain_error("period overflows double range");
  return period;
}

// Scalable chain evaluator for cutoff or all-to-all chains at large N.
//
// The factor range r = 1..z is split into three zones:
//   head   r <= h:         direct ln|cos| terms (covers every argument above
//                          the series radius xmax, and the whole edge zone),
//   core   h < r <= c:     Taylor tail collapsed onto cached power sums
//                          (t-independent; arguments all below xmax),
//   fringe c < r <= z:     direct ln|cos| terms again (at most K0 of them),
// so any prefix S(m) the edge-zone site maximum needs is available without
// subtracting accumulated sums (infinity-safe when a cosine hits zero).
//
// The per-site maximum is taken over sites k = 1..K0 of the left edge (the
// mirror site N+1-k has the identical log-sum).  For t within [0, tmax] this
// zone contains the true argmax: an interior site keeps all the small-r
// factors of an edge site while replacing far factors (|ln cos| ~ r^(-2a))
// with nearer, more damped ones; the only way in is through wrapped cosines
// at r below (t/pi)^(1/alpha), which K0 is sized to cover (and once the wrap
// zone outgrows K0 the products underflow to zero anyway).
class ChainGgmEvaluator {
 public:
  ChainGgmEvaluator(std::size_t n, std::size_t z, double alpha, double tmax = 3.0 * kPi,
                    double xmax = 0.05)
      : n_(n), z_(z), alpha_(alpha), tmax_(tmax) {
    if (z < 1 || z > n - 1) throw domain_error("z must lie in [1, N-1]");
    if (!(tmax > 0.0) || !(xmax > 0.0 && xmax < 1.0))
      throw domain_error("evaluator needs tmax > 0 and xmax in (0,1)");
    double wrap = alpha_ > 0.0 ? std::min(std::pow(tmax / kPi, 1.0 / alpha_), 4096.0) : 0.0;
    k0_ = std::min<std::size_t>(n_ / 2 + 1,
                                64 + static_cast<std::size_t>(std::ceil(wrap)));
    if (alpha_ == 0.0) {
      head_ = z_;  // degenerate: every factor equals ln|cos(t/2)|
      core_end_ = z_;
      return;
    }
    double rstar = std::pow(tmax / (2.0 * xmax), 1.0 / alpha_);
    std::size_t series_from = rstar >= 1.0 ? static_cast<std::size_t>(std::ceil(rstar)) : 1;
    head_ = std::min(z_, std::max(series_from, k0_));
    core_end_ = (z_ > head_ + k0_) ? z_ - k0_ : head_;
    if (core_end_ > head_) core_ = ChainTailMoments(alpha_, head_, core_end_);
  }

  std::size_t n_sites() const { return n_; }
  std::size_t edge_zone() const { return k0_; }

  // ln prod_{r=1..z} |cos(t r^(-alpha)/2)|  (end-site product).
  double end_log_product(double t) const {
    Scratch sc;
    fill_scratch(t, sc);
    return prefix_logsum(sc, z_);
  }

  GgmValue eval_end(double t) const { return make_ggm_from_log(end_log_product(t), 1); }

  // Per-site maximum over the edge zone.
  GgmValue eval(double t) const {
    Scratch sc;
    fill_scratch(t, sc);
    if (alpha_ == 0.0) return make_ggm_from_log(prefix_logsum(sc, z_), 1);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_k = 1;
    std::size_t kmax = std::min(k0_, n_);
    for (std::size_t k = 1; k <= kmax; ++k) {
      double ls = prefix_logsum(sc, std::min(k - 1, z_)) +
                  prefix_logsum(sc, std::min(n_ - k, z_));
      if (ls > best) {
        best = ls;
        best_k = k;
      }
    }
    return make_ggm_from_log(best, best_k);
  }

 private:
  struct Scratch {
    double t = 0.0;
    std::vector<double> head_prefix;    // S(m) for m = 0..head_
    double core_sum = 0.0;              // sum over (head_, core_end_]
    std::vector<double> fringe_prefix;  // partial sums over (core_end_, core_end_+i]
  };

  void fill_scratch(double t, Scratch& sc) const {
    if (std::fabs(t) > tmax_ * (1.0 + 1e-12))
      throw domain_error("t exceeds the tmax this evaluator was built for");
    sc.t = t;
    if (alpha_ == 0.0) return;
    sc.head_prefix.assign(head_ + 1, 0.0);
    for (std::size_t r = 1; r <= head_; ++r)
      sc.head_prefix[r] =
          sc.head_prefix[r - 1] + log_abs_cos(0.5 * t * std::pow(static_cast<double>(r), -alpha_));
    sc.core_sum = (core_end_ > head_) ? core_.logsum(t) : 0.0;
    sc.fringe_prefix.assign(z_ - core_end_ + 1, 0.0);
    for (std::size_t i = 1; i <= z_ - core_end_; ++i)
      sc.fringe_prefix[i] =
          sc.fringe_prefix[i - 1] +
          log_abs_cos(0.5 * t * std::pow(static_cast<double>(core_end_ + i), -alpha_));
  }

  // S(m) = sum_{r=1..m} ln|cos(t r^(-alpha)/2)| for any m the edge zone needs
  // (m <= head_, or m in [core_end_, z]).
  double prefix_logsum(const Scratch& sc, std::size_t m) const {
    if (alpha_ == 0.0) return static_cast<double>(m) * log_abs_cos(0.5 * sc.t);
    if (m <= head_) return sc.head_prefix[m];
    if (m < core_end_)
      throw domain_error("internal: prefix request outside precomputed zones");
    return sc.head_prefix[head_] + sc.core_sum + sc.fringe_prefix[m - core_end_];
  }

  std::size_t n_, z_;
  double alpha_, tmax_;
  std::size_t head_ = 1;      // direct zone end
  std::size_t core_end_ = 1;  // moment zone end
  std::size_t k0_ = 64;       // edge-zone width
  ChainTailMoments core_;
};

}  // namespace wgs
