#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgs/analytic.hpp"
#include "wgs/errors.hpp"
#include "wgs/lattice.hpp"
#include "wgs/numerics.hpp"
#include "wgs/parallel.hpp"
#include "wgs/series.hpp"

namespace wgs {

inline constexpr double kDerivStep = 1e-5;      // finite-difference step
inline constexpr double kKinkThreshold = 1e-2;  // left/right mismatch flag
inline constexpr std::size_t kAvgPoints = 6001; // Simpson nodes on [0, T]

// A function (alpha, t) -> GGM value; adapters below build them from models.
using GgmFamily = std::function<double(double, double)>;

inline GgmFamily chain_family(std::size_t n, std::size_t z) {
  return [n, z](double alpha, double t) {
    auto S = detail::chain_logcos_prefix(t, alpha, std::min(z, n - 1));
    return detail::chain_site_max(S, n, z).value;
  };
}

inline GgmFamily deformed2d_family(std::shared_ptr<Deformed2DGgmEvaluator> ev) {
  return [ev](double alpha, double t) { return ev->eval(alpha, t).value; };
}

// Family dispatch: chains use the O(N + z) prefix path (fastest when each
// alpha is visited only a handful of times, as in derivative scans); 2D
// lattices share one distance-class evaluator.
inline GgmFamily family_for(const CouplingModel& model) {
  if (model.lattice.kind == LatticeKind::Deformed2D)
    return deformed2d_family(std::make_shared<Deformed2DGgmEvaluator>(model));
  return chain_family(model.n_sites(), model.z);
}

// d(GGM)/dt at t = 2*pi: central difference plus the one-sided differences,
// with a kink flag when the sides disagree (the |cos| product is non-smooth
// where a factor vanishes).
struct GbarResult {
  double central = 0.0;
  double forward = 0.0;
  double backward = 0.0;
  bool kink = false;
  double side_gap() const { return std::fabs(forward - backward); }
};

inline GbarResult gbar_2pi(const GgmFamily& f, double alpha, double h = kDerivStep) {
  const double t0 = 2.0 * kPi;
  double fp = f(alpha, t0 + h);
  double f0 = f(alpha, t0);
  double fm = f(alpha, t0 - h);
  GbarResult r;
  r.central = (fp - fm) / (2.0 * h);
  r.forward = (fp - f0) / h;
  r.backward = (f0 - fm) / h;
  r.kink = r.side_gap() > kKinkThreshold;
  return r;
}

// d(GGM)/dalpha at fixed t = 2*pi, same structure as gbar_2pi.
inline GbarResult dggm_dalpha_2pi(const GgmFamily& f, double alpha, double h = kDerivStep) {
  const double t0 = 2.0 * kPi;
  double fp = f(alpha + h, t0);
  double f0 = f(alpha, t0);
  double fm = f(alpha - h, t0);
  GbarResult r;
  r.central = (fp - fm) / (2.0 * h);
  r.forward = (fp - f0) / h;
  r.backward = (f0 - fm) / h;
  r.kink = r.side_gap() > kKinkThreshold;
  return r;
}

// Time-averaged GGM over [0, T], composite Simpson on `points` uniform nodes.
// Chains above the dense-size threshold use the scalable edge-zone evaluator.
inline double avg_ggm(const CouplingModel& model, double T = 3.0 * kPi,
                      std::size_t points = kAvgPoints) {
  if (!(T > 0.0)) throw domain_error("T must be positive");
  if (model.lattice.kind == LatticeKind::Deformed2D) {
    Deformed2DGgmEvaluator ev(model);
    return simpson_average([&](double t) { return ev.eval(model.alpha, t).value; }, T, points);
  }
  const std::size_t n = model.n_sites();
  if (n <= 4096) {
    return simpson_average(
        [&](double t) { return ggm_general(model, t).value; }, T, points);
  }
  ChainGgmEvaluator ev(n, model.z, model.alpha, T);
  return simpson_average([&](double t) { return ev.eval(t).value; }, T, points);
}

// Gbar difference across a candidate transition point: Gbar(a+delta) -
// Gbar(a-delta), the jump magnitude estimator.
inline double delta_gbar(const GgmFamily& f, double alpha_star, double delta = 0.001) {
  return gbar_2pi(f, alpha_star + delta).central - gbar_2pi(f, alpha_star - delta).central;
}

// Where and how the Gbar_2pi(alpha) curve signals the transition.
struct TransitionReport {
  bool found = false;
  enum class Mode { JumpCell, SignChange, None } mode = Mode::None;
  double alpha_star = 0.0;
  double jump = 0.0;             // |delta Gbar| across the detected cell
  double grid_resolution = 0.0;
  std::pair<double, double> side_derivatives{0.0, 0.0};  // dG/dt from left/right at 2*pi
  bool t_kink = false;        // sides disagree in t at the transition point
  double dalpha_side_gap = 0.0;  // |fwd-bwd| of dG_2pi/dalpha there
  bool alpha_kink = false;
};

// Locates the transition on an alpha grid from the Gbar_2pi curve.
//
// Stage 1 (jump): the cell with maximal |delta Gbar| counts as a genuine
// discontinuity when it exceeds 10x the median adjacent-cell difference AND
// 5x every cell two-to-four steps away (immediate neighbours are excluded
// from the contrast test because a grid node landing exactly on the
// singularity splits the jump across two cells).  alpha* is the interpolated
// zero of Gbar when a strict -/+ crossing touches the jump cell, else the
// cell midpoint.
//
// Stage 2 (sign change): when no confirmed jump exists, the transition is the
// last strict -/+ crossing of Gbar (the transitioned regime keeps Gbar > 0;
// earlier crossings are wobbles around zero), linearly interpolated.
inline std::vector<GbarResult> gbar_curve(const GgmFamily& f, const std::vector<double>& grid,
                                          unsigned workers = 0) {
  std::vector<GbarResult> curve(grid.size());
  parallel_for(grid.size(),
               [&](std::size_t i) { curve[i] = gbar_2pi(f, grid[i]); }, workers);
  return curve;
}

inline TransitionReport find_alpha_star_from_curve(const GgmFamily& f,
                                                   const std::vector<double>& grid,
                                                   const std::vector<GbarResult>& curve) {
  if (grid.size() < 3) throw domain_error("alpha grid needs at least 3 points");
  if (curve.size() != grid.size()) throw domain_error("curve/grid size mismatch");
  TransitionReport rep;
  rep.grid_resolution = grid[1] - grid[0];
  std::vector<double> gb(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) gb[i] = curve[i].central;

  std::vector<double> ad(grid.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) ad[i] = std::fabs(gb[i + 1] - gb[i]);
  std::vector<double> sorted = ad;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  double med = sorted[sorted.size() / 2];
  std::size_t imax = 0;
  for (std::size_t i = 1; i < ad.size(); ++i)
    if (ad[i] > ad[imax]) imax = i;

  bool global_ok = ad[imax] > 0.0 && ad[imax] > 10.0 * med;
  double far = 0.0;
  for (std::size_t off = 2; off <= 4; ++off) {
    if (imax >= off) far = std::max(far, ad[imax - off]);
    if (imax + off < ad.size()) far = std::max(far, ad[imax + off]);
  }
  bool local_ok = ad[imax] > 5.0 * far;

  auto interpolate = [&](std::size_t j) {
    double frac = gb[j] / (gb[j] - gb[j + 1]);
    return grid[j] + frac * (grid[j + 1] - grid[j]);
  };

  if (global_ok && local_ok) {
    rep.found = true;
    rep.mode = TransitionReport::Mode::JumpCell;
    rep.jump = ad[imax];
    rep.alpha_star = 0.5 * (grid[imax] + grid[imax + 1]);
    for (std::size_t cand : {imax, imax > 0 ? imax - 1 : imax, imax + 1}) {
      if (cand + 1 < grid.size() && gb[cand] < 0.0 && gb[cand + 1] >= 0.0) {
        rep.alpha_star = interpolate(cand);
        break;
      }
    }
  } else {
    // ">= 0" so a node landing exactly on the zero still brackets a crossing
    // (interpolation then returns that node exactly).
    std::optional<std::size_t> last;
    for (std::size_t j = 0; j + 1 < gb.size(); ++j)
      if (gb[j] < 0.0 && gb[j + 1] >= 0.0) last = j;
    if (last) {
      rep.found = true;
      rep.mode = TransitionReport::Mode::SignChange;
      rep.jump = ad[*last];
      rep.alpha_star = interpolate(*last);
    }
  }
  if (!rep.found) return rep;

  // Side-derivative and non-analyticity diagnostics at the nearest grid node.
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::fabs(grid[i] - rep.alpha_star) < std::fabs(grid[nearest] - rep.alpha_star))
      nearest = i;
  rep.side_derivatives = {curve[nearest].backward, curve[nearest].forward};
  rep.t_kink = curve[nearest].kink;
  GbarResult da = dggm_dalpha_2pi(f, grid[nearest]);
  rep.dalpha_side_gap = da.side_gap();
  rep.alpha_kink = da.kink;
  return rep;
}

inline TransitionReport find_alpha_star(const GgmFamily& f, const std::vector<double>& grid,
                                        unsigned workers = 0) {
  return find_alpha_star_from_curve(f, grid, gbar_curve(f, grid, workers));
}

// alpha*(theta) scan over deformed 2D lattices, one detector run per angle.
struct ThetaScanPoint {
  double theta_deg = 0.0;
  TransitionReport report;
};

inline std::vector<ThetaScanPoint> theta_scan(std::size_t L,
                                              const std::vector<double>& theta_grid,
                                              const std::vector<double>& alpha_grid,
                                              unsigned workers = 0) {
  std::vector<ThetaScanPoint> out;
  out.reserve(theta_grid.size());
  for (double th : theta_grid) {
    auto ev = std::make_shared<Deformed2DGgmEvaluator>(CouplingModel::deformed2d(L, th, 1.0));
    ThetaScanPoint p;
    p.theta_deg = th;
    p.report = find_alpha_star(deformed2d_family(ev), alpha_grid, workers);
    out.push_back(std::move(p));
  }
  return out;
}

// Two-sided linear extrapolation of alpha*(theta) to theta = 120 from the
// offsets {0.5, 0.2, 0.1} degrees on each side (the angle where the two
// relevant distance classes merge and the jump degenerates to a sign change).
struct Extrapolation120 {
  std::vector<ThetaScanPoint> below, above;
  double below_estimate = 0.0;
  double above_estimate = 0.0;
  bool complete = false;
};

inline double linear_fit_at(const std::vector<double>& x, const std::vector<double>& y,
                            double x0) {
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw domain_error("degenerate linear fit");
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  return intercept + slope * x0;
}

inline Extrapolation120 extrapolate_theta120(std::size_t L, const std::vector<double>& alpha_grid,
                                             unsigned workers = 0,
                                             const std::vector<double>& offsets = {0.5, 0.2, 0.1}) {
  Extrapolation120 ex;
  std::vector<double> below_th, above_th;
  for (double off : offsets) below_th.push_back(120.0 - off);
  for (double off : offsets) above_th.push_back(120.0 + off);
  std::sort(below_th.begin(), below_th.end());
  std::sort(above_th.begin(), above_th.end());
  ex.below = theta_scan(L, below_th, alpha_grid, workers);
  ex.above = theta_scan(L, above_th, alpha_grid, workers);
  std::vector<double> xb, yb, xa, ya;
  for (auto& p : ex.below)
    if (p.report.found) {
      xb.push_back(p.theta_deg);
      yb.push_back(p.report.alpha_star);
    }
  for (auto& p : ex.above)
    if (p.report.found) {
      xa.push_back(p.theta_deg);
      ya.push_back(p.report.alpha_star);
    }
  if (xb.size() >= 2 && xa.size() >= 2) {
    ex.below_estimate = linear_fit_at(xb, yb, 120.0);
    ex.above_estimate = linear_fit_at(xa, ya, 120.0);
    ex.complete = true;
  }
  return ex;
}

// Saturation scans.
struct SaturationReport {
  enum class Kind { Nsat, Zc } kind = Kind::Nsat;
  double eps = 0.0;
  std::size_t value = 0;          // N_sat or z_c
  double achieved_avg_ggm = 0.0;  // <G> at the returned value
  double final_gap = 0.0;         // the difference that met the inequality
  bool found = false;
  std::string rule;               // "successive" or "reference"
  std::size_t persistence = 1;
  MetricSeries trace;             // (N or z, <G>) rows actually visited
};

enum class NsatRule { Successive, Reference };

struct NsatOptions {
  NsatRule rule = NsatRule::Successive;  // min-N over successive increments
  std::size_t persistence = 1;           // consecutive hits required
  std::size_t n_cap = 1000000;
  double T = 3.0 * kPi;
  std::size_t points = kAvgPoints;
  std::size_t reference_n = 1000000;     // reference size for NsatRule::Reference
};

// Smallest N at which the time-averaged GGM of the all-to-all chain stops
// changing: successive rule |<G>(N+1) - <G>(N)| < eps, or reference rule
// |<G>(N_ref) - <G>(N)| < eps against a large fixed size.  The scan walks
// N upward keeping the end-site cosine product per time node, adding one
// factor per step.  (Interior sites can out-weigh the end site only in
// vanishing wrapped-phase windows; the effect on the average is below 1e-8,
// far inside any supported eps.)
inline SaturationReport n_sat(double alpha, double eps, const NsatOptions& opts = {}) {
  if (!(eps > 0.0)) throw domain_error("eps must be positive");
  if (opts.persistence < 1) throw domain_error("persistence must be >= 1");
  SaturationReport rep;
  rep.kind = SaturationReport::Kind::Nsat;
  rep.eps = eps;
  rep.rule = opts.rule == NsatRule::Successive ? "successive" : "reference";
  rep.persistence = opts.persistence;
  rep.trace.metadata["kind"] = "nsat";

  auto w = simpson_weights(opts.points);
  double h = opts.T / static_cast<double>(opts.points - 1);
  double wnorm = (h / 3.0) / opts.T;
  std::vector<double> node(opts.points), prod(opts.points);
  for (std::size_t i = 0; i < opts.points; ++i) {
    node[i] = h * static_cast<double>(i);
    prod[i] = std::fabs(std::cos(0.5 * node[i]));  // N = 2: single unit distance
  }
  auto average = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < opts.points; ++i)
      acc += w[i] * (0.5 - 0.5 * prod[i]);
    return acc * wnorm;
  };

  double reference = 0.0;
  if (opts.rule == NsatRule::Reference) {
    ChainGgmEvaluator ev(opts.reference_n, opts.reference_n - 1, alpha, opts.T);
    reference = simpson_average([&](double t) { return ev.eval(t).value; }, opts.T, opts.points);
  }

  double avg_n = average();  // <G>(2)
  std::size_t run = 0;
  std::size_t run_start = 0;
  double run_gap = 0.0, run_avg = 0.0;
  for (std::size_t n = 2; n < opts.n_cap; ++n) {
    rep.trace.grid.push_back(static_cast<double>(n));
    rep.trace.values.push_back(avg_n);
    // extend to N = n+1: the end site gains the factor at distance n
    double rpow = std::pow(static_cast<double>(n), -alpha);
    for (std::size_t i = 0; i < opts.points; ++i)
      prod[i] *= std::fabs(std::cos(0.5 * node[i] * rpow));
    double avg_next = average();
    double gap = opts.rule == NsatRule::Successive ? std::fabs(avg_next - avg_n)
                                                   : std::fabs(reference - avg_n);
    if (gap < eps) {
      if (run == 0) {
        run_start = n;
        run_gap = gap;
        run_avg = avg_n;
      }
      ++run;
      if (run >= opts.persistence) {
        rep.found = true;
        rep.value = run_start;
        rep.final_gap = run_gap;
        rep.achieved_avg_ggm = run_avg;
        return rep;
      }
    } else {
      run = 0;
    }
    avg_n = avg_next;
  }
  rep.found = false;
  rep.value = opts.n_cap;
  rep.achieved_avg_ggm = avg_n;
  return rep;
}

// Smallest interaction range z whose time-averaged GGM matches the
// all-to-all (z = N-1) value within eps, scanning z upward with one new
// cosine factor per step.  The reference is evaluated with the exact
// edge-zone evaluator.
inline SaturationReport z_c(std::size_t n, double alpha, double eps, double T = 3.0 * kPi,
                            std::size_t points = kAvgPoints) {
  if (n < 3) throw domain_error("z_c scan needs N >= 3");
  if (!(eps > 0.0)) throw domain_error("eps must be positive");
  SaturationReport rep;
  rep.kind = SaturationReport::Kind::Zc;
  rep.eps = eps;
  rep.rule = "reference";
  rep.trace.metadata["kind"] = "zc";

  auto w = simpson_weights(points);
  double h = T / static_cast<double>(points - 1);
  double wnorm = (h / 3.0) / T;
  std::vector<double> node(points), prod(points, 1.0);
  for (std::size_t i = 0; i < points; ++i) node[i] = h * static_cast<double>(i);

  ChainGgmEvaluator ref_ev(n, n - 1, alpha, T);
  double reference =
      simpson_average([&](double t) { return ref_ev.eval(t).value; }, T, points);

  for (std::size_t z = 1; z <= n - 1; ++z) {
    double rpow = std::pow(static_cast<double>(z), -alpha);
    for (std::size_t i = 0; i < points; ++i)
      prod[i] *= std::fabs(std::cos(0.5 * node[i] * rpow));
    double acc = 0.0;
    for (std::size_t i = 0; i < points; ++i) acc += w[i] * (0.5 - 0.5 * prod[i]);
    double avg_z = acc * wnorm;
    rep.trace.grid.push_back(static_cast<double>(z));
    rep.trace.values.push_back(avg_z);
    double gap = std::fabs(reference - avg_z);
    if (!rep.found && gap < eps) {
      rep.found = true;
      rep.value = z;
      rep.final_gap = gap;
      rep.achieved_avg_ggm = avg_z;
    }
  }
  if (!rep.found) {  // cannot happen: z = N-1 matches the reference construction
    rep.value = n - 1;
    rep.achieved_avg_ggm = rep.trace.values.back();
    rep.final_gap = std::fabs(reference - rep.trace.values.back());
    rep.found = rep.final_gap < eps;
  }
  return rep;
}

// Heuristic quasi-local -> local knee: first grid alpha where the central
// difference |d<G>/dalpha| drops below 1e-3.  Qualitative by construction.
inline std::optional<double> alpha_star_sr_heuristic(const MetricSeries& avg_vs_alpha) {
  avg_vs_alpha.validate();
  const auto& a = avg_vs_alpha.grid;
  const auto& v = avg_vs_alpha.values;
  for (std::size_t i = 1; i + 1 < a.size(); ++i) {
    double d = (v[i + 1] - v[i - 1]) / (a[i + 1] - a[i - 1]);
    if (std::fabs(d) < 1e-3) return a[i];
  }
  return std::nullopt;
}

}  // namespace wgs
