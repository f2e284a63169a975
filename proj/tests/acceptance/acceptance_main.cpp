// Acceptance gate: one criterion per invocation (or "all"), one PASS/FAIL
// line per criterion on stdout.  Tolerances are pinned here, next to each
// check.  Exit code 0 only if every selected criterion passed.
//
// Criteria 1, 8 and 9 probe external reference claims that the implemented
// definitions do not reproduce; their checks are implemented faithfully and
// report honest FAIL lines with the measured counter-evidence.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wgs/wgs.hpp"

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double urand(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

std::string fmt(double v) { return wgs::format_double(v); }

// ---------------------------------------------------------------------- C1
// Oracle equivalence on the full sampled domain: |brute - closed| <= 1e-10
// with a single-site brute-force argmax, 200 seeded samples, N in 2..12.
Outcome c1() {
  constexpr double kTol = 1e-10;
  constexpr std::size_t kTrials = 200;
  std::mt19937_64 rng(7);

  struct Trial {
    bool twod;
    std::size_t n, z, side;
    double theta, alpha, t;
  };
  std::vector<Trial> trials(kTrials);
  for (auto& tr : trials) {
    tr.twod = (rng() % 5 == 0);
    if (tr.twod) {
      tr.side = (rng() % 2 == 0) ? 3 : 2;
      tr.n = tr.side * tr.side;
      tr.z = tr.n - 1;
      tr.theta = urand(rng, 90.0, 150.0);
    } else {
      tr.side = 0;
      tr.theta = 0.0;
      tr.n = 2 + rng() % 11;  // 2..12
      tr.z = 1 + rng() % (tr.n - 1);
    }
    tr.alpha = urand(rng, 0.0, 6.0);
    tr.t = urand(rng, 0.0, 3.0 * wgs::kPi);
  }

  std::size_t matches = 0, multi_argmax = 0;
  double worst = 0.0;
  std::vector<std::string> examples;
  for (const auto& tr : trials) {
    auto model = tr.twod ? wgs::CouplingModel::deformed2d(tr.side, tr.theta, tr.alpha)
                         : wgs::CouplingModel::chain(tr.n, tr.alpha, tr.z);
    auto brute = wgs::ggm_brute(wgs::build_wgs(model, tr.t));
    auto closed = wgs::ggm_general(model, tr.t);
    double delta = std::fabs(brute.value - closed.value);
    worst = std::max(worst, delta);
    bool single = brute.argmax_subset.size() == 1;
    if (!single) ++multi_argmax;
    if (delta <= kTol && single) {
      ++matches;
    } else if (examples.size() < 3) {
      std::ostringstream ex;
      ex << (tr.twod ? "2D L=" + std::to_string(tr.side) : "chain N=" + std::to_string(tr.n))
         << " z=" << tr.z << " alpha=" << fmt(tr.alpha) << " t=" << fmt(tr.t)
         << ": brute=" << fmt(brute.value) << " (|A|=" << brute.argmax_subset.size()
         << ") closed=" << fmt(closed.value);
      examples.push_back(ex.str());
    }
  }

  // the sharpest counterexample: at z=2, t=2pi only the r=2 bonds survive,
  // the chain factorizes into odd x even and the true GGM is exactly zero
  auto fmodel = wgs::CouplingModel::chain(6, 1.0, 2);
  auto fbrute = wgs::ggm_brute(wgs::build_wgs(fmodel, 2.0 * wgs::kPi));
  auto fclosed = wgs::ggm_general(fmodel, 2.0 * wgs::kPi);

  Outcome out;
  out.pass = matches == kTrials;
  std::ostringstream d;
  d << matches << "/" << kTrials << " samples match within " << fmt(kTol)
    << " with single-site argmax; max |delta| = " << fmt(worst) << "; " << multi_argmax
    << " multi-site optima";
  if (!out.pass) {
    d << "\n  - the single-site form is an upper bound, not the bipartite optimum, once t"
         " exceeds ~1.5pi (wrapped cosines revive multi-site splits)";
    for (const auto& ex : examples) d << "\n  - sample: " << ex;
    d << "\n  - factorization witness (N=6, z=2, t=2pi, alpha=1): brute=" << fmt(fbrute.value)
      << " exactly biseparable, closed=" << fmt(fclosed.value) << ", argmax {1,3,5}";
  }
  out.detail = d.str();
  return out;
}

// ---------------------------------------------------------------------- C2
// Closed-form subset reductions match dense partial traces entrywise to
// 1e-12 (and the spectrum ignores intra-subset phases), 100 seeded cases.
Outcome c2() {
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(2);
  std::size_t ok = 0;
  double worst_entry = 0.0, worst_spec = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 3 + rng() % 12;  // 3..14
    std::size_t z = 1 + rng() % (n - 1);
    double alpha = urand(rng, 0.0, 6.0);
    double t = urand(rng, 0.0, 3.0 * wgs::kPi);
    std::size_t w = 1 + rng() % std::min<std::size_t>(7, n - 1);
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i + 1;
    for (std::size_t j = 0; j < w; ++j) std::swap(pool[j], pool[j + rng() % (n - j)]);
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<long>(w));

    auto model = wgs::CouplingModel::chain(n, alpha, z);
    auto inv = wgs::spectrum_invariance_check(model, t, subset);
    worst_entry = std::max(worst_entry, inv.entry_gap);
    worst_spec = std::max({worst_spec, inv.phase_gap, inv.dense_gap});
    if (inv.entry_gap <= kTol && inv.phase_gap <= kTol && inv.dense_gap <= kTol) ++ok;
  }
  Outcome out;
  out.pass = ok == 100;
  out.detail = std::to_string(ok) + "/100 cases within " + fmt(kTol) +
               " (max entry gap " + fmt(worst_entry) + ", max spectral gap " +
               fmt(worst_spec) + ")";
  return out;
}

// ---------------------------------------------------------------------- C3
// Fixed points of the closed form, tolerance 1e-12.
Outcome c3() {
  constexpr double kTol = 1e-12;
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::fabs(got - want)); };
  for (std::size_t n : {2, 5, 9, 12}) {
    for (double alpha : {0.3, 1.0, 2.7}) {
      auto model = wgs::CouplingModel::chain_full(n, alpha);
      check(wgs::ggm_general(model, 0.0).value, 0.0);
      check(wgs::ggm_general(model, wgs::kPi).value, 0.5);
    }
  }
  for (std::size_t z : {2, 3, 5, 9})
    check(wgs::ggm_general(wgs::CouplingModel::chain(10, 1.0, z), 2.0 * wgs::kPi).value, 0.5);
  auto twod = wgs::CouplingModel::deformed2d(4, 125.0, 1.2);
  check(wgs::ggm_general(twod, 0.0).value, 0.0);
  check(wgs::ggm_general(twod, wgs::kPi).value, 0.5);

  Outcome out;
  out.pass = worst <= kTol;
  out.detail = "max deviation " + fmt(worst) + " across G(0)=0, G(pi)=1/2, G(2pi)|alpha=1 = 1/2";
  return out;
}

// ---------------------------------------------------------------------- C4
// Nearest-neighbour average equals 1/2 - 1/pi within 1e-6.
Outcome c4() {
  constexpr double kTol = 1e-6;
  const double want = 0.5 - 1.0 / wgs::kPi;
  double got = wgs::avg_ggm(wgs::CouplingModel::chain(100, 1.0, 1));
  Outcome out;
  out.pass = std::fabs(got - want) <= kTol;
  out.detail = "<G>_{3pi}(z=1) = " + fmt(got) + ", analytic 1/2 - 1/pi = " + fmt(want) +
               ", |diff| = " + fmt(std::fabs(got - want));
  return out;
}

// ---------------------------------------------------------------------- C5
// 1D transition at N=5000 on a 0.001 grid: alpha* = 1.000 +- 0.001 with a
// flagged jump in Gbar and a kink in the alpha derivative.
Outcome c5() {
  constexpr double kTol = 1e-3;
  auto family = wgs::chain_family(5000, 4999);
  auto rep = wgs::find_alpha_star(family, wgs::uniform_grid(0.9, 1.1, 0.001));
  Outcome out;
  out.pass = rep.found && std::fabs(rep.alpha_star - 1.0) <= kTol &&
             rep.mode == wgs::TransitionReport::Mode::JumpCell && rep.alpha_kink;
  std::ostringstream d;
  d << "alpha* = " << fmt(rep.alpha_star) << " (want 1.000 +- 0.001), mode="
    << (rep.mode == wgs::TransitionReport::Mode::JumpCell ? "jump" : "other")
    << ", jump=" << fmt(rep.jump) << ", dG/dt sides " << fmt(rep.side_derivatives.first)
    << "/" << fmt(rep.side_derivatives.second) << " (t-kink " << (rep.t_kink ? "yes" : "no")
    << "), d/dalpha side gap " << fmt(rep.dalpha_side_gap) << " (alpha-kink "
    << (rep.alpha_kink ? "yes" : "no") << ")";
  out.detail = d.str();
  return out;
}

// ---------------------------------------------------------------------- C6
// 2D transitions on the 40x40 lattice: 90 and 135 degrees at alpha* = 2.00
// +- 0.01; alpha*(theta) decreasing on (90,120) and increasing on (120,135);
// two-sided extrapolation to 120 degrees lands at 1.261 +- 0.01.
Outcome c6() {
  constexpr double kTol90 = 0.01, kTolHoney = 0.01;
  const std::size_t L = 40;
  std::ostringstream d;
  bool pass = true;

  auto fine = wgs::uniform_grid(1.8, 2.2, 0.0025);
  auto ends = wgs::theta_scan(L, {90.0, 135.0}, fine);
  for (const auto& p : ends) {
    bool ok = p.report.found && std::fabs(p.report.alpha_star - 2.0) <= kTol90;
    pass = pass && ok;
    d << "theta=" << fmt(p.theta_deg) << " -> alpha*=" << fmt(p.report.alpha_star) << "; ";
  }

  auto mid = wgs::uniform_grid(1.1, 2.2, 0.005);
  auto mono = wgs::theta_scan(L, {95.0, 105.0, 115.0, 125.0, 130.0}, mid);
  for (const auto& p : mono) {
    pass = pass && p.report.found;
    d << "theta=" << fmt(p.theta_deg) << " -> " << fmt(p.report.alpha_star) << "; ";
  }
  if (mono.size() == 5 && mono[0].report.found && mono[1].report.found &&
      mono[2].report.found && mono[3].report.found && mono[4].report.found) {
    bool decreasing = mono[0].report.alpha_star > mono[1].report.alpha_star &&
                      mono[1].report.alpha_star > mono[2].report.alpha_star;
    bool increasing = mono[3].report.alpha_star < mono[4].report.alpha_star;
    pass = pass && decreasing && increasing;
    d << "monotone " << (decreasing && increasing ? "ok" : "VIOLATED") << "; ";
  }

  auto ex = wgs::extrapolate_theta120(L, wgs::uniform_grid(1.15, 1.45, 0.0025));
  if (!ex.complete) {
    pass = false;
    d << "extrapolation incomplete";
  } else {
    bool ok = std::fabs(ex.below_estimate - 1.261) <= kTolHoney &&
              std::fabs(ex.above_estimate - 1.261) <= kTolHoney;
    pass = pass && ok;
    d << "alpha*(120) below/above = " << fmt(ex.below_estimate) << "/"
      << fmt(ex.above_estimate) << " (want 1.261 +- 0.01)";
  }

  return Outcome{pass, d.str()};
}

// ---------------------------------------------------------------------- C7
// Million-site all-to-all average at alpha = 1.5.
Outcome c7() {
  constexpr double kCenter = 0.331971, kTol = 5e-4;
  double got = wgs::avg_ggm(wgs::CouplingModel::chain(1000000, 1.5, 999999));
  Outcome out;
  out.pass = std::fabs(got - kCenter) <= kTol;
  out.detail = "<G>_{3pi}(alpha=1.5, N=1e6) = " + fmt(got) + " (want " + fmt(kCenter) +
               " +- " + fmt(kTol) + ")";
  return out;
}

// ---------------------------------------------------------------------- C8
// Saturation-size table at eps = 1e-4 against the target values, tolerance
// +-5%.  The successive-difference rule saturates far earlier; the
// reference-rule reconstruction shows which threshold the target table
// actually encodes.
Outcome c8() {
  constexpr double kEps = 1e-4, kRel = 0.05;
  const double alphas[] = {1.0, 1.5, 2.0, 3.0, 5.0};
  const std::size_t target[] = {4521, 117, 29, 9, 5};

  wgs::NsatOptions succ;  // defaults: successive rule, eps scan to 1e6
  std::ostringstream d;
  bool pass = true;
  std::size_t succ_vals[5];
  double avg15 = 0.0;
  for (int i = 0; i < 5; ++i) {
    auto rep = wgs::n_sat(alphas[i], kEps, succ);
    succ_vals[i] = rep.value;
    if (alphas[i] == 1.5) avg15 = rep.achieved_avg_ggm;
    double rel = std::fabs(static_cast<double>(rep.value) - static_cast<double>(target[i])) /
                 static_cast<double>(target[i]);
    if (!(rep.found && rel <= kRel)) pass = false;
  }
  d << "successive rule @1e-4: ";
  for (int i = 0; i < 5; ++i)
    d << "alpha=" << fmt(alphas[i]) << "->" << succ_vals[i] << " (want " << target[i]
      << ") ";
  d << "; <G> at alpha=1.5 saturation = " << fmt(avg15);

  if (!pass) {
    d << "\n  - the target table does not follow from the successive rule at eps=1e-4:"
         " successive gaps shrink ~N^(-2*alpha), crossing 1e-4 at the sizes above";
    wgs::NsatOptions ref;
    ref.rule = wgs::NsatRule::Reference;
    d << "\n  - reference rule (|<G>(N) - <G>(1e6)| < eps) @1e-4:";
    for (int i = 0; i < 5; ++i) {
      auto rep = wgs::n_sat(alphas[i], kEps, ref);
      d << " alpha=" << fmt(alphas[i]) << "->" << rep.value;
    }
    d << "\n  - reference rule @1.03e-5 reconstructs the table:";
    for (int i = 0; i < 5; ++i) {
      auto rep = wgs::n_sat(alphas[i], 1.03e-5, ref);
      d << " alpha=" << fmt(alphas[i]) << "->" << rep.value << " (want " << target[i]
        << ")";
    }
  }
  return Outcome{pass, d.str()};
}

// ---------------------------------------------------------------------- C9
// Critical range at N=120, alpha=1.82: target z_c = 41 under at least one
// of eps in {1e-3, 1e-4}, exact match required for the reproducing eps.
Outcome c9() {
  const std::size_t n = 120;
  const double alpha = 1.82;
  auto r3 = wgs::z_c(n, alpha, 1e-3);
  auto r4 = wgs::z_c(n, alpha, 1e-4);
  bool pass = (r3.found && r3.value == 41) || (r4.found && r4.value == 41);
  std::ostringstream d;
  d << "z_c(eps=1e-3) = " << r3.value << ", z_c(eps=1e-4) = " << r4.value
    << " (want 41 for at least one)";
  if (pass) {
    d << "; reproduced by eps=" << ((r3.found && r3.value == 41) ? "1e-3" : "1e-4");
  } else {
    // measure which eps would yield 41: need gap(41) < eps <= min gap below 41
    wgs::ChainGgmEvaluator ref_ev(n, n - 1, alpha, 3.0 * wgs::kPi);
    double reference = wgs::simpson_average(
        [&](double t) { return ref_ev.eval(t).value; }, 3.0 * wgs::kPi, wgs::kAvgPoints);
    const auto& v = r3.trace.values;  // z = 1..119
    double need_hi = 1e9;
    for (std::size_t z = 1; z < 41; ++z)
      need_hi = std::min(need_hi, std::fabs(reference - v[z - 1]));
    double need_lo = std::fabs(reference - v[41 - 1]);
    d << "\n  - z_c = 41 requires eps in (" << fmt(need_lo) << ", " << fmt(need_hi)
      << "]: both probed thresholds sit outside that window";
  }
  return Outcome{pass, d.str()};
}

// --------------------------------------------------------------------- C10
// Local-measurement reduction: corrected fidelity 1 - 1e-10 over every
// outcome string of random measured subsets; omitting the corrections must
// cost at least 1e-3 of fidelity somewhere in the ensemble.
Outcome c10() {
  constexpr double kFidTol = 1e-10, kRawDrop = 1e-3;
  std::mt19937_64 rng(10);
  double min_fid = 1.0, min_raw_on_ones = 1.0;
  std::size_t strings = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 4 + rng() % 7;  // 4..10
    std::size_t z = 1 + rng() % (n - 1);
    double alpha = urand(rng, 0.0, 6.0);
    double t = urand(rng, 0.0, 3.0 * wgs::kPi);
    std::size_t m = 1 + rng() % (n - 2);  // keep at least two sites
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i + 1;
    for (std::size_t j = 0; j < m; ++j) std::swap(pool[j], pool[j + rng() % (n - j)]);
    std::vector<std::size_t> sites(pool.begin(), pool.begin() + static_cast<long>(m));
    std::sort(sites.begin(), sites.end());

    auto model = wgs::CouplingModel::chain(n, alpha, z);
    for (std::size_t word = 0; word < (std::size_t{1} << m); ++word) {
      std::vector<int> outc(m);
      bool any_one = false;
      for (std::size_t j = 0; j < m; ++j) {
        outc[j] = static_cast<int>((word >> j) & 1);
        any_one = any_one || outc[j] == 1;
      }
      auto rc = wgs::verify_reduction(model, t, sites, outc);
      min_fid = std::min(min_fid, rc.fidelity);
      if (any_one) min_raw_on_ones = std::min(min_raw_on_ones, rc.fidelity_raw);
      ++strings;
    }
  }
  Outcome out;
  out.pass = min_fid >= 1.0 - kFidTol && min_raw_on_ones < 1.0 - kRawDrop;
  out.detail = "min corrected fidelity " + fmt(min_fid) + " over " + std::to_string(strings) +
               " outcome strings; min uncorrected fidelity on outcome-1 branches " +
               fmt(min_raw_on_ones);
  return out;
}

// --------------------------------------------------------------------- C11
// Periodicity at integer alpha, z <= 3, on 1000-point grids, 1e-12.
Outcome c11() {
  constexpr double kTol = 1e-12;
  double worst = 0.0;
  for (double alpha : {0.0, 1.0, 2.0, 3.0}) {
    for (std::size_t z : {1, 2, 3}) {
      auto model = wgs::CouplingModel::chain(12, alpha, z);
      double period = wgs::period_of_chain(12, alpha, z);
      auto grid = wgs::uniform_grid(0.0, 2.0 * wgs::kPi, 2.0 * wgs::kPi / 999.0);
      for (double t : grid) {
        double diff = std::fabs(wgs::ggm_general(model, t + period).value -
                                wgs::ggm_general(model, t).value);
        worst = std::max(worst, diff);
      }
    }
  }
  Outcome out;
  out.pass = worst <= kTol;
  out.detail = "max |G(t + period) - G(t)| = " + fmt(worst) + " over 12 (alpha, z) pairs x " +
               "1000-point grids";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::map<int, std::function<Outcome()>> criteria = {
      {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5},  {6, c6},
      {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11},
  };

  std::vector<int> selected;
  std::string arg = argc > 1 ? argv[1] : "all";
  if (arg == "all") {
    for (const auto& [k, fn] : criteria) selected.push_back(k);
  } else {
    try {
      int k = std::stoi(arg);
      if (!criteria.count(k)) throw std::out_of_range(arg);
      selected.push_back(k);
    } catch (const std::exception&) {
      std::cerr << "usage: acceptance [1-11|all]\n";
      return 2;
    }
  }

  bool all_pass = true;
  for (int k : selected) {
    auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all_pass = all_pass && out.pass;
    std::cout << "C" << k << " " << (out.pass ? "PASS" : "FAIL") << ": " << out.detail
              << "  [" << wgs::format_double(secs) << "s]" << std::endl;
  }
  return all_pass ? 0 : 1;
}
