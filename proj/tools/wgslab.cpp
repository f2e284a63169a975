// wgslab: weighted-graph-state analysis CLI.
//
// Subcommands: ggm-curve, detect, theta-scan, avg, nsat, zc, oracle,
// rdm-check, measure.  Every run writes <outdir>/<subcommand>-<timestamp>.csv
// plus a .json sidecar carrying the full run configuration, tool version and
// wall time, and prints a one-line summary.  Exit codes: 0 success, 1 domain
// error, 2 capacity error, 3 no transition found.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wgs/wgs.hpp"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string out = "out";
  unsigned workers = 0;  // 0: WGSLAB_WORKERS env, then hardware
  std::uint64_t seed = 1;
};

void attach_common(CLI::App* sub, CommonFlags& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--workers", c.workers,
                  "Worker threads (0 = WGSLAB_WORKERS env or hardware)")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "64-bit seed for sampling subcommands")
      ->capture_default_str();
  sub->set_config("--config", "", "Flat key=value config file (flags take precedence)");
}

struct LatticeFlags {
  std::string lattice = "chain";
  std::size_t n = 0;
  std::size_t side = 0;
  double theta = 90.0;
};

void attach_lattice(CLI::App* sub, LatticeFlags& lf, bool allow_2d = true) {
  sub->add_option("--lattice", lf.lattice, "Lattice kind: chain or deformed2d")
      ->capture_default_str();
  sub->add_option("--n", lf.n, "Chain site count");
  if (allow_2d) {
    sub->add_option("--side", lf.side, "2D lattice side length L (N = L*L)");
    sub->add_option("--theta", lf.theta, "2D deformation angle in degrees [90, 150]")
        ->capture_default_str();
  }
}

std::size_t resolve_z(const std::string& zs, std::size_t n) {
  if (zs == "full") return n - 1;
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(zs, &pos);
    if (pos != zs.size()) throw std::invalid_argument(zs);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw wgs::domain_error("--z must be a positive integer or 'full', got '" + zs + "'");
  }
}

wgs::CouplingModel build_model(const LatticeFlags& lf, double alpha, const std::string& zs) {
  if (lf.lattice == "chain") {
    if (lf.n == 0) throw wgs::domain_error("--n is required for chain lattices");
    if (lf.side != 0) throw wgs::domain_error("--side conflicts with --lattice chain");
    return wgs::CouplingModel::chain(lf.n, alpha, resolve_z(zs, lf.n));
  }
  if (lf.lattice == "deformed2d") {
    if (lf.side == 0) throw wgs::domain_error("--side is required for deformed2d lattices");
    if (lf.n != 0) throw wgs::domain_error("--n conflicts with --lattice deformed2d");
    if (zs != "full")
      throw wgs::domain_error("deformed2d lattices are all-to-all; only --z full is valid");
    return wgs::CouplingModel::deformed2d(lf.side, lf.theta, alpha);
  }
  throw wgs::domain_error("unknown lattice kind '" + lf.lattice + "'");
}

json lattice_json(const LatticeFlags& lf, const std::string& zs) {
  json j;
  j["lattice"] = lf.lattice;
  if (lf.lattice == "chain") {
    j["n"] = lf.n;
    j["z"] = zs;
  } else {
    j["side"] = lf.side;
    j["theta_deg"] = lf.theta;
  }
  return j;
}

std::string cell(double v) { return wgs::format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int persist_and_report(const CommonFlags& common, const std::string& name,
                       const wgs::CsvTable& table, json meta, const std::string& summary,
                       double wall_ms, int code = 0) {
  auto stem = wgs::unique_output_stem(common.out, name, wgs::utc_timestamp());
  table.write(stem.string() + ".csv");
  meta["subcommand"] = name;
  meta["tool_version"] = wgs::version();
  meta["wall_ms"] = wall_ms;
  meta["rows"] = table.n_rows();
  meta["summary"] = summary;
  meta["seed"] = common.seed;
  meta["workers_requested"] = common.workers;
  wgs::write_json(stem.string() + ".json", meta);
  std::cout << summary << "  [" << stem.string() << ".csv]" << std::endl;
  return code;
}

// Uniform double in [lo, hi) from raw 64-bit draws (platform-independent).
double urand(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

// ---------------------------------------------------------------------------

struct GgmCurveFlags {
  LatticeFlags lat;
  std::string alphas = "1";
  std::string z = "full";
  std::string t;
};

int run_ggm_curve(const GgmCurveFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  auto alphas = wgs::parse_values(f.alphas);
  auto tgrid = wgs::parse_values(f.t);
  if (tgrid.empty()) throw wgs::domain_error("--t produced an empty grid");

  std::vector<std::string> header{"t"};
  for (double a : alphas) header.push_back("ggm_alpha" + wgs::format_double(a));

  std::vector<double> values(alphas.size() * tgrid.size());
  if (f.lat.lattice == "deformed2d") {
    auto model = build_model(f.lat, alphas[0], f.z);
    wgs::Deformed2DGgmEvaluator ev(model);
    wgs::parallel_for(
        values.size(),
        [&](std::size_t idx) {
          std::size_t ai = idx / tgrid.size(), ti = idx % tgrid.size();
          values[idx] = ev.eval(alphas[ai], tgrid[ti]).value;
        },
        common.workers);
  } else {
    std::vector<wgs::CouplingModel> models;
    models.reserve(alphas.size());
    for (double a : alphas) models.push_back(build_model(f.lat, a, f.z));
    wgs::parallel_for(
        values.size(),
        [&](std::size_t idx) {
          std::size_t ai = idx / tgrid.size(), ti = idx % tgrid.size();
          values[idx] = wgs::ggm_general(models[ai], tgrid[ti]).value;
        },
        common.workers);
  }

  wgs::CsvTable table(header);
  for (std::size_t ti = 0; ti < tgrid.size(); ++ti) {
    std::vector<std::string> row{cell(tgrid[ti])};
    for (std::size_t ai = 0; ai < alphas.size(); ++ai)
      row.push_back(cell(values[ai * tgrid.size() + ti]));
    table.add_row(std::move(row));
  }

  json cfg = lattice_json(f.lat, f.z);
  cfg["alpha"] = f.alphas;
  cfg["t"] = f.t;
  json meta;
  meta["config"] = cfg;
  std::string summary = "ggm-curve: " + std::to_string(tgrid.size()) + " t-points x " +
                        std::to_string(alphas.size()) + " alphas";
  return persist_and_report(common, "ggm-curve", table, meta, summary, sw.ms());
}

// ---------------------------------------------------------------------------

struct DetectFlags {
  LatticeFlags lat;
  std::string alpha;
  std::string z = "full";
};

const char* mode_name(wgs::TransitionReport::Mode m) {
  switch (m) {
    case wgs::TransitionReport::Mode::JumpCell: return "jump";
    case wgs::TransitionReport::Mode::SignChange: return "signchange";
    default: return "none";
  }
}

int run_detect(const DetectFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  auto grid = wgs::parse_values(f.alpha);
  auto model = build_model(f.lat, grid.empty() ? 1.0 : grid[0], f.z);
  auto family = wgs::family_for(model);
  auto curve = wgs::gbar_curve(family, grid, common.workers);
  auto rep = wgs::find_alpha_star_from_curve(family, grid, curve);

  wgs::CsvTable table({"alpha", "gbar_2pi", "gbar_forward", "gbar_backward", "t_kink"});
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.add_row({cell(grid[i]), cell(curve[i].central), cell(curve[i].forward),
                   cell(curve[i].backward), cell(curve[i].kink)});

  json cfg = lattice_json(f.lat, f.z);
  cfg["alpha"] = f.alpha;
  json meta;
  meta["config"] = cfg;
  json rj;
  rj["found"] = rep.found;
  rj["mode"] = mode_name(rep.mode);
  rj["alpha_star"] = rep.alpha_star;
  rj["jump"] = rep.jump;
  rj["grid_resolution"] = rep.grid_resolution;
  rj["side_derivative_left"] = rep.side_derivatives.first;
  rj["side_derivative_right"] = rep.side_derivatives.second;
  rj["t_kink"] = rep.t_kink;
  rj["alpha_kink"] = rep.alpha_kink;
  rj["dalpha_side_gap"] = rep.dalpha_side_gap;
  meta["transition"] = rj;

  std::string summary;
  int code = 0;
  if (rep.found) {
    summary = "alpha_star=" + wgs::format_double(rep.alpha_star) + " (mode=" +
              mode_name(rep.mode) + ", jump=" + wgs::format_double(rep.jump) +
              ", t_kink=" + (rep.t_kink ? "1" : "0") +
              ", alpha_kink=" + (rep.alpha_kink ? "1" : "0") + ")";
  } else {
    summary = "no transition found";
    code = 3;
  }
  return persist_and_report(common, "detect", table, meta, summary, sw.ms(), code);
}

// ---------------------------------------------------------------------------

struct ThetaScanFlags {
  std::size_t side = 0;
  std::string thetas;
  std::string alpha;
  bool extrapolate120 = false;
};

int run_theta_scan(const ThetaScanFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  if (f.side == 0) throw wgs::domain_error("--side is required");
  if (f.thetas.empty() && !f.extrapolate120)
    throw wgs::domain_error("provide --theta angles and/or --extrapolate120");
  auto grid = wgs::parse_values(f.alpha);
  std::vector<double> thetas;
  if (!f.thetas.empty()) thetas = wgs::parse_values(f.thetas);

  auto points = wgs::theta_scan(f.side, thetas, grid, common.workers);

  wgs::CsvTable table(
      {"theta_deg", "found", "mode", "alpha_star", "jump", "grid_resolution"});
  std::size_t n_found = 0;
  auto add_point = [&](const wgs::ThetaScanPoint& p) {
    if (p.report.found) ++n_found;
    table.add_row({cell(p.theta_deg), cell(p.report.found), mode_name(p.report.mode),
                   cell(p.report.alpha_star), cell(p.report.jump),
                   cell(p.report.grid_resolution)});
  };
  for (const auto& p : points) add_point(p);

  json meta;
  json cfg;
  cfg["side"] = f.side;
  cfg["theta"] = f.thetas;
  cfg["alpha"] = f.alpha;
  cfg["extrapolate120"] = f.extrapolate120;
  meta["config"] = cfg;

  std::string summary = "theta-scan: " + std::to_string(n_found) + "/" +
                        std::to_string(points.size()) + " transitions";
  if (f.extrapolate120) {
    auto ex = wgs::extrapolate_theta120(f.side, grid, common.workers);
    for (const auto& p : ex.below) add_point(p);
    for (const auto& p : ex.above) add_point(p);
    json xj;
    xj["complete"] = ex.complete;
    if (ex.complete) {
      xj["below_estimate"] = ex.below_estimate;
      xj["above_estimate"] = ex.above_estimate;
      summary += ", alpha_star(120)=" + wgs::format_double(ex.below_estimate) + "/" +
                 wgs::format_double(ex.above_estimate) + " (below/above)";
    }
    meta["extrapolation_120"] = xj;
  }
  return persist_and_report(common, "theta-scan", table, meta, summary, sw.ms(),
                            n_found > 0 ? 0 : 3);
}

// ---------------------------------------------------------------------------

struct AvgFlags {
  LatticeFlags lat;
  std::string alphas = "1";
  std::string z = "full";
  std::string T = "3pi";
  std::size_t points = wgs::kAvgPoints;
};

int run_avg(const AvgFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  auto alphas = wgs::parse_values(f.alphas);
  double T = wgs::parse_time(f.T);
  std::vector<double> values(alphas.size());
  std::vector<wgs::CouplingModel> models;
  models.reserve(alphas.size());
  for (double a : alphas) models.push_back(build_model(f.lat, a, f.z));
  wgs::parallel_for(
      alphas.size(),
      [&](std::size_t i) { values[i] = wgs::avg_ggm(models[i], T, f.points); },
      common.workers);

  wgs::CsvTable table({"alpha", "avg_ggm"});
  for (std::size_t i = 0; i < alphas.size(); ++i)
    table.add_row({cell(alphas[i]), cell(values[i])});

  json cfg = lattice_json(f.lat, f.z);
  cfg["alpha"] = f.alphas;
  cfg["T"] = f.T;
  cfg["points"] = f.points;
  json meta;
  meta["config"] = cfg;
  std::string summary = "avg_ggm=" + wgs::format_double(values[0]) +
                        " (alpha=" + wgs::format_double(alphas[0]) + ")";
  if (alphas.size() > 1) summary += " and " + std::to_string(alphas.size() - 1) + " more";
  return persist_and_report(common, "avg", table, meta, summary, sw.ms());
}

// ---------------------------------------------------------------------------

struct NsatFlags {
  std::string alphas;
  std::string eps = "1e-4";
  std::string T = "3pi";
  std::string rule = "successive";
  std::size_t persistence = 1;
  std::size_t cap = 1000000;
  std::size_t points = wgs::kAvgPoints;
};

int run_nsat(const NsatFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  auto alphas = wgs::parse_values(f.alphas);
  auto epss = wgs::parse_values(f.eps);
  wgs::NsatOptions opts;
  if (f.rule == "successive")
    opts.rule = wgs::NsatRule::Successive;
  else if (f.rule == "reference")
    opts.rule = wgs::NsatRule::Reference;
  else
    throw wgs::domain_error("--rule must be successive or reference");
  opts.persistence = f.persistence;
  opts.n_cap = f.cap;
  opts.reference_n = f.cap;
  opts.T = wgs::parse_time(f.T);
  opts.points = f.points;

  wgs::CsvTable table({"alpha", "eps", "rule", "persistence", "n_sat", "found",
                       "achieved_avg_ggm", "final_gap"});
  std::string first;
  for (double a : alphas)
    for (double e : epss) {
      auto rep = wgs::n_sat(a, e, opts);
      if (first.empty()) first = "N_sat=" + std::to_string(rep.value);
      table.add_row({cell(a), cell(e), rep.rule, cell(rep.persistence), cell(rep.value),
                     cell(rep.found), cell(rep.achieved_avg_ggm), cell(rep.final_gap)});
    }

  json cfg;
  cfg["alpha"] = f.alphas;
  cfg["eps"] = f.eps;
  cfg["T"] = f.T;
  cfg["rule"] = f.rule;
  cfg["persistence"] = f.persistence;
  cfg["cap"] = f.cap;
  cfg["points"] = f.points;
  json meta;
  meta["config"] = cfg;
  return persist_and_report(common, "nsat", table, meta, first, sw.ms());
}

// ---------------------------------------------------------------------------

struct ZcFlags {
  std::size_t n = 0;
  double alpha = 1.0;
  std::string eps = "1e-3,1e-4";
  std::string T = "3pi";
  std::size_t points = wgs::kAvgPoints;
};

int run_zc(const ZcFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  if (f.n == 0) throw wgs::domain_error("--n is required");
  auto epss = wgs::parse_values(f.eps);
  double T = wgs::parse_time(f.T);

  wgs::CsvTable table({"eps", "z_c", "found", "achieved_avg_ggm", "final_gap"});
  std::string first;
  for (double e : epss) {
    auto rep = wgs::z_c(f.n, f.alpha, e, T, f.points);
    if (first.empty())
      first = "z_c=" + std::to_string(rep.value) + " (eps=" + wgs::format_double(e) + ")";
    table.add_row(
        {cell(e), cell(rep.value), cell(rep.found), cell(rep.achieved_avg_ggm),
         cell(rep.final_gap)});
  }

  json cfg;
  cfg["n"] = f.n;
  cfg["alpha"] = f.alpha;
  cfg["eps"] = f.eps;
  cfg["T"] = f.T;
  cfg["points"] = f.points;
  json meta;
  meta["config"] = cfg;
  return persist_and_report(common, "zc", table, meta, first, sw.ms());
}

// ---------------------------------------------------------------------------

struct OracleFlags {
  std::size_t n_max = 12;
  std::size_t trials = 200;
  std::string t_max = "3pi";
};

struct OracleTrial {
  bool twod = false;
  std::size_t n = 2, z = 1, side = 0;
  double theta = 90.0, alpha = 1.0, t = 0.0;
};

int run_oracle(const OracleFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  if (f.n_max < 2 || f.n_max > wgs::kMaxBruteQubits)
    throw wgs::domain_error("--n-max must lie in [2, 16]");
  double tmax = wgs::parse_time(f.t_max);

  // all randomness drawn up front so results are worker-count independent
  std::mt19937_64 rng(common.seed);
  std::vector<OracleTrial> trials(f.trials);
  for (auto& tr : trials) {
    bool can2d = f.n_max >= 4 && (rng() % 5 == 0);
    if (can2d) {
      tr.twod = true;
      tr.side = (f.n_max >= 9 && rng() % 2 == 0) ? 3 : 2;
      tr.n = tr.side * tr.side;
      tr.z = tr.n - 1;
      tr.theta = urand(rng, 90.0, 150.0);
    } else {
      tr.n = 2 + rng() % (f.n_max - 1);
      tr.z = 1 + rng() % (tr.n - 1);
    }
    tr.alpha = urand(rng, 0.0, 6.0);
    tr.t = urand(rng, 0.0, tmax);
  }

  struct Row {
    double brute = 0.0, closed = 0.0;
    std::size_t argmax_size = 0;
  };
  std::vector<Row> rows(trials.size());
  wgs::parallel_for(
      trials.size(),
      [&](std::size_t i) {
        const auto& tr = trials[i];
        auto model = tr.twod ? wgs::CouplingModel::deformed2d(tr.side, tr.theta, tr.alpha)
                             : wgs::CouplingModel::chain(tr.n, tr.alpha, tr.z);
        auto brute = wgs::ggm_brute(wgs::build_wgs(model, tr.t));
        rows[i].brute = brute.value;
        rows[i].argmax_size = brute.argmax_subset.size();
        rows[i].closed = wgs::ggm_general(model, tr.t).value;
      },
      common.workers);

  wgs::CsvTable table({"trial", "kind", "n", "alpha", "z", "theta_deg", "t", "ggm_brute",
                       "ggm_closed", "delta", "argmax_size", "match"});
  std::size_t matches = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& tr = trials[i];
    double delta = std::fabs(rows[i].brute - rows[i].closed);
    bool match = delta <= 1e-10 && rows[i].argmax_size == 1;
    if (match) ++matches;
    worst = std::max(worst, delta);
    table.add_row({cell(i), tr.twod ? "deformed2d" : "chain", cell(tr.n), cell(tr.alpha),
                   cell(tr.z), cell(tr.theta), cell(tr.t), cell(rows[i].brute),
                   cell(rows[i].closed), cell(delta), cell(rows[i].argmax_size),
                   cell(match)});
  }

  json cfg;
  cfg["n_max"] = f.n_max;
  cfg["trials"] = f.trials;
  cfg["t_max"] = f.t_max;
  json meta;
  meta["config"] = cfg;
  std::string summary = std::to_string(matches) + "/" + std::to_string(trials.size()) +
                        " matches, max |delta| = " + wgs::format_double(worst);
  return persist_and_report(common, "oracle", table, meta, summary, sw.ms());
}

// ---------------------------------------------------------------------------

struct RdmCheckFlags {
  std::size_t n = 12;
  std::size_t subset_max = 7;
  std::size_t trials = 100;
};

int run_rdm_check(const RdmCheckFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  if (f.n < 3 || f.n > 14) throw wgs::domain_error("--n must lie in [3, 14]");
  if (f.subset_max < 1 || f.subset_max > 10)
    throw wgs::domain_error("--subset-max must lie in [1, 10]");

  struct Trial {
    std::size_t n, z;
    double alpha, t;
    std::vector<std::size_t> subset;
  };
  std::mt19937_64 rng(common.seed);
  std::vector<Trial> trials(f.trials);
  std::vector<std::size_t> pool;
  for (auto& tr : trials) {
    tr.n = 3 + rng() % (f.n - 2);
    tr.z = 1 + rng() % (tr.n - 1);
    tr.alpha = urand(rng, 0.0, 6.0);
    tr.t = urand(rng, 0.0, 3.0 * wgs::kPi);
    std::size_t w = 1 + rng() % std::min(f.subset_max, tr.n - 1);
    pool.resize(tr.n);
    for (std::size_t i = 0; i < tr.n; ++i) pool[i] = i + 1;
    for (std::size_t j = 0; j < w; ++j)
      std::swap(pool[j], pool[j + rng() % (tr.n - j)]);
    tr.subset.assign(pool.begin(), pool.begin() + static_cast<long>(w));
    std::sort(tr.subset.begin(), tr.subset.end());
  }

  std::vector<wgs::SpectrumInvariance> rows(trials.size());
  wgs::parallel_for(
      trials.size(),
      [&](std::size_t i) {
        const auto& tr = trials[i];
        auto model = wgs::CouplingModel::chain(tr.n, tr.alpha, tr.z);
        rows[i] = wgs::spectrum_invariance_check(model, tr.t, tr.subset);
      },
      common.workers);

  wgs::CsvTable table({"trial", "n", "alpha", "z", "t", "subset", "entry_gap", "phase_gap",
                       "dense_gap", "offdiag_magnitude_gap"});
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& tr = trials[i];
    std::string subset;
    for (std::size_t j = 0; j < tr.subset.size(); ++j)
      subset += (j ? ";" : "") + std::to_string(tr.subset[j]);
    double gap = std::max({rows[i].entry_gap, rows[i].phase_gap, rows[i].dense_gap});
    if (gap <= 1e-12) ++ok;
    worst = std::max(worst, gap);
    table.add_row({cell(i), cell(tr.n), cell(tr.alpha), cell(tr.z), cell(tr.t), subset,
                   cell(rows[i].entry_gap), cell(rows[i].phase_gap), cell(rows[i].dense_gap),
                   cell(rows[i].offdiag_magnitude_gap)});
  }

  json cfg;
  cfg["n"] = f.n;
  cfg["subset_max"] = f.subset_max;
  cfg["trials"] = f.trials;
  json meta;
  meta["config"] = cfg;
  std::string summary = std::to_string(ok) + "/" + std::to_string(trials.size()) +
                        " matches, max |delta| = " + wgs::format_double(worst);
  return persist_and_report(common, "rdm-check", table, meta, summary, sw.ms());
}

// ---------------------------------------------------------------------------

struct MeasureFlags {
  LatticeFlags lat;
  double alpha = 1.0;
  std::string z = "full";
  std::string t;
  std::string sites;
  std::string outcomes;
};

int run_measure(const MeasureFlags& f, const CommonFlags& common) {
  Stopwatch sw;
  double t = wgs::parse_time(f.t);
  auto model = build_model(f.lat, f.alpha, f.z);
  std::vector<std::size_t> sites;
  for (double v : wgs::parse_list(f.sites)) {
    if (v < 1 || v != std::floor(v)) throw wgs::domain_error("--sites must be 1-based integers");
    sites.push_back(static_cast<std::size_t>(v));
  }

  json cfg = lattice_json(f.lat, f.z);
  cfg["alpha"] = f.alpha;
  cfg["t"] = f.t;
  cfg["sites"] = f.sites;
  cfg["outcomes"] = f.outcomes;
  json meta;
  meta["config"] = cfg;

  if (f.outcomes == "all") {
    const std::size_t m = sites.size();
    wgs::CsvTable table({"outcomes", "probability", "fidelity", "fidelity_raw"});
    double min_fid = 1.0, min_raw = 1.0, total_p = 0.0;
    for (std::size_t word = 0; word < (std::size_t{1} << m); ++word) {
      std::vector<int> outc(m);
      std::string label;
      for (std::size_t j = 0; j < m; ++j) {
        outc[j] = static_cast<int>((word >> (m - 1 - j)) & 1);
        label += outc[j] ? '1' : '0';
      }
      auto rc = wgs::verify_reduction(model, t, sites, outc);
      min_fid = std::min(min_fid, rc.fidelity);
      min_raw = std::min(min_raw, rc.fidelity_raw);
      total_p += rc.probability;
      table.add_row({label, cell(rc.probability), cell(rc.fidelity), cell(rc.fidelity_raw)});
    }
    meta["total_probability"] = total_p;
    std::string summary = "min fidelity=" + wgs::format_double(min_fid) + " over " +
                          std::to_string(std::size_t{1} << m) +
                          " outcome strings (min raw=" + wgs::format_double(min_raw) + ")";
    return persist_and_report(common, "measure", table, meta, summary, sw.ms());
  }

  std::vector<int> outc;
  for (double v : wgs::parse_list(f.outcomes)) {
    if (v != 0.0 && v != 1.0) throw wgs::domain_error("--outcomes must be 0/1 or 'all'");
    outc.push_back(static_cast<int>(v));
  }
  auto rc = wgs::verify_reduction(model, t, sites, outc);
  wgs::CsvTable table({"outcomes", "probability", "fidelity", "fidelity_raw"});
  std::string label;
  for (int o : outc) label += o ? '1' : '0';
  table.add_row({label, cell(rc.probability), cell(rc.fidelity), cell(rc.fidelity_raw)});
  std::string summary = "fidelity=" + wgs::format_double(rc.fidelity) +
                        " (raw=" + wgs::format_double(rc.fidelity_raw) +
                        "), p=" + wgs::format_double(rc.probability);
  return persist_and_report(common, "measure", table, meta, summary, sw.ms());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wgslab: weighted-graph-state entanglement analysis"};
  app.require_subcommand(1);

  GgmCurveFlags ggm_f;
  CommonFlags ggm_c;
  auto* sub_ggm = app.add_subcommand("ggm-curve", "GGM over a time grid, one column per alpha");
  attach_lattice(sub_ggm, ggm_f.lat);
  sub_ggm->add_option("--alpha", ggm_f.alphas, "Alpha values (comma list or start:stop:step)")
      ->capture_default_str();
  sub_ggm->add_option("--z", ggm_f.z, "Interaction range (integer or 'full')")
      ->capture_default_str();
  sub_ggm->add_option("--t", ggm_f.t, "Time grid (start:stop:step, 'pi' suffix ok)")
      ->required();
  attach_common(sub_ggm, ggm_c);

  DetectFlags det_f;
  CommonFlags det_c;
  auto* sub_det = app.add_subcommand("detect", "Locate alpha* from the Gbar_2pi(alpha) curve");
  attach_lattice(sub_det, det_f.lat);
  sub_det->add_option("--alpha", det_f.alpha, "Alpha grid (start:stop:step)")->required();
  sub_det->add_option("--z", det_f.z, "Interaction range (integer or 'full')")
      ->capture_default_str();
  attach_common(sub_det, det_c);

  ThetaScanFlags th_f;
  CommonFlags th_c;
  auto* sub_th = app.add_subcommand("theta-scan", "alpha*(theta) over deformed 2D lattices");
  sub_th->add_option("--side", th_f.side, "Lattice side length L")->required();
  sub_th->add_option("--theta", th_f.thetas, "Angles in degrees (comma list or range)");
  sub_th->add_option("--alpha", th_f.alpha, "Alpha grid (start:stop:step)")->required();
  sub_th->add_flag("--extrapolate120", th_f.extrapolate120,
                   "Scan 120 +/- {0.5,0.2,0.1} deg and extrapolate alpha* to 120 deg");
  attach_common(sub_th, th_c);

  AvgFlags avg_f;
  CommonFlags avg_c;
  auto* sub_avg = app.add_subcommand("avg", "Time-averaged GGM over [0, T]");
  attach_lattice(sub_avg, avg_f.lat);
  sub_avg->add_option("--alpha", avg_f.alphas, "Alpha values")->capture_default_str();
  sub_avg->add_option("--z", avg_f.z, "Interaction range (integer or 'full')")
      ->capture_default_str();
  sub_avg->add_option("--T", avg_f.T, "Averaging window (e.g. 3pi)")->capture_default_str();
  sub_avg->add_option("--points", avg_f.points, "Simpson nodes (odd)")->capture_default_str();
  attach_common(sub_avg, avg_c);

  NsatFlags ns_f;
  CommonFlags ns_c;
  auto* sub_ns = app.add_subcommand("nsat", "Saturation size N_sat of the all-to-all chain");
  sub_ns->add_option("--alpha", ns_f.alphas, "Alpha values")->required();
  sub_ns->add_option("--eps", ns_f.eps, "Saturation thresholds")->capture_default_str();
  sub_ns->add_option("--T", ns_f.T, "Averaging window")->capture_default_str();
  sub_ns->add_option("--rule", ns_f.rule, "successive | reference")->capture_default_str();
  sub_ns->add_option("--persistence", ns_f.persistence, "Consecutive hits required")
      ->capture_default_str();
  sub_ns->add_option("--cap", ns_f.cap, "Largest N scanned (also the reference size)")
      ->capture_default_str();
  sub_ns->add_option("--points", ns_f.points, "Simpson nodes (odd)")->capture_default_str();
  attach_common(sub_ns, ns_c);

  ZcFlags zc_f;
  CommonFlags zc_c;
  auto* sub_zc = app.add_subcommand("zc", "Critical interaction range z_c at fixed N");
  sub_zc->add_option("--n", zc_f.n, "Chain size N")->required();
  sub_zc->add_option("--alpha", zc_f.alpha, "Fall-off exponent")->required();
  sub_zc->add_option("--eps", zc_f.eps, "Match thresholds")->capture_default_str();
  sub_zc->add_option("--T", zc_f.T, "Averaging window")->capture_default_str();
  sub_zc->add_option("--points", zc_f.points, "Simpson nodes (odd)")->capture_default_str();
  attach_common(sub_zc, zc_c);

  OracleFlags or_f;
  CommonFlags or_c;
  auto* sub_or = app.add_subcommand("oracle", "Exhaustive-oracle vs closed-form GGM comparison");
  sub_or->add_option("--n-max", or_f.n_max, "Largest sampled qubit count")->capture_default_str();
  sub_or->add_option("--trials", or_f.trials, "Number of random samples")->capture_default_str();
  sub_or->add_option("--t-max", or_f.t_max, "Upper end of the sampled t range")
      ->capture_default_str();
  attach_common(sub_or, or_c);

  RdmCheckFlags rc_f;
  CommonFlags rc_c;
  auto* sub_rc = app.add_subcommand("rdm-check",
                                    "Closed-form subset RDMs vs dense partial traces");
  sub_rc->add_option("--n", rc_f.n, "Largest sampled chain size (<= 14)")->capture_default_str();
  sub_rc->add_option("--subset-max", rc_f.subset_max, "Largest subset size (<= 10)")
      ->capture_default_str();
  sub_rc->add_option("--trials", rc_f.trials, "Number of random cases")->capture_default_str();
  attach_common(sub_rc, rc_c);

  MeasureFlags me_f;
  CommonFlags me_c;
  auto* sub_me = app.add_subcommand("measure",
                                    "Z-measure sites and verify the reduction protocol");
  attach_lattice(sub_me, me_f.lat);
  sub_me->add_option("--alpha", me_f.alpha, "Fall-off exponent")->capture_default_str();
  sub_me->add_option("--z", me_f.z, "Interaction range (integer or 'full')")
      ->capture_default_str();
  sub_me->add_option("--t", me_f.t, "Evolution time")->required();
  sub_me->add_option("--sites", me_f.sites, "Measured sites, comma list")->required();
  sub_me->add_option("--outcomes", me_f.outcomes, "0/1 comma list, or 'all'")->required();
  attach_common(sub_me, me_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help goes to stdout, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (sub_ggm->parsed()) return run_ggm_curve(ggm_f, ggm_c);
    if (sub_det->parsed()) return run_detect(det_f, det_c);
    if (sub_th->parsed()) return run_theta_scan(th_f, th_c);
    if (sub_avg->parsed()) return run_avg(avg_f, avg_c);
    if (sub_ns->parsed()) return run_nsat(ns_f, ns_c);
    if (sub_zc->parsed()) return run_zc(zc_f, zc_c);
    if (sub_or->parsed()) return run_oracle(or_f, or_c);
    if (sub_rc->parsed()) return run_rdm_check(rc_f, rc_c);
    if (sub_me->parsed()) return run_measure(me_f, me_c);
  } catch (const wgs::capacity_error& e) {
    std::cerr << "capacity error: " << e.what() << std::endl;
    return 2;
  } catch (const wgs::domain_error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  std::cerr << "error: no subcommand selected\n";
  return 1;
}
