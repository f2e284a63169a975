#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "wgs/errors.hpp"
#include "wgs/exact.hpp"
#include "wgs/lattice.hpp"

namespace wgs {

inline constexpr std::size_t kMaxRdmSubset = 12;

// Closed-form reduced state on `subset` (1-based site labels):
//
//   rho[s,s'] = 2^(-n) e^{-i(thetaA(s)-thetaA(s'))}
//               prod_{l not in A} e^{-i dl/2} cos(dl/2),
//   dl = sum_{k in A} g_{kl} (s_k - s'_k),
//   thetaA(s) = sum_{k<k' in A} g_{kk'} s_k s_{k'}.
//
// Magnitudes accumulate in log space so deep products underflow to exact
// zeros instead of denormal noise.  Works for any lattice size; only the
// subset dimension is capped.  `intra_phases = false` drops the e^{-i thetaA}
// factor (a local-unitary change that must leave the spectrum alone).
inline Eigen::MatrixXcd rdm_subset(const CouplingModel& model, double t,
                                   std::vector<std::size_t> subset,
                                   bool intra_phases = true) {
  const std::size_t N = model.n_sites();
  std::sort(subset.begin(), subset.end());
  if (subset.empty()) throw domain_error("subset must be nonempty");
  if (subset.size() > kMaxRdmSubset)
    throw capacity_error("reduced-state subset capped at " + std::to_string(kMaxRdmSubset) +
                         " sites");
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 1 || subset[i] > N) throw domain_error("subset site out of range");
    if (i && subset[i] == subset[i - 1]) throw domain_error("subset sites must be distinct");
  }
  const std::size_t n = subset.size();
  const std::size_t dim = std::size_t{1} << n;
  // bit p (from the least significant end) of a subset configuration is
  // subset[n-1-p], i.e. subset[0] is the most significant bit
  auto site_of_bit = [&](std::size_t p) { return subset[n - 1 - p]; };

  std::vector<double> thetaA(dim, 0.0);
  if (intra_phases && n >= 2) {
    for (std::size_t s = 1; s < dim; ++s) {
      std::size_t low = static_cast<std::size_t>(std::countr_zero(s));
      std::size_t rest = s & (s - 1);
      double th = thetaA[rest];
      std::size_t m = rest;
      while (m) {
        std::size_t b = static_cast<std::size_t>(std::countr_zero(m));
        m &= m - 1;
        th += model.weight(site_of_bit(low), site_of_bit(b), t);
      }
      thetaA[s] = th;
    }
  }

  std::vector<double> logmag(dim * dim, 0.0);
  std::vector<std::uint8_t> negative(dim * dim, 0);
  std::vector<double> U(dim, 0.0), T(dim, 0.0);
  std::size_t next = 0;  // walks the sorted subset once per environment pass
  for (std::size_t l = 1; l <= N; ++l) {
    if (next < n && subset[next] == l) {
      ++next;
      continue;
    }
    for (std::size_t s = 1; s < dim; ++s) {
      std::size_t low = static_cast<std::size_t>(std::countr_zero(s));
      T[s] = T[s & (s - 1)] + model.weight(site_of_bit(low), l, t);
    }
    for (std::size_t s = 0; s < dim; ++s) U[s] += T[s];
    for (std::size_t s = 0; s < dim; ++s)
      for (std::size_t sp = s + 1; sp < dim; ++sp) {
        double f = std::cos(0.5 * (T[s] - T[sp]));
        logmag[s * dim + sp] += std::log(std::fabs(f));
        negative[s * dim + sp] ^= static_cast<std::uint8_t>(f < 0.0);
      }
  }

  Eigen::MatrixXcd rho(dim, dim);
  const double base = std::pow(2.0, -static_cast<double>(n));
  for (std::size_t s = 0; s < dim; ++s) {
    rho(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = base;
    for (std::size_t sp = s + 1; sp < dim; ++sp) {
      double mag = base * std::exp(logmag[s * dim + sp]);
      double angle = -0.5 * (U[s] - U[sp]) - (thetaA[s] - thetaA[sp]);
      std::complex<double> v = std::polar(negative[s * dim + sp] ? -mag : mag, angle);
      rho(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(sp)) = v;
      rho(static_cast<Eigen::Index>(sp), static_cast<Eigen::Index>(s)) = std::conj(v);
    }
  }
  return rho;
}

inline double top_eigenvalue(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline Eigen::VectorXd sorted_spectrum(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}

// Dense oracle: partial trace of the full state over the complement, formed
// as the Gram matrix of the 2^|A| x 2^|B| amplitude reshape.
inline Eigen::MatrixXcd rdm_dense(const StateVector& psi,
                                  std::vector<std::size_t> subset) {
  std::sort(subset.begin(), subset.end());
  std::vector<std::size_t> a_bits, b_bits;  // absolute bit positions, MSB first
  std::size_t next = 0;
  for (std::size_t k = 1; k <= psi.n_qubits; ++k) {
    if (next < subset.size() && subset[next] == k) {
      a_bits.push_back(psi.bit_of_site(k));
      ++next;
    } else {
      b_bits.push_back(psi.bit_of_site(k));
    }
  }
  if (next != subset.size()) throw domain_error("subset site out of range");
  if (a_bits.empty() || b_bits.empty()) throw domain_error("bipartition must be proper");
  auto arow = detail::scatter_table(a_bits);
  auto bcol = detail::scatter_table(b_bits);
  Eigen::MatrixXcd M(arow.size(), bcol.size());
  for (std::size_t r = 0; r < arow.size(); ++r)
    for (std::size_t c = 0; c < bcol.size(); ++c)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          psi.amp[arow[r] | bcol[c]];
  return M * M.adjoint();
}

// Largest reduced eigenvalue over site subsets up to size n_max.  Exhaustive
// below the stated caps; otherwise every contiguous window plus `samples`
// seeded uniform draws.  Strict improvement keeps the first (smallest, then
// earliest-enumerated) subset on ties.
struct SubsetEigReport {
  std::vector<std::size_t> argmax_subset;
  double lambda = 0.0;
  std::size_t evaluated = 0;
  bool exhaustive = false;
};

inline constexpr std::size_t kExhaustiveSubsetMaxSites = 24;
inline constexpr std::size_t kExhaustiveSubsetMaxSize = 6;

inline SubsetEigReport max_eig_over_subsets(const CouplingModel& model, double t,
                                            std::size_t n_max, std::size_t samples = 1000,
                                            std::uint64_t seed = 1) {
  const std::size_t N = model.n_sites();
  if (n_max < 1) throw domain_error("n_max must be >= 1");
  n_max = std::min(n_max, std::min(N - 1, kMaxRdmSubset));
  SubsetEigReport rep;
  rep.lambda = -1.0;
  auto consider = [&](const std::vector<std::size_t>& subset) {
    double lam = top_eigenvalue(rdm_subset(model, t, subset));
    ++rep.evaluated;
    if (lam > rep.lambda) {
      rep.lambda = lam;
      rep.argmax_subset = subset;
    }
  };

  if (N <= kExhaustiveSubsetMaxSites && n_max <= kExhaustiveSubsetMaxSize) {
    rep.exhaustive = true;
    for (std::size_t a = 1; a <= n_max; ++a) {
      std::uint64_t mask = (std::uint64_t{1} << a) - 1;
      const std::uint64_t end = std::uint64_t{1} << N;
      while (mask < end) {
        std::vector<std::size_t> subset;
        subset.reserve(a);
        for (std::size_t k = 1; k <= N; ++k)
          if (mask & (std::uint64_t{1} << (k - 1))) subset.push_back(k);
        consider(subset);
        std::uint64_t c = mask & (~mask + 1);
        std::uint64_t r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
      }
    }
    return rep;
  }

  // contiguous windows of every size first (covers all single sites)
  for (std::size_t w = 1; w <= n_max; ++w)
    for (std::size_t i = 1; i + w - 1 <= N; ++i) {
      std::vector<std::size_t> subset(w);
      for (std::size_t j = 0; j < w; ++j) subset[j] = i + j;
      consider(subset);
    }
  // seeded uniform draws: size uniform in [1, n_max], sites without
  // replacement via partial Fisher-Yates
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(N);
  for (std::size_t i = 0; i < N; ++i) pool[i] = i + 1;
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t w = 1 + static_cast<std::size_t>(rng() % n_max);
    for (std::size_t j = 0; j < w; ++j) {
      std::size_t pick = j + static_cast<std::size_t>(rng() % (N - j));
      std::swap(pool[j], pool[pick]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<long>(w));
    std::sort(subset.begin(), subset.end());
    consider(subset);
  }
  return rep;
}

// Cross-checks one subset three ways: closed form with and without the
// intra-subset phase factor (same spectrum; the factor is a local unitary)
// and the dense partial-trace oracle (same matrix).
struct SpectrumInvariance {
  double phase_gap = 0.0;   // sorted spectra, with vs without intra phases
  double dense_gap = 0.0;   // sorted spectra, closed form vs dense oracle
  double entry_gap = 0.0;   // entrywise, closed form vs dense oracle
  double offdiag_magnitude_gap = 0.0;  // | |dense| - |closed form| | off-diagonal
};

inline SpectrumInvariance spectrum_invariance_check(const CouplingModel& model, double t,
                                                    const std::vector<std::size_t>& subset) {
  const std::size_t N = model.n_sites();
  if (N > 14) throw capacity_error("invariance check needs the dense state (N <= 14)");
  if (subset.size() > 10) throw capacity_error("invariance check capped at |A| <= 10");
  Eigen::MatrixXcd rho = rdm_subset(model, t, subset, true);
  Eigen::MatrixXcd rho_nophase = rdm_subset(model, t, subset, false);
  Eigen::MatrixXcd dense = rdm_dense(build_wgs(model, t), subset);

  Eigen::VectorXd sa = sorted_spectrum(rho);
  Eigen::VectorXd sb = sorted_spectrum(rho_nophase);
  Eigen::VectorXd sd = sorted_spectrum(dense);
  SpectrumInvariance out;
  out.phase_gap = (sa - sb).cwiseAbs().maxCoeff();
  out.dense_gap = (sa - sd).cwiseAbs().maxCoeff();
  out.entry_gap = (rho - dense).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
      if (i != j)
        out.offdiag_magnitude_gap = std::max(
            out.offdiag_magnitude_gap, std::fabs(std::abs(dense(i, j)) - std::abs(rho(i, j))));
  return out;
}

}  // namespace wgs
