#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wgs/errors.hpp"
#include "wgs/lattice.hpp"

namespace wgs {

inline constexpr std::size_t kMaxStateQubits = 20;  // 2^20 amplitudes
inline constexpr std::size_t kMaxBruteQubits = 16;

// Dense state vector.  Site 1 is the most significant bit of the basis
// index, so |a_1 a_2 ... a_N> sits at index (a_1 a_2 ... a_N)_2.
struct StateVector {
  std::size_t n_qubits = 0;
  std::vector<std::complex<double>> amp;

  explicit StateVector(std::size_t n = 0) : n_qubits(n), amp(std::size_t{1} << n) {}

  std::size_t dim() const { return amp.size(); }

  // Bit position (from the least significant end) of 1-based site k.
  std::size_t bit_of_site(std::size_t k) const {
    if (k < 1 || k > n_qubits) throw domain_error("site index out of range");
    return n_qubits - k;
  }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& a : amp) s += std::norm(a);
    return s;
  }

  std::complex<double> inner(const StateVector& other) const {
    if (other.n_qubits != n_qubits) throw domain_error("state dimension mismatch");
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) s += std::conj(amp[i]) * other.amp[i];
    return s;
  }
};

inline double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(a.inner(b));
}

// WGS from an explicit symmetric weight matrix (row-major n x n, zero
// diagonal): amp(eta) = 2^(-n/2) exp(-i sum_{i<j in ones(eta)} W_ij).
// The phase of eta reuses the phase of eta minus its lowest set bit plus the
// couplings of that bit into the rest, so the build is O(2^n * n).
inline StateVector build_wgs_from_weights(const std::vector<double>& W, std::size_t n) {
  if (n < 1 || n > kMaxStateQubits)
    throw capacity_error("state builder handles 1.." + std::to_string(kMaxStateQubits) +
                         " qubits");
  if (W.size() != n * n) throw domain_error("weight matrix size mismatch");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> phase(dim, 0.0);
  for (std::size_t eta = 1; eta < dim; ++eta) {
    std::size_t low = static_cast<std::size_t>(std::countr_zero(eta));
    std::size_t rest = eta & (eta - 1);
    double ph = phase[rest];
    std::size_t row = (n - 1 - low) * n;  // site of bit `low`, 0-based row
    std::size_t m = rest;
    while (m) {
      std::size_t b = static_cast<std::size_t>(std::countr_zero(m));
      m &= m - 1;
      ph += W[row + (n - 1 - b)];
    }
    phase[eta] = ph;
  }
  StateVector psi(n);
  const double scale = std::pow(2.0, -0.5 * static_cast<double>(n));
  for (std::size_t eta = 0; eta < dim; ++eta)
    psi.amp[eta] = std::polar(scale, -phase[eta]);
  return psi;
}

inline StateVector build_wgs(const CouplingModel& model, double t) {
  const std::size_t n = model.n_sites();
  if (n > kMaxStateQubits)
    throw capacity_error("state builder capped at " + std::to_string(kMaxStateQubits) +
                         " qubits");
  return build_wgs_from_weights(materialize_weights(model, t), n);
}

// Exhaustive GGM: 1 - max over bipartitions (A|B) of the largest eigenvalue
// of the reduced state on A.  Subsets run over 1 <= |A| <= floor(N/2); equal
// splits are counted once by pinning site 1 into A.  The eigenvalue comes
// from the Gram matrix M M^dag of the 2^|A| x 2^|B| amplitude reshape.
struct BruteForceGgm {
  double value = 0.0;
  double lambda_max = 0.0;                 // largest reduced eigenvalue found
  std::vector<std::size_t> argmax_subset;  // 1-based site labels of A
};

namespace detail {

// Scatter table: for every integer r < 2^|bits|, distribute its bits onto the
// given absolute bit positions (descending order = most significant first).
inline std::vector<std::size_t> scatter_table(const std::vector<std::size_t>& positions) {
  const std::size_t m = positions.size();
  std::vector<std::size_t> table(std::size_t{1} << m, 0);
  for (std::size_t r = 1; r < table.size(); ++r) {
    std::size_t low = static_cast<std::size_t>(std::countr_zero(r));
    // bit low of r corresponds to positions[m - 1 - low]
    table[r] = table[r & (r - 1)] | (std::size_t{1} << positions[m - 1 - low]);
  }
  return table;
}

}  // namespace detail

inline BruteForceGgm ggm_brute(const StateVector& psi) {
  const std::size_t n = psi.n_qubits;
  if (n < 2) throw domain_error("GGM needs at least 2 sites");
  if (n > kMaxBruteQubits)
    throw capacity_error("exhaustive GGM capped at " + std::to_string(kMaxBruteQubits) +
                         " qubits");
  BruteForceGgm best;
  best.lambda_max = -1.0;
  const std::size_t half = n / 2;
  for (std::size_t a = 1; a <= half; ++a) {
    // all site masks with a bits, ascending numeric order (bit k-1 = site k)
    std::size_t mask = (std::size_t{1} << a) - 1;
    const std::size_t end = std::size_t{1} << n;
    while (mask < end) {
      if (2 * a == n && !(mask & 1)) {
        // equal split: count each bipartition once via site 1 in A
      } else {
        std::vector<std::size_t> a_bits, b_bits;  // absolute positions, MSB first
        for (std::size_t k = 1; k <= n; ++k) {
          std::size_t pos = n - k;
          if (mask & (std::size_t{1} << (k - 1)))
            a_bits.push_back(pos);
          else
            b_bits.push_back(pos);
        }
        auto arow = detail::scatter_table(a_bits);
        auto bcol = detail::scatter_table(b_bits);
        Eigen::MatrixXcd M(arow.size(), bcol.size());
        for (std::size_t r = 0; r < arow.size(); ++r)
          for (std::size_t c = 0; c < bcol.size(); ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                psi.amp[arow[r] | bcol[c]];
        Eigen::MatrixXcd gram = M * M.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                           Eigen::EigenvaluesOnly);
        double lam = es.eigenvalues().maxCoeff();
        // Degenerate optima are common (different subsets can share the same
        // boundary couplings), so require a genuine improvement before
        // replacing the incumbent.  Subsets are enumerated by ascending size,
        // which makes the reported argmax the smallest co-optimal bipartition.
        if (lam > best.lambda_max + 1e-12) {
          best.lambda_max = lam;
          best.argmax_subset.clear();
          for (std::size_t k = 1; k <= n; ++k)
            if (mask & (std::size_t{1} << (k - 1))) best.argmax_subset.push_back(k);
        }
      }
      // next mask with the same popcount (Gosper)
      std::size_t c = mask & (~mask + 1);
      std::size_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
  }
  best.value = 1.0 - best.lambda_max;
  return best;
}

// Projective Z measurement of site k with the given outcome.  The post state
// drops the measured qubit and is renormalized.
struct MeasurementResult {
  double probability = 0.0;
  StateVector post;
};

inline MeasurementResult measure_z(const StateVector& psi, std::size_t k, int outcome) {
  if (outcome != 0 && outcome != 1) throw domain_error("outcome must be 0 or 1");
  if (psi.n_qubits < 1) throw domain_error("no qubit to measure");
  const std::size_t pos = psi.bit_of_site(k);
  const std::size_t bit = std::size_t{1} << pos;
  MeasurementResult res;
  res.post = StateVector(psi.n_qubits - 1);
  double p = 0.0;
  for (std::size_t zeta = 0; zeta < res.post.dim(); ++zeta) {
    std::size_t low = zeta & (bit - 1);
    std::size_t high = (zeta >> pos) << (pos + 1);
    std::size_t eta = high | (outcome ? bit : 0) | low;
    res.post.amp[zeta] = psi.amp[eta];
    p += std::norm(psi.amp[eta]);
  }
  if (p < 1e-300) throw domain_error("zero-probability measurement branch");
  res.probability = p;
  const double inv = 1.0 / std::sqrt(p);
  for (auto& a : res.post.amp) a *= inv;
  return res;
}

// Per-remaining-site correction angles: theta_l = sum of weights from l to
// every site removed with outcome 1.  The correction diag(e^{i theta_l}, 1)
// on each remaining site maps the canonical sub-weight-matrix WGS onto the
// post-measurement state (up to global phase); outcome-0 removals need none.
inline std::vector<double> lu_correction(const std::vector<double>& W, std::size_t n,
                                         const std::vector<std::size_t>& remaining,
                                         const std::vector<std::size_t>& removed_ones) {
  std::vector<double> theta(remaining.size(), 0.0);
  for (std::size_t i = 0; i < remaining.size(); ++i)
    for (std::size_t k : removed_ones)
      theta[i] += W[(remaining[i] - 1) * n + (k - 1)];
  return theta;
}

// Multiply the |0> component of qubit i (0-based, MSB first) by e^{i theta_i}.
inline StateVector apply_diag_phases(const StateVector& psi, const std::vector<double>& theta) {
  if (theta.size() != psi.n_qubits) throw domain_error("one angle per qubit required");
  StateVector out = psi;
  for (std::size_t eta = 0; eta < out.dim(); ++eta) {
    double ph = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i)
      if (!(eta & (std::size_t{1} << (psi.n_qubits - 1 - i)))) ph += theta[i];
    out.amp[eta] *= std::polar(1.0, ph);
  }
  return out;
}

// Measures the listed sites in order with the given outcomes, then compares
// the post-measurement state against the canonical WGS of the remaining
// sub-weight-matrix: corrected (with the single-qubit phases above) and raw.
struct ReductionCheck {
  double probability = 0.0;    // joint probability of the outcome string
  double fidelity = 0.0;       // against the phase-corrected canonical state
  double fidelity_raw = 0.0;   // against the uncorrected canonical state
  std::vector<std::size_t> remaining;  // 1-based original labels, ascending
};

inline ReductionCheck verify_reduction(const CouplingModel& model, double t,
                                       const std::vector<std::size_t>& measured,
                                       const std::vector<int>& outcomes) {
  const std::size_t n = model.n_sites();
  if (n > kMaxBruteQubits)
    throw capacity_error("reduction check capped at " + std::to_string(kMaxBruteQubits) +
                         " qubits");
  if (measured.size() != outcomes.size())
    throw domain_error("one outcome per measured site required");
  if (measured.empty() || measured.size() >= n)
    throw domain_error("measure at least one site and keep at least one");

  const auto W = materialize_weights(model, t);
  StateVector state = build_wgs_from_weights(W, n);

  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i + 1;

  ReductionCheck res;
  res.probability = 1.0;
  std::vector<std::size_t> removed_ones;
  for (std::size_t m = 0; m < measured.size(); ++m) {
    auto it = std::find(labels.begin(), labels.end(), measured[m]);
    if (it == labels.end()) throw domain_error("site measured twice or out of range");
    std::size_t site_now = static_cast<std::size_t>(it - labels.begin()) + 1;
    auto r = measure_z(state, site_now, outcomes[m]);
    res.probability *= r.probability;
    state = std::move(r.post);
    if (outcomes[m] == 1) removed_ones.push_back(measured[m]);
    labels.erase(it);
  }
  res.remaining = labels;

  const std::size_t nr = labels.size();
  std::vector<double> Wsub(nr * nr, 0.0);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nr; ++j)
      if (i != j) Wsub[i * nr + j] = W[(labels[i] - 1) * n + (labels[j] - 1)];
  StateVector target = build_wgs_from_weights(Wsub, nr);
  res.fidelity_raw = fidelity(state, target);
  StateVector corrected = apply_diag_phases(target, lu_correction(W, n, labels, removed_ones));
  res.fidelity = fidelity(state, corrected);
  return res;
}

// Binary state dump: 16-byte header (magic "WGSV", u32 version, u32 qubit
// count, u32 reserved, little-endian), then interleaved re/im doubles.
inline constexpr std::uint32_t kWgsvVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "WGSV serialization assumes a little-endian host");

inline void dump_wgsv(const StateVector& psi, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw domain_error("cannot open " + path.string() + " for writing");
  char header[16] = {'W', 'G', 'S', 'V'};
  std::uint32_t version = kWgsvVersion;
  std::uint32_t n = static_cast<std::uint32_t>(psi.n_qubits);
  std::uint32_t reserved = 0;
  std::memcpy(header + 4, &version, 4);
  std::memcpy(header + 8, &n, 4);
  std::memcpy(header + 12, &reserved, 4);
  f.write(header, sizeof header);
  for (const auto& a : psi.amp) {
    double re = a.real(), im = a.imag();
    f.write(reinterpret_cast<const char*>(&re), sizeof re);
    f.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  if (!f) throw domain_error("short write to " + path.string());
}

inline StateVector load_wgsv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw domain_error("cannot open " + path.string());
  char header[16];
  f.read(header, sizeof header);
  if (!f || std::memcmp(header, "WGSV", 4) != 0)
    throw domain_error(path.string() + " is not a WGSV file");
  std::uint32_t version = 0, n = 0;
  std::memcpy(&version, header + 4, 4);
  std::memcpy(&n, header + 8, 4);
  if (version != kWgsvVersion) throw domain_error("unsupported WGSV version");
  if (n > kMaxStateQubits) throw capacity_error("WGSV qubit count exceeds capacity");
  StateVector psi(n);
  for (auto& a : psi.amp) {
    double re = 0.0, im = 0.0;
    f.read(reinterpret_cast<char*>(&re), sizeof re);
    f.read(reinterpret_cast<char*>(&im), sizeof im);
    a = {re, im};
  }
  if (!f) throw domain_error("truncated WGSV file " + path.string());
  return psi;
}

}  // namespace wgs
