#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "wgs/analytic.hpp"
#include "wgs/rdm.hpp"

using Catch::Matchers::WithinAbs;

namespace {

double urand(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

}  // namespace

TEST_CASE("closed-form reduced states match dense partial traces", "[rdm]") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 3 + rng() % 10;  // 3..12
    std::size_t z = 1 + rng() % (n - 1);
    double alpha = urand(rng, 0.0, 6.0);
    double t = urand(rng, 0.0, 3.0 * wgs::kPi);
    std::size_t w = 1 + rng() % std::min<std::size_t>(6, n - 1);
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i + 1;
    for (std::size_t j = 0; j < w; ++j) std::swap(pool[j], pool[j + rng() % (n - j)]);
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<long>(w));

    auto model = wgs::CouplingModel::chain(n, alpha, z);
    auto rho = wgs::rdm_subset(model, t, subset);
    auto dense = wgs::rdm_dense(wgs::build_wgs(model, t), subset);
    CAPTURE(n, z, alpha, t, w);
    REQUIRE((rho - dense).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE_THAT(rho.trace().real(), WithinAbs(1.0, 1e-13));
  }
}

TEST_CASE("reduced-state diagonals are exactly flat", "[rdm]") {
  auto model = wgs::CouplingModel::chain_full(9, 1.7);
  auto rho = wgs::rdm_subset(model, 5.3, {1, 4, 5, 8});
  for (long i = 0; i < rho.rows(); ++i) {
    REQUIRE(rho(i, i).real() == 0.0625);
    REQUIRE(rho(i, i).imag() == 0.0);
  }
}

TEST_CASE("single-site reduction agrees with the analytic form", "[rdm]") {
  auto model = wgs::CouplingModel::chain(11, 0.8, 5);
  for (std::size_t k : {1, 4, 11}) {
    for (double t : {0.9, 3.7, 7.7}) {
      auto rho = wgs::rdm_subset(model, t, {k});
      auto ana = wgs::single_site_rdm(model, k, t);
      CAPTURE(k, t);
      REQUIRE_THAT(std::abs(rho(0, 1)), WithinAbs(std::abs(ana.offdiag), 1e-13));
      REQUIRE_THAT(wgs::top_eigenvalue(rho), WithinAbs(ana.top_eigenvalue(), 1e-13));
    }
  }
}

TEST_CASE("intra-subset phases are a spectral no-op", "[rdm]") {
  auto model = wgs::CouplingModel::chain_full(10, 1.2);
  std::vector<std::size_t> subset{2, 3, 7, 9};
  double t = 4.4;
  auto with = wgs::rdm_subset(model, t, subset, true);
  auto without = wgs::rdm_subset(model, t, subset, false);
  REQUIRE((wgs::sorted_spectrum(with) - wgs::sorted_spectrum(without)).cwiseAbs().maxCoeff() <
          1e-12);
  REQUIRE((with - without).cwiseAbs().maxCoeff() > 1e-3);  // the entries do differ

  auto inv = wgs::spectrum_invariance_check(model, t, subset);
  REQUIRE(inv.phase_gap < 1e-12);
  REQUIRE(inv.dense_gap < 1e-12);
  REQUIRE(inv.entry_gap < 1e-12);
  REQUIRE(inv.offdiag_magnitude_gap < 1e-12);
}

TEST_CASE("subset validation", "[rdm]") {
  auto model = wgs::CouplingModel::chain_full(8, 1.0);
  REQUIRE_THROWS_AS((wgs::rdm_subset(model, 1.0, {2, 2})), wgs::domain_error);
  REQUIRE_THROWS_AS((wgs::rdm_subset(model, 1.0, {0, 3})), wgs::domain_error);
  REQUIRE_THROWS_AS((wgs::rdm_subset(model, 1.0, {3, 9})), wgs::domain_error);
  REQUIRE_THROWS_AS(wgs::rdm_subset(model, 1.0, {}), wgs::domain_error);
  auto big = wgs::CouplingModel::chain_full(16, 1.0);
  std::vector<std::size_t> sites13(13);
  for (std::size_t i = 0; i < 13; ++i) sites13[i] = i + 1;
  REQUIRE_THROWS_AS(wgs::rdm_subset(big, 1.0, sites13), wgs::capacity_error);

  // A = everything: the reduction is the pure state itself
  auto whole = wgs::rdm_subset(wgs::CouplingModel::chain_full(3, 1.0), 2.0, {1, 2, 3});
  REQUIRE_THAT(wgs::top_eigenvalue(whole), WithinAbs(1.0, 1e-13));
}

TEST_CASE("subset search reproduces the exhaustive bipartite optimum", "[rdm]") {
  auto model = wgs::CouplingModel::chain_full(8, 0.9);
  double t = 5.0;
  auto rep = wgs::max_eig_over_subsets(model, t, 4);
  REQUIRE(rep.exhaustive);
  auto brute = wgs::ggm_brute(wgs::build_wgs(model, t));
  REQUIRE_THAT(rep.lambda, WithinAbs(1.0 - brute.value, 1e-12));
}

TEST_CASE("sampled subset search is seed-deterministic", "[rdm]") {
  auto model = wgs::CouplingModel::chain_full(30, 1.1);  // too big for exhaustive
  double t = 5.9;
  auto a = wgs::max_eig_over_subsets(model, t, 5, 200, 42);
  auto b = wgs::max_eig_over_subsets(model, t, 5, 200, 42);
  REQUIRE_FALSE(a.exhaustive);
  REQUIRE(a.lambda == b.lambda);
  REQUIRE(a.argmax_subset == b.argmax_subset);
  REQUIRE(a.evaluated == b.evaluated);
  // single sites are among the candidates, so the result can only improve on them
  double best_single = 0.0;
  for (std::size_t k = 1; k <= 30; ++k)
    best_single =
        std::max(best_single, wgs::top_eigenvalue(wgs::rdm_subset(model, t, {k})));
  REQUIRE(a.lambda >= best_single - 1e-12);
}
