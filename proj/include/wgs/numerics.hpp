#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "wgs/errors.hpp"

namespace wgs {

inline constexpr double kLogUnderflow = 1e-300;

// ln|cos(x)|, returning -inf once |cos| drops below the underflow floor
// (the corresponding product is then exactly 0 by policy).  Near |cos| = 1
// the Sterbenz-exact difference keeps absolute accuracy at the 1e-16 level,
// which matters when millions of near-zero terms are accumulated.
inline double log_abs_cos(double x) {
  double a = std::fabs(std::cos(x));
  if (a < kLogUnderflow) return -std::numeric_limits<double>::infinity();
  if (a > 0.5) return std::log1p(a - 1.0);
  return std::log(a);
}

namespace detail {

// -ln cos(x) = sum_k kLogCosCoeff[k] * x^(2k+2), |x| < pi/2.
// With |x| <= 0.05 the first omitted term is below 1e-25; the truncation is
// far under double rounding for the tail-moment evaluation below.
inline constexpr double kLogCosCoeff[] = {
    1.0 / 2.0,          1.0 / 12.0,         1.0 / 45.0,
    17.0 / 2520.0,      31.0 / 14175.0,     691.0 / 935550.0,
    10922.0 / 42567525.0};
inline constexpr int kLogCosTerms = 7;

}  // namespace detail

// Sum over r in (r0, r1] of ln|cos(t * r^(-alpha) / 2)| evaluated through the
// Taylor expansion of -ln cos, valid when t * r^(-alpha) / 2 <= xmax < pi/2
// for every r in the range.  The x^(2k) sums collapse onto the power sums
// M_2k = sum r^(-2k*alpha), which are t-independent and cached by the caller.
struct ChainTailMoments {
  double alpha = 0.0;
  std::size_t r0 = 0;  // exclusive
  std::size_t r1 = 0;  // inclusive
  double m[detail::kLogCosTerms] = {0};

  ChainTailMoments() = default;
  ChainTailMoments(double alpha_, std::size_t r0_, std::size_t r1_)
      : alpha(alpha_), r0(r0_), r1(r1_) {
    for (std::size_t r = r0 + 1; r <= r1; ++r) {
      double base = std::pow(static_cast<double>(r), -2.0 * alpha);
      double p = base;
      for (int k = 0; k < detail::kLogCosTerms; ++k) {
        m[k] += p;
        p *= base;
      }
    }
  }

  // sum of ln|cos(t r^(-alpha) / 2)| over the range; requires the largest
  // argument (at r = r0+1) to be within the series radius.
  double logsum(double t) const {
    double x2 = 0.25 * t * t;  // (t/2)^2 ; argument^2 = x2 * r^(-2 alpha)
    double acc = 0.0;
    double p = x2;
    for (int k = 0; k < detail::kLogCosTerms; ++k) {
      acc += detail::kLogCosCoeff[k] * p * m[k];
      p *= x2;
    }
    return -acc;
  }
};

// Composite Simpson weights for n points (n odd, uniform grid).  Multiplying
// by h/3 and summing yields the integral; dividing by the interval length
// yields the average.
inline std::vector<double> simpson_weights(std::size_t n) {
  if (n < 3 || n % 2 == 0)
    throw domain_error("Simpson rule needs an odd number of points >= 3");
  std::vector<double> w(n, 1.0);
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = (i % 2 == 1) ? 4.0 : 2.0;
  return w;
}

// Average of f over [0, T] by composite Simpson on `points` uniform nodes.
template <typename F>
double simpson_average(F&& f, double T, std::size_t points) {
  auto w = simpson_weights(points);
  double h = T / static_cast<double>(points - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < points; ++i)
    acc += w[i] * f(h * static_cast<double>(i));
  return acc * (h / 3.0) / T;
}

}  // namespace wgs
