// Shared oracles for the test suites. Everything here is deliberately
// independent of the library's computational paths: exact rational
// arithmetic on the floating-point inputs, dense linear algebra, or
// brute force enumeration.
#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "amo/bigmath.hpp"
#include "amo/frequency.hpp"
#include "amo/operator.hpp"

namespace amo::test {

// Exact determinant of the tridiagonal (H - E) restriction whose
// diagonal is the given doubles, via the cofactor recurrence in
// rational arithmetic. Doubles are dyadic rationals, so this is exact.
inline BigRat exact_tridiag_det(std::span<const double> diag, double energy) {
  BigRat prev2 = 0;
  BigRat prev = 1;
  const BigRat e(energy);
  for (const double v : diag) {
    BigRat cur = (BigRat(v) - e) * prev - prev2;
    prev2 = std::move(prev);
    prev = std::move(cur);
  }
  return prev;
}

// Ordered transfer product prod_{n=k-1..0} [[E - v_n, -1], [1, 0]]
// in exact rationals. Top-left entry equals (-1)^k det(H-E) over the
// k sites.
struct RatMat2 {
  BigRat a, b, c, d;  // [[a, b], [c, d]]
};
inline RatMat2 exact_transfer_product(std::span<const double> diag,
                                      double energy) {
  RatMat2 m{1, 0, 0, 1};
  const BigRat e(energy);
  for (const double v : diag) {
    // M <- [[e - v, -1], [1, 0]] * M
    const BigRat t = e - BigRat(v);
    RatMat2 n;
    n.a = t * m.a - m.c;
    n.b = t * m.b - m.d;
    n.c = m.a;
    n.d = m.b;
    m = std::move(n);
  }
  return m;
}

// Relative agreement of a LogDet with an exact rational value.
inline double logdet_rel_error(const LogDet& d, const BigRat& exact) {
  if (exact == 0) return d.sign == 0 ? 0.0 : 1.0;
  if (d.sign == 0) return 1.0;
  const int exact_sign = exact > 0 ? 1 : -1;
  if (exact_sign != d.sign) return 2.0;
  const double log_exact = log_big(abs(exact));
  // |e^a - e^b| / e^b = |e^{a-b} - 1|
  return std::abs(std::expm1(d.log_mag - log_exact));
}

// ||k alpha|| over 1 <= k < q_{n+1} by brute force, alpha as an exact
// deep-convergent rational; used against the best-approximation bound.
inline BigRat brute_force_min_norm(const BigRat& alpha, std::int64_t k_max) {
  BigRat best = 1;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const BigRat v = BigRat(k) * alpha;
    const BigInt fl = numerator(v) / denominator(v);
    const BigRat f = v - BigRat(fl);
    const BigRat dist = f <= BigRat(1, 2) ? f : BigRat(1) - f;
    if (dist < best) best = dist;
  }
  return best;
}

// Max over a dense x-grid and over i of the interpolation log-product;
// the O(n_i * n_x * n_j) reference for the uniformity kernel.
inline double brute_force_uniformity(std::span<const double> nodes,
                                     int x_points) {
  double best = -1e300;
  for (int g = 0; g <= x_points; ++g) {
    const double x = -1.0 + 2.0 * g / x_points;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (j == i) continue;
        s += std::log(std::abs(x - nodes[j])) -
             std::log(std::abs(nodes[i] - nodes[j]));
      }
      if (s > best) best = s;
    }
  }
  return best;
}

// Synthetic unit-norm eigenvector table with planted exponential decay.
inline std::vector<double> planted_exponential(std::int64_t size,
                                               std::int64_t center_idx,
                                               double rate) {
  std::vector<double> v(static_cast<std::size_t>(size));
  for (std::int64_t i = 0; i < size; ++i)
    v[static_cast<std::size_t>(i)] =
        std::exp(-rate * std::abs(static_cast<double>(i - center_idx)));
  double n2 = 0;
  for (const double x : v) n2 += x * x;
  const double n = std::sqrt(n2);
  for (double& x : v) x /= n;
  return v;
}

// Hausdorff distance between two finite sets of reals.
inline double hausdorff(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto one_sided = [](const std::vector<double>& s,
                      const std::vector<double>& t) {
    double worst = 0;
    for (const double x : s) {
      auto it = std::lower_bound(t.begin(), t.end(), x);
      double d = 1e300;
      if (it != t.end()) d = std::min(d, std::abs(*it - x));
      if (it != t.begin()) d = std::min(d, std::abs(*(it - 1) - x));
      worst = std::max(worst, d);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace amo::test
