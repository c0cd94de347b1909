#include "amo/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace amo {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

BigInt pow_int(const BigInt& b, unsigned e) {
  BigInt r = 1;
  BigInt base = b;
  while (e) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

// d <= q^{8/9}  <=>  d^9 <= q^8 (d >= 0)
bool within_bn(const BigInt& d, const BigInt& q) {
  return pow_int(d, 9) <= pow_int(q, 8);
}

}  // namespace

nlohmann::json ResonanceReport::to_json() const {
  nlohmann::json j;
  j["y"] = y;
  j["n"] = n;
  j["q_n"] = q_n;
  j["b_n"] = b_n;
  j["resonant"] = resonant;
  if (ell) j["ell"] = *ell;
  j["distance"] = distance;
  return j;
}

ResonanceReport classify_site(FrequencySpec& alpha, std::int64_t y) {
  if (y < 1) throw Error("classify_site: y must be >= 1");
  const BigInt y9 = pow_int(BigInt(y), 9);

  alpha.ensure_depth(2);
  if (pow_int(alpha.q(1), 8) > y9)
    throw Error("classify_site: y below the first scale b_1");

  // bracket: q_n^8 <= y^9 < q_{n+1}^8
  int n = 1;
  for (;; ++n) {
    alpha.ensure_depth(n + 1);
    if (pow_int(alpha.q(n + 1), 8) > y9) break;
  }

  const BigInt& qn = alpha.q(n);
  ResonanceReport rep;
  rep.y = y;
  rep.n = n;
  rep.q_n = qn.convert_to<double>();
  rep.b_n = std::exp((8.0 / 9.0) * log_big(qn));

  // nearest multiple l q_n with l >= 1
  BigInt l = BigInt(y) / qn;
  if (l < 1) l = 1;
  BigInt best_d = abs(BigInt(y) - l * qn);
  BigInt best_l = l;
  const BigInt d_up = abs(BigInt(y) - (l + 1) * qn);
  if (d_up < best_d) {
    best_d = d_up;
    best_l = l + 1;
  }
  rep.distance = best_d.convert_to<std::int64_t>();
  rep.resonant = within_bn(best_d, qn);
  if (rep.resonant) rep.ell = best_l.convert_to<std::int64_t>();
  return rep;
}

// ---------------------------------------------------------------------------
// Uniformity

namespace {

// Max over x of S_i(x) = T(x) - ln|x - c_i| - D_i with T(x) =
// sum_j ln|x - c_j| and precomputed denominators D_i. The grid is
// Chebyshev plus both endpoints, followed by trisection refinement of
// the best cell.
UniformityMax max_over_grid(std::span<const double> nodes,
                            std::span<const double> denom, int grid_size) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(grid_size) + 2);
  for (int g = 0; g < grid_size; ++g)
    grid.push_back(std::cos(kPi * (2.0 * g + 1.0) / (2.0 * grid_size)));
  grid.push_back(-1.0);
  grid.push_back(1.0);

  auto total = [&](double x) {
    double s = 0.0;
    for (const double c : nodes) {
      const double gap = std::abs(x - c);
      s += std::log(std::max(gap, 1e-300));
    }
    return s;
  };

  UniformityMax out;
  out.log_product = -std::numeric_limits<double>::infinity();
  std::vector<double> t_vals(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) t_vals[g] = total(grid[g]);

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double gap = std::abs(grid[g] - nodes[i]);
      const double s =
          t_vals[g] - std::log(std::max(gap, 1e-300)) - denom[i];
      if (s > out.log_product) {
        out.log_product = s;
        out.argmax_i = static_cast<std::int64_t>(i);
        out.argmax_x = grid[g];
      }
    }
  }

  // local trisection refinement of the best cell down to 1e-6 in x
  const double cell = 2.0 / std::max(grid_size, 2);
  double lo = std::max(-1.0, out.argmax_x - cell);
  double hi = std::min(1.0, out.argmax_x + cell);
  const std::size_t i_best = static_cast<std::size_t>(out.argmax_i);
  auto s_at = [&](double x) {
    const double gap = std::abs(x - nodes[i_best]);
    return total(x) - std::log(std::max(gap, 1e-300)) - denom[i_best];
  };
  while (hi - lo > 1e-6) {
    const double x1 = lo + (hi - lo) / 3.0;
    const double x2 = hi - (hi - lo) / 3.0;
    if (s_at(x1) < s_at(x2))
      lo = x1;
    else
      hi = x2;
  }
  const double xr = 0.5 * (lo + hi);
  const double sr = s_at(xr);
  if (sr > out.log_product) {
    out.log_product = sr;
    out.argmax_x = xr;
  }
  return out;
}

}  // namespace

UniformityMax uniformity_log_product_max(std::span<const double> nodes,
                                         int grid_size) {
  const std::size_t m = nodes.size();
  if (m < 2) throw Error("uniformity product needs at least two nodes");

  // denominators D_i = sum_{j != i} ln|c_i - c_j|, with collision guard
  std::vector<double> denom(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double gap = std::abs(nodes[i] - nodes[j]);
      if (gap < 1e-14)
        throw DegenerateNodesError(
            "degenerate node pair (" + std::to_string(i) + "," +
                std::to_string(j) + ")",
            static_cast<long long>(i), static_cast<long long>(j));
      const double lg = std::log(gap);
      denom[i] += lg;
      denom[j] += lg;
    }
  }
  return max_over_grid(nodes, denom, grid_size);
}

nlohmann::json UniformityReport::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["ell"] = ell;
  j["q_n"] = q_n;
  j["i1"] = {i1.x1, i1.x2};
  j["i2"] = {i2.x1, i2.x2};
  j["epsilon_achieved"] = epsilon_achieved;
  j["bound"] = bound;
  j["beta_proxy"] = beta_proxy;
  j["grid_size"] = grid_size;
  j["within_bound"] = within_bound;
  return j;
}

UniformityReport uniformity_product(const ModelParams& params, int n,
                                    std::int64_t ell, double epsilon,
                                    int grid_size) {
  const FrequencySpec& alpha = params.alpha();
  if (n < 1 || n + 1 > alpha.materialized_depth())
    throw Error("uniformity_product: scale n not materialized");
  const BigInt& qn_big = alpha.q(n);
  if (qn_big < 8) throw Error("uniformity_product: q_n must be >= 8");
  if (qn_big > 5000)
    throw SizeCapError("uniformity_product: q_n too large for the pair loop");
  if (ell < 1) throw Error("uniformity_product: ell must be >= 1");
  const std::int64_t qn = qn_big.convert_to<std::int64_t>();
  if ((ell + 1) * qn > params.max_abs_site())
    throw PrecisionError(
        "uniformity_product: I2 exceeds the prepared site range; rebuild "
        "ModelParams with a larger max_abs_site");

  UniformityReport rep;
  rep.n = n;
  rep.ell = ell;
  rep.q_n = qn;
  const std::int64_t f = (2 * qn) / 3;  // floor(2 q_n / 3)
  rep.i1 = {-f, f - 2};
  rep.i2 = {(ell - 1) * qn + f - 1, (ell + 1) * qn - f - 1};
  if (rep.i1.size() + rep.i2.size() != 2 * qn)
    throw Error("uniformity_product: interval bookkeeping is off");

  if (grid_size < 8 * 2 * static_cast<int>(qn))
    grid_size = 8 * 2 * static_cast<int>(qn);
  rep.grid_size = grid_size;

  // nodes cos(2 pi theta_j), theta_j = theta + j alpha, j in I1 u I2
  std::vector<double> nodes;
  std::vector<std::int64_t> indices;
  nodes.reserve(static_cast<std::size_t>(2 * qn));
  indices.reserve(static_cast<std::size_t>(2 * qn));
  auto push_nodes = [&](Box interval) {
    PhaseWalker walker(alpha, params.alpha_depth(), interval.x1);
    for (std::int64_t j = interval.x1; j <= interval.x2; ++j) {
      const double ph = params.theta() + walker.value();
      nodes.push_back(std::cos(2.0 * kPi * (ph - std::floor(ph))));
      indices.push_back(j);
      walker.step();
    }
  };
  push_nodes(rep.i1);
  push_nodes(rep.i2);

  // The node set contains pairs j, j + q_n whose phases differ by
  // Delta_n, far below double resolution of the cosines. Pair
  // differences therefore go through
  //   cos A - cos B = -2 sin(pi(theta_i + theta_j)) sin(pi(theta_i - theta_j))
  // with both sine arguments reduced exactly.
  const std::int64_t sum_lo = 2 * rep.i1.x1;
  const std::int64_t sum_hi = 2 * rep.i2.x2;
  const std::int64_t diff_hi = rep.i2.x2 - rep.i1.x1;
  std::vector<double> lnsin_sum(
      static_cast<std::size_t>(sum_hi - sum_lo + 1));
  {
    PhaseWalker walker(alpha, params.alpha_depth(), sum_lo);
    for (std::int64_t s = sum_lo; s <= sum_hi; ++s) {
      const double arg = 2.0 * params.theta() + walker.value();
      lnsin_sum[static_cast<std::size_t>(s - sum_lo)] =
          std::log(std::abs(std::sin(kPi * (arg - std::floor(arg)))));
      walker.step();
    }
  }
  std::vector<double> lnsin_diff(static_cast<std::size_t>(diff_hi + 1));
  lnsin_diff[0] = 0.0;  // unused (i != j)
  {
    PhaseWalker walker(alpha, params.alpha_depth(), 1);
    for (std::int64_t d = 1; d <= diff_hi; ++d) {
      lnsin_diff[static_cast<std::size_t>(d)] =
          std::log(std::abs(std::sin(kPi * walker.value())));
      walker.step();
    }
  }

  const std::size_t m = nodes.size();
  std::vector<double> denom(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::int64_t s = indices[i] + indices[j];
      const std::int64_t d = indices[j] - indices[i];
      const double ls = lnsin_sum[static_cast<std::size_t>(s - sum_lo)];
      const double ld = lnsin_diff[static_cast<std::size_t>(d)];
      if (ls < std::log(1e-14) || !std::isfinite(ld))
        throw DegenerateNodesError(
            "degenerate node pair (" + std::to_string(indices[i]) + "," +
                std::to_string(indices[j]) + ")",
            static_cast<long long>(indices[i]),
            static_cast<long long>(indices[j]));
      const double lg = std::numbers::ln2_v<double> + ls + ld;
      denom[i] += lg;
      denom[j] += lg;
    }
  }

  const UniformityMax mx = max_over_grid(nodes, denom, grid_size);
  rep.epsilon_achieved =
      mx.log_product / static_cast<double>(2 * qn - 1);
  rep.argmax_i = mx.argmax_i;
  rep.argmax_x = mx.argmax_x;

  // beta proxy at the working scale: ln(q_{n+1}) / q_n
  rep.beta_proxy = log_big(alpha.q(n + 1)) / static_cast<double>(qn);
  rep.bound = rep.beta_proxy / 2.0 + epsilon;
  rep.within_bound = rep.epsilon_achieved < rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Sine sums

SineSumResult sine_sum_check(FrequencySpec& alpha, double x, int n, int r,
                             std::span<const std::int64_t> shifts) {
  if (n < 1 || r < n) throw Error("sine_sum_check: need r >= n >= 1");
  alpha.ensure_depth(r + 2);
  const BigInt& qn = alpha.q(n);
  const BigInt& qr = alpha.q(r);
  if (qn > 1'000'000'000)
    throw SizeCapError("sine_sum_check: q_n too large to sum");
  const std::int64_t qn_i = qn.convert_to<std::int64_t>();
  if (static_cast<std::int64_t>(shifts.size()) != qn_i)
    throw Error("sine_sum_check: need one shift per k = 1..q_n");

  std::int64_t max_abs_shift = 0;
  for (const auto s : shifts)
    max_abs_shift = std::max(max_abs_shift, std::abs(s));
  const BigInt m = max_abs_shift + 1;  // |m_k| <= m - 1
  if (!(10 * m * qn < alpha.q(r + 1)))
    throw Error("sine_sum_check: precondition m < q_{r+1} / (10 q_n) fails");

  // exact evaluation depth: q_N must dominate |k + m_k q_r|
  int N = r + 1;
  const BigInt reach = (m + 1) * qr + qn;
  while (!(alpha.q(N) > reach * 1000000)) {
    alpha.ensure_depth(N + 2);
    ++N;
  }

  SineSumResult res;
  res.q_n = qn_i;
  if (qn_i == 1) return res;  // empty sum by convention

  std::vector<double> lnsin(static_cast<std::size_t>(qn_i));
  std::int64_t k0 = 1;
  double min_abs = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= qn_i; ++k) {
    const BigInt mult = BigInt(k) + BigInt(shifts[static_cast<std::size_t>(
                                         k - 1)]) * qr;
    const double ph = to_double(multiple_mod_1(alpha, mult, N));
    const double s = std::abs(std::sin(kPi * (x + ph)));
    lnsin[static_cast<std::size_t>(k - 1)] = std::log(s);
    if (s < min_abs) {
      min_abs = s;
      k0 = k;
    }
  }
  res.k0 = k0;
  double sum = 0.0;
  for (std::int64_t k = 1; k <= qn_i; ++k)
    if (k != k0) sum += lnsin[static_cast<std::size_t>(k - 1)];
  res.sum = sum;
  const double lnqn = std::log(static_cast<double>(qn_i));
  res.deviation =
      (sum + static_cast<double>(qn_i - 1) * std::numbers::ln2_v<double>) /
      lnqn;
  return res;
}

// ---------------------------------------------------------------------------
// Exceptional phases

nlohmann::json PhaseExceptionReport::to_json() const {
  nlohmann::json j;
  j["small_sine_hits"] = small_sine_hits;
  j["integer_relation_hits"] = integer_relation_hits;
  j["possibly_exceptional"] = possibly_exceptional;
  return j;
}

PhaseExceptionReport is_exceptional_phase(double theta, FrequencySpec& alpha,
                                          std::int64_t K) {
  if (K < 1) throw Error("is_exceptional_phase: K must be >= 1");
  const int N = prepare_depth(alpha, K);

  PhaseExceptionReport rep;
  auto dist_to_int = [](double v) {
    return std::abs(v - std::round(v));
  };
  for (std::int64_t k = -K; k <= K; ++k) {
    const double ka = to_double(multiple_mod_1(alpha, BigInt(k), N));
    const double arg = 2.0 * theta + ka;
    if (std::abs(k) >= 2) {
      // |k| = 1 is vacuous: the threshold k^{-2} = 1 admits any sine
      const double s = std::abs(std::sin(kPi * arg));
      const double thresh = 1.0 / (static_cast<double>(k) * k);
      if (s <= thresh) rep.small_sine_hits.push_back(k);
    }
    if (dist_to_int(arg) < 1e-12) rep.integer_relation_hits.push_back(k);
  }
  rep.possibly_exceptional =
      !rep.small_sine_hits.empty() || !rep.integer_relation_hits.empty();
  return rep;
}

}  // namespace amo
