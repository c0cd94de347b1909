#include "amo/localization.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>

namespace amo {

std::int64_t Eigenpair::center() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < vector.size(); ++i)
    if (std::abs(vector[i]) > std::abs(vector[best])) best = i;
  return box.x1 + static_cast<std::int64_t>(best);
}

double Eigenpair::participation_ratio() const {
  double s4 = 0.0;
  for (const double v : vector) s4 += v * v * v * v;
  return s4 > 0 ? 1.0 / s4 : static_cast<double>(vector.size());
}

namespace {

std::vector<double> stevr_values(std::vector<double> diag,
                                 std::vector<double> off) {
  const auto n = static_cast<lapack_int>(diag.size());
  std::vector<double> w(static_cast<std::size_t>(n));
  lapack_int m = 0;
  std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * n));
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, 'N', 'A', n, diag.data(), off.data(), 0.0, 0.0, 0, 0,
      0.0, &m, w.data(), nullptr, 1, isuppz.data());
  if (info != 0) throw Error("eigensolve: dstevr failed (values)");
  w.resize(static_cast<std::size_t>(m));
  return w;
}

}  // namespace

std::vector<double> eigenvalues(const ModelParams& params, Box box) {
  if (box.size() > 10000) throw SizeCapError("eigensolve: |I| > 10000");
  const Tridiagonal t = box_hamiltonian(params, box);
  std::vector<double> off(t.diag.size() > 1 ? t.diag.size() - 1 : 0, 1.0);
  return stevr_values(t.diag, off);
}

std::vector<Eigenpair> eigensolve(const ModelParams& params, Box box,
                                  int count, const Selector& selector) {
  if (box.size() > 10000) throw SizeCapError("eigensolve: |I| > 10000");
  if (count < 1) throw Error("eigensolve: count must be >= 1");
  const auto n = static_cast<lapack_int>(box.size());
  if (count > n) count = static_cast<int>(n);

  const Tridiagonal t = box_hamiltonian(params, box);
  std::vector<double> off(t.diag.size() > 1 ? t.diag.size() - 1 : 0, 1.0);
  const std::vector<double> w = stevr_values(t.diag, off);

  double target = selector.target_energy;
  if (selector.target_median) target = w[w.size() / 2];

  // the `take` eigenvalues nearest the target form a contiguous index
  // block in the sorted spectrum
  int take = count;
  if (selector.kind == Selector::Kind::MostLocalized) {
    take = selector.pool > 0 ? selector.pool : 10 * count;
    take = std::min<int>(take, static_cast<int>(n));
  }
  auto it = std::lower_bound(w.begin(), w.end(), target);
  auto lo = it;
  auto hi = it;
  while (hi - lo < take) {
    if (lo == w.begin()) {
      ++hi;
    } else if (hi == w.end()) {
      --lo;
    } else if (target - *(lo - 1) <= *hi - target) {
      --lo;
    } else {
      ++hi;
    }
  }
  const auto il = static_cast<lapack_int>(lo - w.begin()) + 1;  // 1-based
  const auto iu = static_cast<lapack_int>(hi - w.begin());

  std::vector<double> d2 = t.diag;
  std::vector<double> e2 = off;
  std::vector<double> wv(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) * take);
  std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * take + 2));
  lapack_int m = 0;
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, 'V', 'I', n, d2.data(), e2.data(), 0.0, 0.0, il, iu,
      0.0, &m, wv.data(), z.data(), n, isuppz.data());
  if (info != 0) throw Error("eigensolve: dstevr failed (vectors)");

  std::vector<Eigenpair> pool;
  pool.reserve(static_cast<std::size_t>(m));
  for (lapack_int j = 0; j < m; ++j) {
    Eigenpair pair;
    pair.energy = wv[static_cast<std::size_t>(j)];
    pair.box = box;
    pair.vector.assign(z.begin() + static_cast<std::ptrdiff_t>(j) * n,
                       z.begin() + static_cast<std::ptrdiff_t>(j + 1) * n);
    double norm2 = 0.0;
    for (const double v : pair.vector) norm2 += v * v;
    const double norm = std::sqrt(norm2);
    for (double& v : pair.vector) v /= norm;
    // residual ||(H - E) v||
    double r2 = 0.0;
    const auto& vec = pair.vector;
    for (lapack_int i = 0; i < n; ++i) {
      double hv = (t.diag[static_cast<std::size_t>(i)] - pair.energy) *
                  vec[static_cast<std::size_t>(i)];
      if (i > 0) hv += vec[static_cast<std::size_t>(i - 1)];
      if (i + 1 < n) hv += vec[static_cast<std::size_t>(i + 1)];
      r2 += hv * hv;
    }
    pair.residual = std::sqrt(r2);
    pool.push_back(std::move(pair));
  }

  if (selector.kind == Selector::Kind::MostLocalized) {
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Eigenpair& a, const Eigenpair& b) {
                       return a.participation_ratio() <
                              b.participation_ratio();
                     });
    if (static_cast<int>(pool.size()) > count) pool.resize(count);
  } else if (static_cast<int>(pool.size()) > count) {
    std::stable_sort(pool.begin(), pool.end(),
                     [target](const Eigenpair& a, const Eigenpair& b) {
                       return std::abs(a.energy - target) <
                              std::abs(b.energy - target);
                     });
    pool.resize(count);
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Eigenpair& a, const Eigenpair& b) {
                     return a.energy < b.energy;
                   });
  return pool;
}

namespace {

// relative local residual of the eigenvalue equation at one site
double equation_error(const Eigenpair& pair, std::span<const double> diag,
                      std::int64_t k) {
  const std::int64_t i = k - pair.box.x1;
  const double vk = pair.vector[static_cast<std::size_t>(i)];
  const double a = (diag[static_cast<std::size_t>(i)] - pair.energy) * vk;
  double num = a;
  double scale = std::abs(a);
  if (k > pair.box.x1) {
    const double l = pair.vector[static_cast<std::size_t>(i - 1)];
    num += l;
    scale += std::abs(l);
  }
  if (k < pair.box.x2) {
    const double r = pair.vector[static_cast<std::size_t>(i + 1)];
    num += r;
    scale += std::abs(r);
  }
  if (scale == 0.0) return 0.0;
  return std::abs(num) / scale;
}

}  // namespace

std::int64_t trusted_radius(const Eigenpair& pair, const ModelParams& params,
                            double tol) {
  const Tridiagonal t = box_hamiltonian(params, pair.box);
  const std::int64_t center = pair.center();
  std::int64_t d = 0;
  for (;; ++d) {
    const std::int64_t l = center - d;
    const std::int64_t r = center + d;
    if (l < pair.box.x1 || r > pair.box.x2) break;
    if (equation_error(pair, t.diag, l) > tol ||
        equation_error(pair, t.diag, r) > tol)
      break;
  }
  return d > 0 ? d - 1 : 0;
}

DecayReport fit_decay(const Eigenpair& pair, const ModelParams& params,
                      double beta_proxy, FitConfig config) {
  const std::int64_t n = pair.box.size();
  const double pr = pair.participation_ratio();
  if (pr > config.delocalized_pr_frac * static_cast<double>(n))
    throw NotLocalizedError("not localized: participation ratio " +
                            std::to_string(pr));
  const std::int64_t center = pair.center();
  const auto margin =
      static_cast<std::int64_t>(config.boundary_margin_frac *
                                static_cast<double>(n));
  if (center - pair.box.x1 < 10 || pair.box.x2 - center < 10)
    throw NotLocalizedError("not localized: center too close to the boundary");

  std::int64_t dmin = config.min_center_distance;
  if (dmin <= 0)
    dmin = std::max<std::int64_t>(
        2, params.alpha().q(1).convert_to<std::int64_t>());

  const std::int64_t lo = pair.box.x1 + margin;
  const std::int64_t hi = pair.box.x2 - margin;

  std::vector<double> trust_diag;
  if (config.filter_by_equation)
    trust_diag = box_hamiltonian(params, pair.box).diag;

  // points (d, ln(v_k^2 + v_{k+1}^2)/2) with d = |k - center|
  std::vector<double> xs, ys;
  for (std::int64_t k = lo; k < hi; ++k) {
    const std::int64_t d = std::llabs(k - center);
    if (d < dmin) continue;
    const double a = pair.value_at(k);
    const double b = pair.value_at(k + 1);
    const double s = a * a + b * b;
    if (!(s > 0)) continue;
    const double yv = 0.5 * std::log(s);
    if (yv < config.floor_log) continue;
    if (config.filter_by_equation &&
        (equation_error(pair, trust_diag, k) > config.equation_tol ||
         equation_error(pair, trust_diag, k + 1) > config.equation_tol))
      continue;
    xs.push_back(static_cast<double>(d));
    ys.push_back(yv);
  }
  if (xs.size() < 8)
    throw NotLocalizedError("not localized: too few usable fit points");

  auto least_squares = [](const std::vector<double>& x,
                          const std::vector<double>& y, std::size_t b,
                          std::size_t e) {
    const double m = static_cast<double>(e - b);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = b; i < e; ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
      syy += y[i] * y[i];
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double ss_tot = syy - sy * sy / m;
    const double intercept = (sy - slope * sx) / m;
    double ss_res = 0;
    for (std::size_t i = b; i < e; ++i) {
      const double r = y[i] - slope * x[i] - intercept;
      ss_res += r * r;
    }
    const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return std::pair<double, double>(slope, r2);
  };

  // sort by distance so windowed slopes sweep inner -> outer
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> xo(xs.size()), yo(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    xo[i] = xs[order[i]];
    yo[i] = ys[order[i]];
  }

  DecayReport rep;
  rep.center = center;
  rep.fit_window = {lo, hi};
  rep.points = static_cast<int>(xo.size());
  const auto [slope, r2] = least_squares(xo, yo, 0, xo.size());
  rep.fitted_rate = -slope;
  rep.r_squared = r2;
  rep.beta_proxy = beta_proxy;
  rep.predicted_rate_floor = std::log(params.lambda()) - 1.5 * beta_proxy;
  rep.predicted_rate_exact_beta0 = std::log(params.lambda());

  const std::size_t win = std::max<std::size_t>(8, xo.size() / 4);
  double smax = -std::numeric_limits<double>::infinity();
  double smin = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b + win <= xo.size(); b += win / 2) {
    const auto [s, unused] = least_squares(xo, yo, b, b + win);
    smax = std::max(smax, -s);
    smin = std::min(smin, -s);
  }
  rep.max_window_slope = smax;
  rep.min_window_slope = smin;
  return rep;
}

double lyapunov(const ModelParams& params, std::int64_t steps,
                int theta_samples, int renorm_every) {
  if (steps < 10000) throw Error("lyapunov: steps must be >= 10000");
  if (theta_samples < 1) throw Error("lyapunov: need >= 1 phase sample");
  if (steps > params.max_abs_site())
    throw PrecisionError("lyapunov: steps exceed the prepared site range");

  const double energy = params.energy();
  const double lambda2 = 2.0 * params.lambda();
  double acc_total = 0.0;
  for (int s = 0; s < theta_samples; ++s) {
    const double theta_s =
        params.theta() + static_cast<double>(s) / theta_samples;
    PhaseWalker walker(params.alpha(), params.alpha_depth(), 0);
    double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    double acc = 0.0;
    for (std::int64_t i = 0; i < steps; ++i) {
      double x = theta_s + walker.value();
      x -= std::floor(x);
      walker.step();
      const double a = energy - lambda2 * std::cos(2.0 * std::numbers::pi_v<double> * x);
      // [[a, -1], [1, 0]] * M
      const double n00 = a * m00 - m10;
      const double n01 = a * m01 - m11;
      m10 = m00;
      m11 = m01;
      m00 = n00;
      m01 = n01;
      if ((i + 1) % renorm_every == 0) {
        const double norm = std::max({std::abs(m00), std::abs(m01),
                                      std::abs(m10), std::abs(m11)});
        acc += std::log(norm);
        m00 /= norm;
        m01 /= norm;
        m10 /= norm;
        m11 /= norm;
      }
    }
    const double norm = std::sqrt(m00 * m00 + m01 * m01 + m10 * m10 +
                                  m11 * m11);
    acc += std::log(norm);
    acc_total += acc / static_cast<double>(steps);
  }
  return acc_total / theta_samples;
}

double beta_proxy_of(FrequencySpec alpha, int depth) {
  if (depth <= 0) {
    depth = std::max(8, alpha.materialized_depth());
    if (alpha.kind() == FrequencySpec::Kind::Liouville)
      depth = std::max(depth, alpha.rule_depth() + 3);
  }
  try {
    alpha.ensure_depth(depth + 1);
  } catch (const InsufficientDepthError&) {
    depth = alpha.materialized_depth() - 1;
  }
  if (depth < 3) depth = 3;
  return estimate_beta(alpha, depth).proxy;
}

}  // namespace amo
