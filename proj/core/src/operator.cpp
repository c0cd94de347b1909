#include "amo/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace amo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

double frac(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;
  return f;
}

}  // namespace

ModelParams ModelParams::make(double lambda, FrequencySpec alpha, double theta,
                              double energy, std::int64_t max_abs_site,
                              double certification_factor) {
  ModelParams m;
  if (lambda < 0) {
    lambda = -lambda;
    theta += 0.5;  // H_{lambda,alpha,theta} = H_{-lambda,alpha,theta+1/2}
  }
  m.lambda_ = lambda;
  m.theta_ = frac(theta);
  m.energy_ = energy;
  m.max_abs_site_ = max_abs_site;
  m.alpha_depth_ = prepare_depth(alpha, max_abs_site, certification_factor);
  m.alpha_ = std::make_shared<const FrequencySpec>(std::move(alpha));
  return m;
}

ModelParams ModelParams::with_energy(double energy) const {
  ModelParams m = *this;
  m.energy_ = energy;
  return m;
}

ModelParams ModelParams::with_theta(double theta) const {
  ModelParams m = *this;
  m.theta_ = frac(theta);
  return m;
}

double ModelParams::phase(std::int64_t n) const {
  if (std::abs(n) > max_abs_site_)
    throw PrecisionError("site " + std::to_string(n) +
                         " outside the prepared range; rebuild ModelParams "
                         "with a larger max_abs_site");
  const auto r = reduce_mod_1(*alpha_, n, alpha_depth_);
  return frac(theta_ + r.value);
}

double ModelParams::potential(std::int64_t n) const {
  return lambda_ * 2.0 * std::cos(kTwoPi * phase(n));
}

double LogDet::value() const {
  if (sign == 0) return 0.0;
  return static_cast<double>(sign) * std::exp(log_mag);
}

Tridiagonal box_hamiltonian(const ModelParams& params, Box box,
                            std::int64_t max_size) {
  if (box.size() < 1) throw Error("box_hamiltonian: empty box");
  if (box.size() > max_size)
    throw SizeCapError("box size " + std::to_string(box.size()) +
                       " exceeds cap " + std::to_string(max_size));
  Tridiagonal t;
  t.box = box;
  t.diag.resize(static_cast<std::size_t>(box.size()));
  PhaseWalker walker(params.alpha(), params.alpha_depth(), box.x1);
  const double lambda2 = 2.0 * params.lambda();
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const double x = frac(params.theta() + walker.value());
    t.diag[static_cast<std::size_t>(i)] = lambda2 * std::cos(kTwoPi * x);
    walker.step();
  }
  return t;
}

namespace {

// Renormalized three-term recurrence over k diagonal values pulled
// from `next_v`. The pair (D_j, D_{j-1}) is rescaled to unit max each
// step; the log of the scalings accumulates separately.
template <typename NextV>
LogDet det_recurrence(double energy, std::int64_t k, NextV&& next_v) {
  LogDet out;
  out.k = k;
  if (k == 0) return out;  // P_0 = 1
  double prev2 = 0.0;  // D_{j-2} (scaled)
  double prev = 1.0;   // D_{j-1} (scaled)
  double log_scale = 0.0;
  for (std::int64_t j = 1; j <= k; ++j) {
    const double v = next_v();
    const double cur = (v - energy) * prev - prev2;
    const double m = std::max(std::abs(cur), std::abs(prev));
    // m = 0 would need two consecutive zeros, impossible with D_0 = 1
    log_scale += std::log(m);
    prev2 = prev / m;
    prev = cur / m;
  }
  if (prev == 0.0) {
    out.sign = 0;
    out.log_mag = -std::numeric_limits<double>::infinity();
  } else {
    out.sign = prev > 0 ? 1 : -1;
    out.log_mag = log_scale + std::log(std::abs(prev));
  }
  return out;
}

}  // namespace

LogDet det_p(const ModelParams& params, double theta_shift, std::int64_t k) {
  if (k < 0) throw Error("det_p: negative order");
  PhaseWalker walker(params.alpha(), params.alpha_depth(), 0);
  const double base = params.theta() + theta_shift;
  const double lambda2 = 2.0 * params.lambda();
  return det_recurrence(params.energy(), k, [&] {
    const double x = frac(base + walker.value());
    walker.step();
    return lambda2 * std::cos(kTwoPi * x);
  });
}

LogDet det_box(const ModelParams& params, Box box) {
  if (box.size() < 0) throw Error("det_box: x2 < x1");
  if (box.size() == 0) return LogDet{1, 0.0, 0};
  PhaseWalker walker(params.alpha(), params.alpha_depth(), box.x1);
  const double lambda2 = 2.0 * params.lambda();
  return det_recurrence(params.energy(), box.size(), [&] {
    const double x = frac(params.theta() + walker.value());
    walker.step();
    return lambda2 * std::cos(kTwoPi * x);
  });
}

double growth_rate(const ModelParams& params, std::int64_t k,
                   int phase_samples) {
  if (k < 10) throw Error("growth_rate: k must be >= 10");
  if (phase_samples < 100) throw Error("growth_rate: need >= 100 samples");

  // peak region: the even variable theta + (k-1) alpha/2 near 0
  const double half = to_double(
      half_multiple_mod_1(params.alpha(), BigInt(k - 1), params.alpha_depth()));

  std::vector<double> shifts;
  shifts.reserve(static_cast<std::size_t>(phase_samples) + 10);
  for (int i = 0; i < phase_samples; ++i)
    shifts.push_back(static_cast<double>(i) / phase_samples - params.theta());
  const double peak = -half - params.theta();
  for (int j = 0; j < 10; ++j)
    shifts.push_back(peak + (j - 4.5) * 1e-3 / static_cast<double>(k));

  double sup = -std::numeric_limits<double>::infinity();
  for (const double s : shifts) {
    const LogDet d = det_p(params, s, k);
    if (d.sign == 0) continue;  // exact zero, log undefined
    sup = std::max(sup, d.log_mag / static_cast<double>(k));
  }
  return sup;
}

Membership in_A(const ModelParams& params, double theta_test, std::int64_t k,
                double r) {
  if (k < 1) throw Error("in_A: k must be >= 1");
  // Q_k(cos 2 pi theta_test) = P_k at the phase whose even variable
  // theta + shift + (k-1) alpha / 2 equals theta_test.
  const double half = to_double(
      half_multiple_mod_1(params.alpha(), BigInt(k - 1), params.alpha_depth()));
  const double shift = theta_test - half - params.theta();
  const LogDet d = det_p(params, shift, k);

  Membership m;
  m.sign = d.sign;
  const double budget = static_cast<double>(k + 1) * r;
  if (d.sign == 0) {
    m.member = true;
    m.log_margin = std::numeric_limits<double>::infinity();
    m.log_q = -std::numeric_limits<double>::infinity();
    return m;
  }
  m.log_q = d.log_mag;
  m.log_margin = budget - d.log_mag;
  m.member = d.log_mag <= budget;
  return m;
}

}  // namespace amo
