#include "amo/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace amo {

namespace {

constexpr double kNearSingularGap = 30.0;

int parity_sign(std::int64_t d) { return (d % 2 == 0) ? 1 : -1; }

}  // namespace

BoxGreen green_cramer(const ModelParams& params, Box box, std::int64_t y) {
  if (!box.contains(y)) throw Error("green_cramer: y outside the box");
  const LogDet den = det_box(params, box);
  if (den.sign == 0)
    throw SingularBoxError("energy is an eigenvalue of the box [" +
                           std::to_string(box.x1) + "," +
                           std::to_string(box.x2) + "]");
  const LogDet num_left = det_box(params, {y + 1, box.x2});
  const LogDet num_right = det_box(params, {box.x1, y - 1});

  BoxGreen g;
  g.box = box;
  g.energy = params.energy();
  g.y = y;
  g.g_left.k = box.size();
  g.g_left.sign = num_left.sign * den.sign * parity_sign(y - box.x1);
  g.g_left.log_mag = num_left.log_mag - den.log_mag;
  g.g_right.k = box.size();
  g.g_right.sign = num_right.sign * den.sign * parity_sign(box.x2 - y);
  g.g_right.log_mag = num_right.log_mag - den.log_mag;
  return g;
}

Eigen::MatrixXd green_direct(const ModelParams& params, Box box,
                             double condition_cap) {
  const std::int64_t n = box.size();
  if (n > 2000) throw SizeCapError("green_direct: |I| > 2000");
  const Tridiagonal t = box_hamiltonian(params, box);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::int64_t i = 0; i < n; ++i) {
    a(i, i) = t.diag[static_cast<std::size_t>(i)] - params.energy();
    if (i + 1 < n) {
      a(i, i + 1) = 1.0;
      a(i + 1, i) = 1.0;
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(n, n));
  const double norm_a = a.cwiseAbs().colwise().sum().maxCoeff();
  const double norm_inv = inv.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm_inv) || norm_a * norm_inv > condition_cap)
    throw NearSingularError("green_direct: condition estimate above cap");
  return inv;
}

RegularityVerdict classify_regular(const ModelParams& params, std::int64_t y,
                                   double t, std::int64_t k) {
  if (k < 5) throw Error("classify_regular: k must be >= 5");
  RegularityVerdict v;
  v.t = t;
  v.k = k;

  const std::int64_t dmin = (k + 4) / 5;  // ceil(k/5)
  const std::int64_t dmax = k - 1 - dmin;
  double best = -std::numeric_limits<double>::infinity();

  // x1 ascends; y - x1 covers [dmin, dmax], so both |y - x_i| >= k/5
  for (std::int64_t x1 = y - dmax; x1 <= y - dmin; ++x1) {
    const Box box{x1, x1 + k - 1};
    ++v.scanned;
    LogDet den = det_box(params, box);
    if (den.sign == 0) {
      ++v.skipped_singular;
      continue;
    }
    const LogDet nl = det_box(params, {y + 1, box.x2});
    const LogDet nr = det_box(params, {box.x1, y - 1});
    if (den.log_mag < std::max(nl.log_mag, nr.log_mag) - kNearSingularGap) {
      ++v.skipped_singular;  // |G| > e^30 somewhere, hopeless box
      continue;
    }
    const double log_gl = nl.log_mag - den.log_mag;
    const double log_gr = nr.log_mag - den.log_mag;
    const double ml = -t * static_cast<double>(y - box.x1) - log_gl;
    const double mr = -t * static_cast<double>(box.x2 - y) - log_gr;
    if (ml > 0 && mr > 0) {
      v.regular = true;
      v.witness = box;
      v.margin_left = ml;
      v.margin_right = mr;
      return v;
    }
    if (std::min(ml, mr) > best) {
      best = std::min(ml, mr);
      v.margin_left = ml;
      v.margin_right = mr;
    }
  }
  return v;
}

namespace {

double phi_at(std::span<const double> phi, std::int64_t phi_start,
              std::int64_t site) {
  const std::int64_t idx = site - phi_start;
  if (idx < 0 || idx >= static_cast<std::int64_t>(phi.size()))
    throw Error("eigenvector table does not cover site " +
                std::to_string(site));
  return phi[static_cast<std::size_t>(idx)];
}

}  // namespace

double block_expand(const ModelParams& params, std::span<const double> phi,
                    std::int64_t phi_start, std::int64_t x, Box box) {
  if (!box.contains(x)) throw Error("block_expand: x outside the box");
  const BoxGreen g = green_cramer(params, box, x);
  const double pl = phi_at(phi, phi_start, box.x1 - 1);
  const double pr = phi_at(phi, phi_start, box.x2 + 1);

  // terms assembled in log space to dodge intermediate overflow
  auto term = [](const LogDet& ld, double p) {
    if (ld.sign == 0 || p == 0.0) return 0.0;
    const double mag = std::exp(ld.log_mag + std::log(std::abs(p)));
    return static_cast<double>(ld.sign) * (p > 0 ? mag : -mag);
  };
  return std::abs(phi_at(phi, phi_start, x) + term(g.g_left, pl) +
                  term(g.g_right, pr));
}

nlohmann::json ExpansionTrace::to_json() const {
  nlohmann::json j;
  j["certified_log_bound"] = certified_log_bound;
  j["actual_log_phi"] = actual_log_phi;
  j["predicted_rate"] = predicted_rate;
  j["slack"] = slack;
  j["per_step_rate"] = per_step_rate;
  j["depth_used"] = depth_used;
  if (blocked_at) j["blocked_at"] = *blocked_at;
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps) {
    steps_json.push_back({{"site", s.site},
                          {"box", {s.box.x1, s.box.x2}},
                          {"step_log_bound", s.log_bound}});
  }
  j["steps"] = steps_json;
  return j;
}

namespace {

struct ExpansionSession {
  const ModelParams& params;
  std::span<const double> phi;
  std::int64_t phi_start;
  const ExpansionConfig& cfg;
  ExpansionTrace& trace;
  std::map<std::pair<std::int64_t, int>, double> memo;
  std::map<std::int64_t, RegularityVerdict> verdicts;

  double log_phi(std::int64_t z) const {
    return std::log(std::abs(phi_at(phi, phi_start, z)));
  }

  const RegularityVerdict& verdict(std::int64_t z) {
    auto it = verdicts.find(z);
    if (it == verdicts.end())
      it = verdicts.emplace(z, classify_regular(params, z, cfg.t, cfg.window))
               .first;
    return it->second;
  }

  double bound(std::int64_t z, int depth) {
    if (z <= cfg.zone_lo || z >= cfg.zone_hi) return log_phi(z);
    if (depth <= 0) return log_phi(z);
    const auto key = std::make_pair(z, depth);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    const RegularityVerdict& v = verdict(z);
    double result;
    if (!v.regular) {
      if (!trace.blocked_at) trace.blocked_at = z;
      result = log_phi(z);
    } else {
      const Box box = *v.witness;
      const BoxGreen g = green_cramer(params, box, z);
      const double left = g.g_left.log_mag + bound(box.x1 - 1, depth - 1);
      const double right = g.g_right.log_mag + bound(box.x2 + 1, depth - 1);
      result = log_add_exp(left, right);
      trace.steps.push_back({z, box, result});
      trace.depth_used = std::max(trace.depth_used, cfg.max_depth - depth + 1);
      const double rl =
          g.g_left.log_mag / static_cast<double>(z - box.x1);
      const double rr =
          g.g_right.log_mag / static_cast<double>(box.x2 - z);
      trace.per_step_rate = std::max(trace.per_step_rate, std::max(rl, rr));
    }
    memo.emplace(key, result);
    return result;
  }
};

}  // namespace

ExpansionTrace iterate_expansion(const ModelParams& params,
                                 std::span<const double> phi,
                                 std::int64_t phi_start, std::int64_t target,
                                 double beta_proxy, ExpansionConfig config) {
  if (config.window < 5) throw Error("iterate_expansion: window must be >= 5");
  if (config.zone_hi <= config.zone_lo)
    throw Error("iterate_expansion: empty zone");

  ExpansionTrace trace;
  trace.per_step_rate = -std::numeric_limits<double>::infinity();
  if (config.max_depth <= 0) config.max_depth = 1;

  ExpansionSession session{params, phi, phi_start, config, trace};
  trace.certified_log_bound = session.bound(target, config.max_depth);
  trace.actual_log_phi = session.log_phi(target);
  trace.predicted_rate = params.lambda() > 0
                             ? std::log(params.lambda()) - 1.5 * beta_proxy
                             : 0.0;
  // slack against the predicted line through the zone center distance
  const double dist = static_cast<double>(
      std::min(target - config.zone_lo, config.zone_hi - target));
  trace.slack = trace.certified_log_bound + trace.predicted_rate * dist;
  return trace;
}

double green_decay_rate(const ModelParams& params, Box box, std::int64_t y) {
  const BoxGreen g = green_cramer(params, box, y);
  const double dl = static_cast<double>(y - box.x1);
  const double dr = static_cast<double>(box.x2 - y);
  return -(g.g_left.log_mag + g.g_right.log_mag) / (dl + dr);
}

}  // namespace amo
