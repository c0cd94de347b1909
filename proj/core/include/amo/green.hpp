#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "amo/operator.hpp"

namespace amo {

/// Boundary Green entries of a box at one probed site, in signed log
/// form: g_left is G_I(x1, y), g_right is G_I(y, x2).
struct BoxGreen {
  Box box;
  double energy = 0.0;
  std::int64_t y = 0;
  LogDet g_left;
  LogDet g_right;
};

/// Boundary Green entries by the determinant ratio formulas:
/// |G(x1,y)| = |P_{x2-y}(theta+(y+1)alpha)| / |P_k(theta+x1 alpha)|,
/// |G(y,x2)| = |P_{y-x1}(theta+x1 alpha)|   / |P_k(theta+x1 alpha)|,
/// with signs carried through the cofactor parity. Throws
/// SingularBoxError when the box determinant is an exact zero.
BoxGreen green_cramer(const ModelParams& params, Box box, std::int64_t y);

/// Dense inverse of (H_I - E), solved column by column; an oracle for
/// green_cramer. Throws NearSingularError when the 1-norm condition
/// estimate exceeds 1e12. |I| <= 2000.
Eigen::MatrixXd green_direct(const ModelParams& params, Box box,
                             double condition_cap = 1e12);

/// Verdict of the (t,k)-regularity scan at a site. A positive margin
/// means |G| < e^{-t |y-x_i|} holds strictly on that side.
struct RegularityVerdict {
  double t = 0.0;
  std::int64_t k = 0;
  bool regular = false;
  std::optional<Box> witness;
  double margin_left = 0.0;
  double margin_right = 0.0;
  int skipped_singular = 0;
  int scanned = 0;
};

/// Scans boxes of size k whose offsets keep |y - x_i| >= k/5 on both
/// sides, in increasing x1 order, and returns the first box whose
/// boundary Green entries decay at rate t. Singular and hopelessly
/// near-singular candidates are skipped and counted. When no box
/// qualifies, the best margins seen are reported.
RegularityVerdict classify_regular(const ModelParams& params, std::int64_t y,
                                   double t, std::int64_t k);

/// Residual of the one-box expansion identity
///   phi(x) = -G(x1,x) phi(x1-1) - G(x,x2) phi(x2+1)
/// for a table phi indexed from phi_start. The box and both outside
/// neighbors must lie inside the table.
double block_expand(const ModelParams& params, std::span<const double> phi,
                    std::int64_t phi_start, std::int64_t x, Box box);

struct ExpansionStep {
  std::int64_t site = 0;
  Box box;
  double log_bound = 0.0;
};

struct ExpansionConfig {
  double t = 0.0;            // decay rate handed to classify_regular
  std::int64_t window = 0;   // box size handed to classify_regular
  int max_depth = 0;         // 0: use floor(3*dist/q_{n-1}) for the site scale
  std::int64_t zone_lo = 0;  // expansion continues strictly inside the zone
  std::int64_t zone_hi = 0;
};

struct ExpansionTrace {
  double certified_log_bound = 0.0;  // valid upper bound for log|phi(target)|
  double actual_log_phi = 0.0;
  double predicted_rate = 0.0;       // rate the certified bound is compared to
  double slack = 0.0;                // certified - (-predicted_rate * dist)
  double per_step_rate = 0.0;        // worst log|G|/distance along used boxes
  std::optional<std::int64_t> blocked_at;
  int depth_used = 0;
  std::vector<ExpansionStep> steps;
  nlohmann::json to_json() const;
};

/// Chains the expansion identity from `target`, bounding |phi| at each
/// site by |G| |phi| + |G| |phi| over the classified box; sites outside
/// the zone (or at exhausted depth) contribute their table values, so
/// the final bound is certified whenever the table is an exact
/// eigenvector. `predicted_rate` is ln(lambda) - 3/2 beta_proxy,
/// reported for comparison.
ExpansionTrace iterate_expansion(const ModelParams& params,
                                 std::span<const double> phi,
                                 std::int64_t phi_start, std::int64_t target,
                                 double beta_proxy, ExpansionConfig config);

/// Average boundary decay rate -log|G| / distance of a single box at
/// the probed site (the Green-function estimator of the localization
/// rate).
double green_decay_rate(const ModelParams& params, Box box, std::int64_t y);

}  // namespace amo
