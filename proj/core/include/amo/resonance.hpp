#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "amo/operator.hpp"

namespace amo {

/// Resonance classification of a site y at its scale n, where
/// b_n = q_n^{8/9} and n is the bracket with b_n <= y < b_{n+1}.
/// y is resonant iff |y - l q_n| <= b_n for some l >= 1; the
/// comparison is done exactly as dist^9 <= q_n^8 in integers.
struct ResonanceReport {
  std::int64_t y = 0;
  int n = 0;
  double q_n = 0.0;
  double b_n = 0.0;
  bool resonant = false;
  std::optional<std::int64_t> ell;
  std::int64_t distance = 0;  // dist(y, {l q_n : l >= 1})
  nlohmann::json to_json() const;
};

ResonanceReport classify_site(FrequencySpec& alpha, std::int64_t y);

/// The two-interval node construction at scale n with resonance
/// index l, and the uniformity product evaluated over it:
///   I1 = [-floor(2 q_n/3), floor(2 q_n/3) - 2],
///   I2 = [(l-1) q_n + floor(2 q_n/3) - 1, (l+1) q_n - floor(2 q_n/3) - 1].
/// epsilon_achieved is max over i and x in [-1,1] of the Lagrange
/// log-product divided by 2 q_n - 1.
struct UniformityReport {
  int n = 0;
  std::int64_t ell = 1;
  std::int64_t q_n = 0;
  Box i1;
  Box i2;
  double epsilon_achieved = 0.0;
  double bound = 0.0;  // beta_proxy/2 + epsilon
  double beta_proxy = 0.0;
  int grid_size = 0;
  bool within_bound = false;
  std::int64_t argmax_i = 0;
  double argmax_x = 0.0;
  nlohmann::json to_json() const;
};

UniformityReport uniformity_product(const ModelParams& params, int n,
                                    std::int64_t ell, double epsilon,
                                    int grid_size);

/// Core of the uniformity product for an arbitrary node set: max over
/// the grid (Chebyshev points plus endpoints, then local trisection
/// refinement) and over i of sum_{j != i} ln|x - c_j| - ln|c_i - c_j|.
/// Throws DegenerateNodesError when two nodes collide below 1e-14.
struct UniformityMax {
  double log_product = 0.0;
  std::int64_t argmax_i = 0;
  double argmax_x = 0.0;
};
UniformityMax uniformity_log_product_max(std::span<const double> nodes,
                                         int grid_size);

/// Sine-sum diagnostic: sum over k = 1..q_n, k != k0, of
/// ln|sin pi(x + (k + m_k q_r) alpha)| where k0 carries the minimal
/// |sin|. deviation is (sum + (q_n - 1) ln 2) / ln q_n, an empirical
/// estimate of the lemma constant.
struct SineSumResult {
  double sum = 0.0;
  double deviation = 0.0;
  std::int64_t k0 = 0;
  std::int64_t q_n = 0;
};

SineSumResult sine_sum_check(FrequencySpec& alpha, double x, int n, int r,
                             std::span<const std::int64_t> shifts);

/// Finite proxy for the exceptional phase sets: lists 2 <= |k| <= K
/// with |sin pi(2 theta + k alpha)| <= k^{-2} (|k| = 1 is skipped, its
/// threshold admits any sine) and |s| <= K with 2 theta + s alpha
/// within 1e-12 of an integer. A nonempty list means "possibly
/// exceptional"; membership is not decidable finitely.
struct PhaseExceptionReport {
  std::vector<std::int64_t> small_sine_hits;
  std::vector<std::int64_t> integer_relation_hits;
  bool possibly_exceptional = false;
  nlohmann::json to_json() const;
};

PhaseExceptionReport is_exceptional_phase(double theta, FrequencySpec& alpha,
                                          std::int64_t K);

}  // namespace amo
