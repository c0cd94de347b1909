#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amo/bigmath.hpp"
#include "amo/errors.hpp"

namespace amo {

/// One continued-fraction convergent p_n/q_n of an irrational alpha,
/// together with a certified rational enclosure of
/// Delta_n = |q_n*alpha - p_n|. The enclosure comes from evaluating
/// against two consecutive deeper convergents, which bracket alpha.
struct Convergent {
  int n = 0;
  BigInt p;
  BigInt q;
  BigRat delta_lo;
  BigRat delta_hi;
};

/// Finite-depth diagnostics for beta(alpha) = limsup ln(q_{n+1})/q_n.
///
/// per_n[i] is ln(q_{i+2})/q_{i+1} (1-based index n = i+1) and
/// sup_tail[i] = max over m >= i of per_n[m]. `proxy` is sup_tail at
/// `proxy_tail_start`, a canonical tail start: for rule-generated
/// Liouville spectra the last rule-driven index, otherwise depth/2.
/// No convergence claim is attached to any of these numbers.
struct BetaEstimate {
  std::vector<double> per_n;
  std::vector<double> sup_tail;
  int depth = 0;
  double proxy = 0.0;
  int proxy_tail_start = 1;
};

struct LiouvilleOptions {
  long max_coeff_bits = 1'000'000;
  // When the rule coefficient would exceed the cap, continue the
  // expansion with all-ones coefficients instead of failing. The
  // rule prefix is recorded either way (see rule_depth()).
  bool tame_tail = true;
};

/// An irrational alpha in (0,1) represented by its continued-fraction
/// coefficients a_1, a_2, ... (a_0 = 0). Coefficients may come from a
/// generator (constant rule, Liouville rule) and are materialized on
/// demand; a materialized prefix is immutable. ensure_depth() mutates
/// and must be externally serialized; all const accessors are safe to
/// call concurrently afterwards.
class FrequencySpec {
 public:
  enum class Kind { Explicit, Constant, Liouville };

  static FrequencySpec golden() { return constant(1); }
  static FrequencySpec silver() { return constant(2); }
  static FrequencySpec constant(std::int64_t a);
  static FrequencySpec from_coefficients(std::vector<BigInt> coeffs);

  Kind kind() const { return kind_; }
  bool extendable() const { return kind_ != Kind::Explicit; }
  int materialized_depth() const { return static_cast<int>(coeffs_.size()); }

  /// Coefficient a_i, 1-based. Requires i <= materialized_depth().
  const BigInt& coefficient(int i) const;

  /// Convergent numerators/denominators; q(0) = 1, p(0) = 0.
  /// Requires n <= materialized_depth().
  const BigInt& q(int n) const;
  const BigInt& p(int n) const;

  /// Materializes coefficients up to `depth`. Throws
  /// InsufficientDepthError for explicit specs and DepthCapError for a
  /// capped Liouville rule without tame_tail.
  void ensure_depth(int depth);

  /// For Liouville specs, the largest index whose coefficient was
  /// produced by the growth rule (the tame tail starts after it).
  /// For other kinds this equals materialized_depth().
  int rule_depth() const;

  double target_beta() const { return target_beta_; }

  nlohmann::json to_json() const;
  static FrequencySpec from_json(const nlohmann::json& j);

  /// Shorthand grammar: golden | silver | liouville:<beta> |
  /// liouville:<beta>:<cap_bits> | explicit:[a1,a2,...]
  static FrequencySpec parse(const std::string& text);
  std::string shorthand() const;

 private:
  friend FrequencySpec construct_liouville(double, int, LiouvilleOptions);

  FrequencySpec() = default;
  void append_coefficient(BigInt a);
  bool extend_once();

  Kind kind_ = Kind::Explicit;
  std::vector<BigInt> coeffs_;
  std::vector<BigInt> p_;  // p_[0] = p_0 = 0
  std::vector<BigInt> q_;  // q_[0] = q_0 = 1
  BigInt constant_a_ = 1;
  double target_beta_ = 0.0;
  LiouvilleOptions liouville_opts_;
  int rule_depth_ = 0;   // Liouville only
  bool rule_closed_ = false;
};

/// Convergents 1..depth with certified Delta enclosures. `guard` extra
/// coefficients (>= 2; default 4 keeps the enclosure narrower than the
/// sandwich margins even for all-ones tails) are materialized to
/// bracket alpha.
std::vector<Convergent> convergents(FrequencySpec& alpha, int depth,
                                    int guard = 4);

/// Finite-depth beta diagnostics; materializes depth+1 coefficients.
BetaEstimate estimate_beta(FrequencySpec& alpha, int depth);

/// Test fixture generator for the exponential regime: coefficients
/// follow a_{n+1} = max(1, ceil(exp(beta*q_n)/q_n)), which forces
/// ln(q_{n+1})/q_n toward beta along the rule prefix. The rule is
/// doubly exponential, so it hits the bit-size cap after a few steps;
/// with tame_tail the spec continues with ones, otherwise a
/// DepthCapError reports the reachable depth.
FrequencySpec construct_liouville(double target_beta, int depth,
                                  LiouvilleOptions opts = {});

struct ReducedPhase {
  double value = 0.0;        // n*alpha mod 1
  double error_bound = 0.0;  // |n|*Delta_N plus rounding
};

/// n*alpha mod 1 through the depth-N convergent, in exact rational
/// arithmetic, with a certified error bound. Requires
/// q_N > certification_factor * |n| (and depth N+1 materialized for
/// the Delta_N bound); otherwise PrecisionError.
ReducedPhase reduce_mod_1(const FrequencySpec& alpha, std::int64_t n,
                          int precision_depth,
                          double certification_factor = 1e6);

/// Smallest depth N with q_N > certification_factor * max_abs_n and
/// N+1 materialized, extending the spec as needed.
int prepare_depth(FrequencySpec& alpha, std::int64_t max_abs_n,
                  double certification_factor = 1e6);

/// Exact (n * p_N / q_N) mod 1 as a rational in [0,1); n may be big.
BigRat multiple_mod_1(const FrequencySpec& alpha, const BigInt& n, int depth);

/// Exact (n * p_N / (2 q_N)) mod 1: the half-step multiple used by the
/// even-variable phase of the determinant polynomial.
BigRat half_multiple_mod_1(const FrequencySpec& alpha, const BigInt& n,
                           int depth);

/// Iterates r_j = frac((start + j) * alpha) exactly against the
/// depth-N convergent, one big-integer addition per step.
class PhaseWalker {
 public:
  PhaseWalker(const FrequencySpec& alpha, int depth, std::int64_t start);

  /// Value for the current site; advance with step().
  double value() const;
  void step();

 private:
  BigInt r_;
  BigInt p_;
  BigInt q_;
  double q_double_;
};

}  // namespace amo
