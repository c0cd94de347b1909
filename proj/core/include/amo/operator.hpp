#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "amo/frequency.hpp"

namespace amo {

/// Integer interval [x1, x2] on the lattice; size is x2 - x1 + 1.
struct Box {
  std::int64_t x1 = 0;
  std::int64_t x2 = 0;
  std::int64_t size() const { return x2 - x1 + 1; }
  bool contains(std::int64_t y) const { return x1 <= y && y <= x2; }
};

/// Coupling, frequency, phase and energy of one model instance.
/// Negative couplings are folded into the phase (theta -> theta + 1/2)
/// at construction, so lambda >= 0 afterwards. The frequency is
/// prepared once for exact phase reduction over |site| <= max_abs_site
/// and shared immutably.
class ModelParams {
 public:
  static ModelParams make(double lambda, FrequencySpec alpha, double theta,
                          double energy, std::int64_t max_abs_site = 1 << 20,
                          double certification_factor = 1e6);

  ModelParams with_energy(double energy) const;
  ModelParams with_theta(double theta) const;

  double lambda() const { return lambda_; }
  double theta() const { return theta_; }
  double energy() const { return energy_; }
  const FrequencySpec& alpha() const { return *alpha_; }
  int alpha_depth() const { return alpha_depth_; }
  std::int64_t max_abs_site() const { return max_abs_site_; }

  /// lambda * 2 cos(2 pi (theta + n alpha)).
  double potential(std::int64_t n) const;

  /// frac(theta + n*alpha) with the prepared exact reduction.
  double phase(std::int64_t n) const;

 private:
  double lambda_ = 0;
  double theta_ = 0;
  double energy_ = 0;
  std::shared_ptr<const FrequencySpec> alpha_;
  int alpha_depth_ = 0;
  std::int64_t max_abs_site_ = 0;
};

/// Symmetric tridiagonal box restriction of the operator: diagonal
/// entries are the potential over [x1, x2], off-diagonal entries 1.
struct Tridiagonal {
  Box box;
  std::vector<double> diag;
};

/// Determinant value stored as sign and log-magnitude so exponential
/// growth in the order k survives. sign 0 means an exact zero (the
/// log-magnitude is meaningless then).
struct LogDet {
  int sign = 1;
  double log_mag = 0.0;
  std::int64_t k = 0;
  /// sign * e^log_mag; overflows to +-inf past the double range.
  double value() const;
};

Tridiagonal box_hamiltonian(const ModelParams& params, Box box,
                            std::int64_t max_size = 100000);

/// det of the (H - E) restriction to k sites starting at phase
/// theta + theta_shift, via the renormalized three-term recurrence
/// D_j = (v_{j-1} - E) D_{j-1} - D_{j-2}.
LogDet det_p(const ModelParams& params, double theta_shift, std::int64_t k);

/// Same determinant for the box [x1, x2] using exact integer phase
/// stepping (the phase shift is x1*alpha).
LogDet det_box(const ModelParams& params, Box box);

/// sup over sampled phases of (1/k) log|P_k|. The sample set is a
/// uniform grid plus perturbations of the peak phase -(k-1)alpha/2;
/// exact-zero determinants are skipped.
double growth_rate(const ModelParams& params, std::int64_t k,
                   int phase_samples);

struct Membership {
  bool member = false;
  double log_margin = 0.0;  // (k+1) r - log|Q_k|
  double log_q = 0.0;       // log|Q_k(cos 2 pi theta_test)|
  int sign = 0;
};

/// Membership of theta_test in A_{k,r} = { |Q_k(cos 2 pi theta)| <=
/// e^{(k+1) r} }, where Q_k is the determinant polynomial in the
/// even variable theta + (k-1) alpha / 2. Evaluated pointwise through
/// det_p at the matching phase; coefficients are never expanded.
Membership in_A(const ModelParams& params, double theta_test, std::int64_t k,
                double r);

}  // namespace amo
