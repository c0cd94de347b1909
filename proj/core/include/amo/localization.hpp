#pragma once

#include <cstdint>
#include <vector>

#include "amo/operator.hpp"

namespace amo {

/// Eigenvalue/eigenvector of a finite Dirichlet box, unit normalized.
struct Eigenpair {
  double energy = 0.0;
  std::vector<double> vector;
  Box box;
  double residual = 0.0;  // ||(H_I - E) v||_2
  double value_at(std::int64_t site) const {
    return vector[static_cast<std::size_t>(site - box.x1)];
  }
  std::int64_t center() const;          // argmax |v|
  double participation_ratio() const;   // 1 / sum v^4
};

struct Selector {
  enum class Kind { NearestEnergy, MostLocalized };
  Kind kind = Kind::NearestEnergy;
  double target_energy = 0.0;
  bool target_median = false;  // use the median eigenvalue as the target
  int pool = 0;                // candidate pool for MostLocalized (0: 10x)
};

/// Symmetric tridiagonal eigensolve of the box restriction; returns
/// `count` pairs picked by the selector, ordered by energy.
/// |I| <= 10000.
std::vector<Eigenpair> eigensolve(const ModelParams& params, Box box,
                                  int count, const Selector& selector);

/// All eigenvalues of the box restriction (no vectors).
std::vector<double> eigenvalues(const ModelParams& params, Box box);

struct FitConfig {
  double boundary_margin_frac = 0.10;  // sites this close to the edge are cut
  double delocalized_pr_frac = 0.25;   // PR above this fraction of |I| fails
  double floor_log = -280.0;           // drop pairs below e^floor (underflow)
  std::int64_t min_center_distance = 0;  // 0: use q_1 of the frequency
  // Eigensolver tails flatten into noise once |v| underflows the
  // solver's faithful range; sites whose local equation error
  // |phi(k-1) + phi(k+1) + (v_k - E) phi(k)| exceeds equation_tol times
  // its term magnitudes are dropped. Disable for synthetic tables that
  // are not eigenvectors of the model.
  bool filter_by_equation = true;
  double equation_tol = 1e-6;
};

/// Exponential decay fit of ln(v^2(k) + v^2(k+1))/2 against the
/// distance from the max-modulus site, with the paper comparators:
/// floor ln(lambda) - 3/2 beta_proxy and the beta = 0 rate ln(lambda).
struct DecayReport {
  std::int64_t center = 0;
  double fitted_rate = 0.0;
  double r_squared = 0.0;
  Box fit_window;
  double predicted_rate_floor = 0.0;
  double predicted_rate_exact_beta0 = 0.0;
  double beta_proxy = 0.0;
  double max_window_slope = 0.0;  // limsup-style windowed estimate
  double min_window_slope = 0.0;  // liminf-style windowed estimate
  int points = 0;
};

DecayReport fit_decay(const Eigenpair& pair, const ModelParams& params,
                      double beta_proxy, FitConfig config = {});

/// Largest distance d from the pair's center such that every site
/// within d satisfies the eigenvalue equation to relative tolerance
/// `tol` (the eigensolver's faithful tail range).
std::int64_t trusted_radius(const Eigenpair& pair, const ModelParams& params,
                            double tol = 1e-6);

/// Lyapunov exponent of the transfer cocycle at the params' energy:
/// (1/N) log of the norm of the ordered product of one-step matrices
/// [[E - v(n), -1], [1, 0]], renormalized every 32 steps, averaged
/// over an equispaced phase grid.
double lyapunov(const ModelParams& params, std::int64_t steps,
                int theta_samples, int renorm_every = 32);

/// Canonical beta proxy of a frequency for reporting: the estimate at
/// the materialized depth (extends Liouville specs past their rule
/// prefix so the proxy tail exists).
double beta_proxy_of(FrequencySpec alpha, int depth = 0);

}  // namespace amo
