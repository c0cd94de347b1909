#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>

namespace amo {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

/// Natural log of a positive big integer, accurate to ~1 ulp of double.
/// Works far beyond the double range by splitting off the exponent.
double log_big(const BigInt& v);

/// Natural log of a positive rational.
double log_big(const BigRat& v);

/// Rounded-to-nearest double of a rational in a safe range.
inline double to_double(const BigRat& v) {
  return v.convert_to<double>();
}

/// max(1, ceil(exp(beta*q)/q)) evaluated in correctly rounded arbitrary
/// precision arithmetic. Returns no value when the result would exceed
/// max_bits bits.
struct CoefficientRuleResult {
  bool within_cap;
  BigInt value;  // valid only when within_cap
};
CoefficientRuleResult liouville_coefficient(const BigInt& q, double beta,
                                            long max_bits);

/// log(e^a + e^b) without overflow.
inline double log_add_exp(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-(std::abs(a - b))));
}

}  // namespace amo
