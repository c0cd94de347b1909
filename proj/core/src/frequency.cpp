#include "amo/frequency.hpp"

#include <boost/multiprecision/gmp.hpp>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace amo {

namespace mp = boost::multiprecision;

double log_big(const BigInt& v) {
  if (v <= 0) return -std::numeric_limits<double>::infinity();
  const auto bits = mp::msb(v);  // index of the highest set bit
  if (bits < 900) return std::log(v.convert_to<double>());
  // top 64 bits as mantissa, rest as a power of two
  const BigInt top = v >> static_cast<unsigned>(bits - 63);
  return std::log(top.convert_to<double>()) +
         static_cast<double>(bits - 63) * std::numbers::ln2_v<double>;
}

double log_big(const BigRat& v) {
  return log_big(numerator(v)) - log_big(denominator(v));
}

CoefficientRuleResult liouville_coefficient(const BigInt& q, double beta,
                                            long max_bits) {
  // Size estimate first: bits(a) ~ beta*q*log2(e) - log2(q), so the
  // cap can be checked without computing the exponential.
  if (mp::msb(q) >= 512) return {false, BigInt()};
  const double qd = q.convert_to<double>();
  const double est_bits = beta * qd / std::numbers::ln2_v<double>;
  if (est_bits > static_cast<double>(max_bits)) return {false, BigInt()};

  const auto prec =
      static_cast<mpfr_prec_t>(std::max(128.0, est_bits + 96.0));
  mp::mpz_int qz(q);

  mpfr_t x;
  mpfr_init2(x, prec);
  mpfr_set_z(x, qz.backend().data(), MPFR_RNDN);
  mpfr_mul_d(x, x, beta, MPFR_RNDN);
  mpfr_exp(x, x, MPFR_RNDN);
  mpfr_div_z(x, x, qz.backend().data(), MPFR_RNDN);

  mp::mpz_int az;
  mpfr_get_z(az.backend().data(), x, MPFR_RNDU);  // ceil
  mpfr_clear(x);

  BigInt a = az.convert_to<BigInt>();
  if (a < 1) a = 1;
  return {true, a};
}

// ---------------------------------------------------------------------------
// FrequencySpec

FrequencySpec FrequencySpec::constant(std::int64_t a) {
  if (a < 1) throw Error("continued-fraction coefficients must be >= 1");
  FrequencySpec s;
  s.kind_ = Kind::Constant;
  s.constant_a_ = a;
  s.p_ = {BigInt(0)};
  s.q_ = {BigInt(1)};
  s.ensure_depth(2);
  return s;
}

FrequencySpec FrequencySpec::from_coefficients(std::vector<BigInt> coeffs) {
  if (coeffs.empty()) throw Error("explicit spec needs at least one coefficient");
  FrequencySpec s;
  s.kind_ = Kind::Explicit;
  s.p_ = {BigInt(0)};
  s.q_ = {BigInt(1)};
  for (auto& a : coeffs) {
    if (a < 1) throw Error("continued-fraction coefficients must be >= 1");
    s.append_coefficient(std::move(a));
  }
  return s;
}

void FrequencySpec::append_coefficient(BigInt a) {
  const int n = static_cast<int>(coeffs_.size()) + 1;
  BigInt pn, qn;
  if (n == 1) {
    pn = 1;       // p_1 = a_1*p_0 + p_{-1} = 1
    qn = a;       // q_1 = a_1
  } else {
    pn = a * p_[n - 1] + p_[n - 2];
    qn = a * q_[n - 1] + q_[n - 2];
  }
  coeffs_.push_back(std::move(a));
  p_.push_back(std::move(pn));
  q_.push_back(std::move(qn));
}

bool FrequencySpec::extend_once() {
  switch (kind_) {
    case Kind::Explicit:
      return false;
    case Kind::Constant:
      append_coefficient(constant_a_);
      return true;
    case Kind::Liouville: {
      if (rule_closed_) {
        append_coefficient(BigInt(1));
        return true;
      }
      auto res = liouville_coefficient(q_.back(), target_beta_,
                                       liouville_opts_.max_coeff_bits);
      if (!res.within_cap) {
        rule_closed_ = true;
        if (!liouville_opts_.tame_tail) return false;
        append_coefficient(BigInt(1));
        return true;
      }
      append_coefficient(std::move(res.value));
      rule_depth_ = static_cast<int>(coeffs_.size());
      return true;
    }
  }
  return false;
}

void FrequencySpec::ensure_depth(int depth) {
  while (materialized_depth() < depth) {
    if (!extend_once()) {
      if (kind_ == Kind::Explicit)
        throw InsufficientDepthError(
            "insufficient depth: explicit spec has " +
            std::to_string(materialized_depth()) + " coefficients, need " +
            std::to_string(depth));
      throw DepthCapError(
          "depth cap exceeded: coefficient rule reaches depth " +
              std::to_string(materialized_depth()) + ", need " +
              std::to_string(depth),
          materialized_depth());
    }
  }
}

const BigInt& FrequencySpec::coefficient(int i) const {
  if (i < 1 || i > materialized_depth())
    throw InsufficientDepthError("coefficient index out of materialized range");
  return coeffs_[static_cast<std::size_t>(i - 1)];
}

const BigInt& FrequencySpec::q(int n) const {
  if (n < 0 || n > materialized_depth())
    throw InsufficientDepthError("convergent index out of materialized range");
  return q_[static_cast<std::size_t>(n)];
}

const BigInt& FrequencySpec::p(int n) const {
  if (n < 0 || n > materialized_depth())
    throw InsufficientDepthError("convergent index out of materialized range");
  return p_[static_cast<std::size_t>(n)];
}

int FrequencySpec::rule_depth() const {
  return kind_ == Kind::Liouville ? rule_depth_ : materialized_depth();
}

nlohmann::json FrequencySpec::to_json() const {
  nlohmann::json j;
  auto coeff_json = [&]() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : coeffs_) {
      if (a <= BigInt(std::int64_t(1) << 53))
        arr.push_back(a.convert_to<std::int64_t>());
      else
        arr.push_back(a.str());  // beyond exact JSON integer range
    }
    return arr;
  };
  switch (kind_) {
    case Kind::Constant:
      if (constant_a_ == 1) {
        j["kind"] = "golden";
        j["coefficients"] = nlohmann::json::array();
      } else {
        j["kind"] = "explicit";
        j["coefficients"] = coeff_json();
      }
      break;
    case Kind::Explicit:
      j["kind"] = "explicit";
      j["coefficients"] = coeff_json();
      break;
    case Kind::Liouville:
      j["kind"] = "liouville";
      j["target_beta"] = target_beta_;
      j["coefficients"] = coeff_json();
      break;
  }
  return j;
}

FrequencySpec FrequencySpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  auto parse_coeffs = [&]() {
    std::vector<BigInt> cs;
    for (const auto& c : j.at("coefficients")) {
      if (c.is_string())
        cs.emplace_back(c.get<std::string>());
      else
        cs.emplace_back(c.get<std::int64_t>());
    }
    return cs;
  };
  if (kind == "golden") return golden();
  if (kind == "explicit") return from_coefficients(parse_coeffs());
  if (kind == "liouville") {
    const int depth =
        std::max<int>(3, static_cast<int>(j.at("coefficients").size()));
    return construct_liouville(j.at("target_beta").get<double>(), depth);
  }
  throw Error("unknown frequency kind: " + kind);
}

FrequencySpec FrequencySpec::parse(const std::string& text) {
  if (text == "golden") return golden();
  if (text == "silver") return silver();
  if (text.rfind("liouville:", 0) == 0) {
    const std::string rest = text.substr(10);
    const auto colon = rest.find(':');
    LiouvilleOptions opts;
    double beta;
    if (colon == std::string::npos) {
      beta = std::stod(rest);
    } else {
      // liouville:<beta>:<cap_bits> pins the coefficient bit cap, which
      // sets where the growth rule stops and the tame tail begins
      beta = std::stod(rest.substr(0, colon));
      opts.max_coeff_bits = std::stol(rest.substr(colon + 1));
    }
    return construct_liouville(beta, 3, opts);
  }
  if (text.rfind("explicit:[", 0) == 0 && text.back() == ']') {
    std::vector<BigInt> cs;
    std::string inner = text.substr(10, text.size() - 11);
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) cs.emplace_back(tok);
    }
    return from_coefficients(std::move(cs));
  }
  throw Error("cannot parse frequency shorthand: " + text);
}

std::string FrequencySpec::shorthand() const {
  switch (kind_) {
    case Kind::Constant:
      if (constant_a_ == 1) return "golden";
      if (constant_a_ == 2) return "silver";
      return "constant:" + constant_a_.str();
    case Kind::Liouville: {
      std::ostringstream os;
      os << "liouville:" << target_beta_;
      if (liouville_opts_.max_coeff_bits != LiouvilleOptions{}.max_coeff_bits)
        os << ":" << liouville_opts_.max_coeff_bits;
      return os.str();
    }
    case Kind::Explicit: {
      std::string s = "explicit:[";
      for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (i) s += ',';
        s += coeffs_[i].str();
      }
      return s + "]";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Operations

std::vector<Convergent> convergents(FrequencySpec& alpha, int depth,
                                    int guard) {
  if (depth < 1) throw Error("convergents: depth must be >= 1");
  if (guard < 2) guard = 2;
  alpha.ensure_depth(depth + guard);

  // alpha lies strictly between consecutive convergents r_N and r_{N+1};
  // a finite explicit list is its own exact value instead.
  const int N = alpha.materialized_depth() - 1;
  BigRat lo_end(alpha.p(N), alpha.q(N));
  BigRat hi_end(alpha.p(N + 1), alpha.q(N + 1));
  if (!alpha.extendable()) lo_end = hi_end;

  std::vector<Convergent> out;
  out.reserve(static_cast<std::size_t>(depth));
  for (int n = 1; n <= depth; ++n) {
    Convergent c;
    c.n = n;
    c.p = alpha.p(n);
    c.q = alpha.q(n);
    BigRat d1 = abs(c.q * lo_end - c.p);
    BigRat d2 = abs(c.q * hi_end - c.p);
    if (d1 > d2) std::swap(d1, d2);
    c.delta_lo = std::move(d1);
    c.delta_hi = std::move(d2);
    out.push_back(std::move(c));
  }
  return out;
}

BetaEstimate estimate_beta(FrequencySpec& alpha, int depth) {
  if (depth < 3) throw Error("estimate_beta: depth must be >= 3");
  alpha.ensure_depth(depth + 1);

  BetaEstimate est;
  est.depth = depth;
  est.per_n.resize(static_cast<std::size_t>(depth));
  est.sup_tail.resize(static_cast<std::size_t>(depth));
  for (int n = 1; n <= depth; ++n) {
    const double lnq = log_big(alpha.q(n + 1));
    est.per_n[static_cast<std::size_t>(n - 1)] =
        lnq / alpha.q(n).convert_to<double>();
  }
  double sup = -std::numeric_limits<double>::infinity();
  for (int n = depth; n >= 1; --n) {
    sup = std::max(sup, est.per_n[static_cast<std::size_t>(n - 1)]);
    est.sup_tail[static_cast<std::size_t>(n - 1)] = sup;
  }

  int tail = (depth + 1) / 2;
  if (alpha.kind() == FrequencySpec::Kind::Liouville)
    tail = std::clamp(alpha.rule_depth() - 1, 1, depth);
  est.proxy_tail_start = std::max(1, tail);
  est.proxy = est.sup_tail[static_cast<std::size_t>(est.proxy_tail_start - 1)];
  return est;
}

FrequencySpec construct_liouville(double target_beta, int depth,
                                  LiouvilleOptions opts) {
  if (!(target_beta > 0)) throw Error("construct_liouville: target_beta must be > 0");
  if (depth < 3) throw Error("construct_liouville: depth must be >= 3");
  FrequencySpec s;
  s.kind_ = FrequencySpec::Kind::Liouville;
  s.target_beta_ = target_beta;
  s.liouville_opts_ = opts;
  s.p_ = {BigInt(0)};
  s.q_ = {BigInt(1)};
  s.ensure_depth(depth);
  return s;
}

ReducedPhase reduce_mod_1(const FrequencySpec& alpha, std::int64_t n,
                          int precision_depth, double certification_factor) {
  if (n == 0) return {0.0, 0.0};
  if (std::abs(n) > std::int64_t(1e12))
    throw PrecisionError("reduce_mod_1: |n| exceeds 1e12");
  const int N = precision_depth;
  if (N < 1 || N + 1 > alpha.materialized_depth())
    throw PrecisionError(
        "precision unavailable: depth " + std::to_string(N + 1) +
        " not materialized");
  const BigInt& qN = alpha.q(N);
  if (!(qN > BigInt(static_cast<std::int64_t>(certification_factor)) *
                 BigInt(std::abs(n))))
    throw PrecisionError("precision unavailable: q_N too small for |n|");

  BigInt r = (BigInt(n) * alpha.p(N)) % qN;
  if (r < 0) r += qN;
  const double value = BigRat(r, qN).convert_to<double>();
  // Delta_N <= 1/q_{N+1}
  const double delta_hi =
      1.0 / alpha.q(N + 1).convert_to<double>();
  const double err = std::abs(static_cast<double>(n)) * delta_hi +
                     4 * std::numeric_limits<double>::epsilon();
  return {value, err};
}

int prepare_depth(FrequencySpec& alpha, std::int64_t max_abs_n,
                  double certification_factor) {
  const BigInt need = BigInt(static_cast<std::int64_t>(certification_factor)) *
                      BigInt(std::max<std::int64_t>(1, std::abs(max_abs_n)));
  for (int N = 1;; ++N) {
    try {
      alpha.ensure_depth(N + 1);
    } catch (const InsufficientDepthError&) {
      throw PrecisionError(
          "precision unavailable: explicit spec too shallow for |n| <= " +
          std::to_string(max_abs_n));
    }
    if (alpha.q(N) > need) return N;
  }
}

BigRat multiple_mod_1(const FrequencySpec& alpha, const BigInt& n, int depth) {
  const BigInt& qN = alpha.q(depth);
  BigInt r = (n * alpha.p(depth)) % qN;
  if (r < 0) r += qN;
  return BigRat(r, qN);
}

BigRat half_multiple_mod_1(const FrequencySpec& alpha, const BigInt& n,
                           int depth) {
  const BigInt q2 = 2 * alpha.q(depth);
  BigInt r = (n * alpha.p(depth)) % q2;
  if (r < 0) r += q2;
  return BigRat(r, q2);
}

PhaseWalker::PhaseWalker(const FrequencySpec& alpha, int depth,
                         std::int64_t start)
    : p_(alpha.p(depth)), q_(alpha.q(depth)) {
  r_ = (BigInt(start) * p_) % q_;
  if (r_ < 0) r_ += q_;
  q_double_ = q_.convert_to<double>();
}

double PhaseWalker::value() const {
  return r_.convert_to<double>() / q_double_;
}

void PhaseWalker::step() {
  r_ += p_;
  if (r_ >= q_) r_ -= q_;
}

}  // namespace amo
