#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>

#include "amo/frequency.hpp"
#include "support.hpp"

using namespace amo;

namespace {

BigRat deep_value(FrequencySpec spec, int depth) {
  spec.ensure_depth(depth);
  return BigRat(spec.p(depth), spec.q(depth));
}

void check_invariants(FrequencySpec& alpha, int depth) {
  auto convs = convergents(alpha, depth);
  REQUIRE(convs.size() == static_cast<std::size_t>(depth));
  for (int n = 1; n <= depth; ++n) {
    const auto& c = convs[static_cast<std::size_t>(n - 1)];
    CHECK(gcd(c.p, c.q) == 1);
    if (n >= 2) {
      // q_{n+1} = a_{n+1} q_n + q_{n-1}, p likewise
      CHECK(alpha.q(n) ==
            alpha.coefficient(n) * alpha.q(n - 1) + alpha.q(n - 2));
      CHECK(alpha.p(n) ==
            alpha.coefficient(n) * alpha.p(n - 1) + alpha.p(n - 2));
    }
    // Delta sandwich, exact rational arithmetic on the enclosure
    const BigRat lower(1, 2 * alpha.q(n + 1));
    const BigRat upper(1, alpha.q(n + 1));
    CHECK(lower <= c.delta_lo);
    CHECK(c.delta_hi <= upper);
    CHECK(c.delta_lo <= c.delta_hi);
  }
}

}  // namespace

TEST_CASE("golden mean convergents are Fibonacci") {
  auto alpha = FrequencySpec::golden();
  auto convs = convergents(alpha, 6);
  const std::int64_t expect_q[] = {1, 2, 3, 5, 8, 13};
  for (int n = 0; n < 6; ++n)
    CHECK(convs[static_cast<std::size_t>(n)].q == expect_q[n]);
}

TEST_CASE("silver mean convergents follow the Pell recurrence") {
  auto alpha = FrequencySpec::silver();
  auto convs = convergents(alpha, 4);
  const std::int64_t expect_q[] = {2, 5, 12, 29};
  for (int n = 0; n < 4; ++n)
    CHECK(convs[static_cast<std::size_t>(n)].q == expect_q[n]);
}

TEST_CASE("golden Delta_3 sandwich against a depth-30 convergent") {
  auto alpha = FrequencySpec::golden();
  alpha.ensure_depth(31);
  const BigRat alpha_deep = deep_value(alpha, 30);
  const BigRat delta3 = abs(BigInt(3) * alpha_deep - BigInt(2));
  CHECK(alpha.q(4) == 5);
  CHECK(BigRat(1, 10) <= delta3);
  CHECK(delta3 <= BigRat(1, 5));

  // and the certified enclosure brackets this evaluation
  auto convs = convergents(alpha, 3, 27);
  CHECK(convs[2].delta_lo <= delta3);
  CHECK(delta3 <= convs[2].delta_hi);
}

TEST_CASE("recurrence, gcd and sandwich invariants across frequencies") {
  auto golden = FrequencySpec::golden();
  auto silver = FrequencySpec::silver();
  auto bronze = FrequencySpec::constant(3);
  auto liou04 = construct_liouville(0.4, 20);
  auto liou10 = construct_liouville(1.0, 20);
  std::vector<BigInt> list;
  for (int i = 1; i <= 24; ++i) list.emplace_back(1 + (i * 7) % 5);
  auto expl = FrequencySpec::from_coefficients(list);

  check_invariants(golden, 20);
  check_invariants(silver, 20);
  check_invariants(bronze, 20);
  check_invariants(liou04, 20);
  check_invariants(liou10, 20);
  check_invariants(expl, 20);
}

TEST_CASE("best approximation property by brute force") {
  // ||k alpha|| >= Delta_n for 1 <= k < q_{n+1}, alpha as a deep exact
  // convergent
  auto alpha = FrequencySpec::golden();
  alpha.ensure_depth(45);
  const BigRat alpha_deep = deep_value(alpha, 44);
  auto convs = convergents(alpha, 13);
  for (const auto& c : convs) {
    const std::int64_t q_next =
        alpha.q(c.n + 1).convert_to<std::int64_t>();
    if (q_next > 700) break;
    const BigRat min_norm = test::brute_force_min_norm(alpha_deep, q_next - 1);
    const BigRat delta = abs(c.q * alpha_deep - c.p);
    CHECK(min_norm >= delta);
    // the minimum over k < q_{n+1} is attained at k = q_n
    CHECK(min_norm == delta);
  }
}

TEST_CASE("estimate_beta on the golden mean decays") {
  auto alpha = FrequencySpec::golden();
  const auto est = estimate_beta(alpha, 20);
  REQUIRE(est.per_n.size() == 20);
  for (std::size_t i = 1; i < est.per_n.size(); ++i)
    CHECK(est.per_n[i] < est.per_n[i - 1]);
  // sup over the tail from n = 15 on
  CHECK(est.sup_tail[14] < 0.05);
  for (std::size_t i = 1; i < est.sup_tail.size(); ++i)
    CHECK(est.sup_tail[i] <= est.sup_tail[i - 1]);
}

TEST_CASE("estimate_beta shape at depth 3") {
  auto alpha = FrequencySpec::silver();
  const auto est = estimate_beta(alpha, 3);
  CHECK(est.per_n.size() == 3);
  CHECK(est.sup_tail.size() == 3);
}

TEST_CASE("estimate_beta recovers the Liouville target") {
  auto alpha = construct_liouville(1.0, 8);
  const auto est = estimate_beta(alpha, 8);
  CHECK(est.proxy == doctest::Approx(1.0).epsilon(0.05));

  auto alpha04 = construct_liouville(0.4, 8);
  const auto est04 = estimate_beta(alpha04, 8);
  CHECK(est04.proxy == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("liouville coefficients follow the growth rule") {
  auto alpha = construct_liouville(1.0, 3);
  // a_1 = ceil(e^1), then a_2 from q_1 = a_1: ceil(e^3 / 3)
  CHECK(alpha.coefficient(1) == 3);
  CHECK(alpha.q(1) == 3);
  CHECK(alpha.coefficient(2) == 7);
  CHECK(alpha.q(2) == 22);
  CHECK(alpha.coefficient(3) == 162950584);  // ceil(e^22 / 22)
}

TEST_CASE("liouville rule prefix converges monotonically to the target") {
  for (const double beta : {0.1, 0.4, 1.0}) {
    auto alpha = construct_liouville(beta, 12);
    const int rd = alpha.rule_depth();
    REQUIRE(rd >= 2);
    auto est = estimate_beta(alpha, rd);
    for (int n = 2; n <= rd - 1; ++n)
      CHECK(est.per_n[static_cast<std::size_t>(n - 1)] <=
            est.per_n[static_cast<std::size_t>(n - 2)]);
    const double last = est.per_n[static_cast<std::size_t>(rd - 2)];
    CHECK(std::abs(last - beta) <= 0.05 * beta);
  }
}

TEST_CASE("liouville invariants survive the tame tail") {
  auto alpha = construct_liouville(0.1, 6);
  check_invariants(alpha, 6);
}

TEST_CASE("liouville with target ln 2 doubles along the rule prefix") {
  auto alpha = construct_liouville(std::numbers::ln2, 5);
  // q_{n+1} >= 2^{q_n} / 2 wherever the rule generated the coefficient
  for (int n = 1; n < alpha.rule_depth(); ++n) {
    const auto qn = alpha.q(n).convert_to<unsigned>();
    REQUIRE(qn < 4096);
    CHECK(alpha.q(n + 1) * 2 >= BigInt(1) << qn);
  }
  CHECK(alpha.materialized_depth() >= 5);
}

TEST_CASE("strict liouville construction reports the reachable depth") {
  LiouvilleOptions opts;
  opts.tame_tail = false;
  CHECK_THROWS_AS(construct_liouville(1.0, 8, opts), DepthCapError);
  try {
    construct_liouville(1.0, 8, opts);
  } catch (const DepthCapError& e) {
    CHECK(e.achievable_depth == 3);
  }
}

TEST_CASE("explicit specs refuse depths beyond their coefficients") {
  auto alpha = FrequencySpec::from_coefficients(
      {BigInt(1), BigInt(2), BigInt(3), BigInt(4), BigInt(5), BigInt(6)});
  CHECK_THROWS_AS(convergents(alpha, 12), InsufficientDepthError);
}

TEST_CASE("reduce_mod_1 basics") {
  auto alpha = FrequencySpec::golden();
  const int N = prepare_depth(alpha, 1000);

  SUBCASE("n = 0 is exact") {
    const auto r = reduce_mod_1(alpha, 0, N);
    CHECK(r.value == 0.0);
    CHECK(r.error_bound == 0.0);
  }
  SUBCASE("n = 1 is the convergent value") {
    const auto r = reduce_mod_1(alpha, 1, N);
    CHECK(r.value == doctest::Approx(0.6180339887498949).epsilon(1e-12));
  }
  SUBCASE("n = q_3 = 3 nearly returns to the integers") {
    const auto r = reduce_mod_1(alpha, 3, N);
    const double dist = std::min(r.value, 1.0 - r.value);
    auto convs = convergents(alpha, 3, 27);
    CHECK(dist >= to_double(convs[2].delta_lo) - r.error_bound - 1e-15);
    CHECK(dist <= to_double(convs[2].delta_hi) + r.error_bound + 1e-15);
  }
  SUBCASE("uncertifiable precision is an error") {
    CHECK_THROWS_AS(reduce_mod_1(alpha, 1'000'000'000, N), PrecisionError);
    CHECK_THROWS_AS(reduce_mod_1(alpha, 1, 100'000), PrecisionError);
  }
}

TEST_CASE("phase walker equals reduce_mod_1 site by site") {
  auto alpha = construct_liouville(0.4, 8);
  const int N = prepare_depth(alpha, 500);
  PhaseWalker walker(alpha, N, -250);
  for (std::int64_t n = -250; n <= 250; ++n) {
    const auto r = reduce_mod_1(alpha, n, N);
    CHECK(walker.value() == doctest::Approx(r.value).epsilon(1e-14));
    walker.step();
  }
}

TEST_CASE("frequency JSON round trip") {
  auto golden = FrequencySpec::golden();
  golden.ensure_depth(5);
  auto j = golden.to_json();
  CHECK(j["kind"] == "golden");
  auto golden_back = FrequencySpec::from_json(j);
  golden_back.ensure_depth(5);
  CHECK(golden_back.q(5) == golden.q(5));

  auto expl = FrequencySpec::from_coefficients({BigInt(2), BigInt(7)});
  auto j2 = expl.to_json();
  CHECK(j2["kind"] == "explicit");
  CHECK(FrequencySpec::from_json(j2).q(2) == expl.q(2));

  auto liou = construct_liouville(0.4, 6);
  auto j3 = liou.to_json();
  CHECK(j3["kind"] == "liouville");
  CHECK(j3["target_beta"] == 0.4);
  auto back = FrequencySpec::from_json(j3);
  back.ensure_depth(6);
  CHECK(back.q(6) == liou.q(6));
}

TEST_CASE("shorthand parsing") {
  CHECK(FrequencySpec::parse("golden").coefficient(1) == 1);
  CHECK(FrequencySpec::parse("silver").coefficient(1) == 2);
  CHECK(FrequencySpec::parse("liouville:0.4").target_beta() == 0.4);
  auto e = FrequencySpec::parse("explicit:[3,1,4,1,5]");
  CHECK(e.coefficient(3) == 4);
  CHECK_THROWS_AS(FrequencySpec::parse("bogus"), Error);
}
