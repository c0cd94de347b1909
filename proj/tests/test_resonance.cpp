#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "amo/resonance.hpp"
#include "support.hpp"

using namespace amo;

TEST_CASE("sites at exact multiples are resonant with zero distance") {
  // the bracket b_n <= y < b_{n+1} contains y = q_n when
  // q_{n+1} > q_n^{9/8}; take an exponential-regime frequency (or a
  // small golden scale) so the bracket lands at the site's own scale
  auto liou = construct_liouville(0.4, 8);
  for (const int n : {3, 4}) {
    const auto qn = liou.q(n).convert_to<std::int64_t>();
    const auto rep = classify_site(liou, qn);
    CHECK(rep.n == n);
    CHECK(rep.resonant);
    REQUIRE(rep.ell.has_value());
    CHECK(*rep.ell == 1);
    CHECK(rep.distance == 0);
  }
  auto golden = FrequencySpec::golden();
  const auto rep = classify_site(golden, 13);  // q_6, still below the cutoff
  CHECK(rep.n == 6);
  CHECK(rep.resonant);
  CHECK(rep.distance == 0);
}

TEST_CASE("midpoints of large scales are non-resonant") {
  // q_n / 2 > q_n^{8/9} needs q_n > 2^9 = 512: golden q_15 = 987
  auto alpha = FrequencySpec::golden();
  alpha.ensure_depth(25);
  CHECK(alpha.q(15) == 987);
  const auto rep = classify_site(alpha, 987 / 2);
  CHECK(rep.n == 15);
  CHECK_FALSE(rep.resonant);
  CHECK(rep.distance == 987 - 987 / 2);
}

TEST_CASE("the resonance boundary uses <=") {
  auto alpha = FrequencySpec::golden();
  alpha.ensure_depth(25);
  // b_15 = 987^{8/9} = 458.85...: distance 458 is resonant (<=), 459 not
  const auto at_floor = classify_site(alpha, 987 - 458);
  CHECK(at_floor.n == 15);
  CHECK(at_floor.distance == 458);
  CHECK(at_floor.resonant);
  const auto past = classify_site(alpha, 987 - 459);
  CHECK(past.n == 15);
  CHECK(past.distance == 459);
  CHECK_FALSE(past.resonant);
}

TEST_CASE("classification is an exhaustive exclusive dichotomy") {
  auto pow9 = [](BigInt b) {
    BigInt r = 1;
    for (int i = 0; i < 9; ++i) r *= b;
    return r;
  };
  auto pow8 = [](BigInt b) {
    BigInt r = 1;
    for (int i = 0; i < 8; ++i) r *= b;
    return r;
  };
  auto golden = FrequencySpec::golden();
  auto liou = construct_liouville(0.4, 10);
  for (auto* alpha : {&golden, &liou}) {
    for (std::int64_t y = 2; y <= 2000; y += 7) {
      const auto rep = classify_site(*alpha, y);
      CHECK(rep.resonant == rep.ell.has_value());
      // the verdict is exactly dist^9 <= q_n^8 at the bracket scale
      const BigInt qn = alpha->q(rep.n);
      CHECK(rep.resonant == (pow9(BigInt(rep.distance)) <= pow8(qn)));
      CHECK(rep.distance >= 0);
    }
  }
}

TEST_CASE("scale brackets are consistent with b_n") {
  auto alpha = FrequencySpec::golden();
  for (std::int64_t y : {13, 55, 144, 377, 610, 1597}) {
    const auto rep = classify_site(alpha, y);
    CHECK(rep.b_n <= static_cast<double>(y) * (1 + 1e-12));
    // y < b_{n+1}: reconstruct from the next scale
    auto alpha2 = FrequencySpec::golden();
    alpha2.ensure_depth(rep.n + 2);
    const double b_next =
        std::exp((8.0 / 9.0) * log_big(alpha2.q(rep.n + 1)));
    CHECK(static_cast<double>(y) < b_next * (1 + 1e-12));
  }
}

TEST_CASE("classify_site preconditions") {
  auto alpha = FrequencySpec::silver();  // b_1 = 2^{8/9} > 1
  CHECK_THROWS_AS(classify_site(alpha, 1), Error);
  auto shallow = FrequencySpec::from_coefficients({BigInt(1), BigInt(1)});
  CHECK_THROWS_AS(classify_site(shallow, 1000), InsufficientDepthError);
}

// ---------------------------------------------------------------------------
// uniformity

TEST_CASE("two-node product matches the closed form") {
  // S_i(x) = ln|x - c_j| - ln|c_i - c_j| is maximized at an endpoint
  const std::vector<double> nodes{0.3, -0.5};
  const auto mx = uniformity_log_product_max(nodes, 64);
  const double gap = std::abs(nodes[0] - nodes[1]);
  const double expect =
      std::max({std::log(std::abs(1.0 - nodes[1])) - std::log(gap),
                std::log(std::abs(-1.0 - nodes[1])) - std::log(gap),
                std::log(std::abs(1.0 - nodes[0])) - std::log(gap),
                std::log(std::abs(-1.0 - nodes[0])) - std::log(gap)});
  CHECK(mx.log_product == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("kernel agrees with the brute-force evaluation") {
  // artificial equally spaced angles
  std::vector<double> nodes;
  const int m = 24;
  for (int j = 0; j < m; ++j)
    nodes.push_back(std::cos(2 * std::numbers::pi * (j + 0.35) / m));
  const auto mx = uniformity_log_product_max(nodes, 16 * m);
  const double brute = test::brute_force_uniformity(nodes, 200001);
  CHECK(mx.log_product == doctest::Approx(brute).epsilon(1e-9).scale(1.0));
}

TEST_CASE("degenerate node pairs are reported") {
  std::vector<double> nodes{0.25, -0.125, 0.25 + 5e-15};
  CHECK_THROWS_AS(uniformity_log_product_max(nodes, 64),
                  DegenerateNodesError);
}

TEST_CASE("interval construction matches the two-block form") {
  auto alpha = construct_liouville(0.4, 8);
  auto params = ModelParams::make(std::exp(1.0), std::move(alpha), 0.31, 0.0,
                                  4096);
  const auto rep = uniformity_product(params, 4, 1, 0.2, 0);
  CHECK(rep.q_n == 137);
  const std::int64_t f = 2 * 137 / 3;  // 91
  CHECK(rep.i1.x1 == -f);
  CHECK(rep.i1.x2 == f - 2);
  CHECK(rep.i2.x1 == 0 * 137 + f - 1);
  CHECK(rep.i2.x2 == 2 * 137 - f - 1);
  CHECK(rep.i1.size() + rep.i2.size() == 2 * 137);
  CHECK(rep.grid_size >= 8 * 2 * 137);
  CHECK(rep.beta_proxy == doctest::Approx(0.4).epsilon(1e-4));
}

TEST_CASE("uniformity bound holds at the Liouville working scale") {
  auto alpha = construct_liouville(0.4, 8);
  auto params = ModelParams::make(std::exp(1.0), std::move(alpha), 0.31, 0.0,
                                  4096);
  const auto rep = uniformity_product(params, 4, 1, 0.2, 0);
  CHECK(rep.epsilon_achieved <= rep.beta_proxy / 2 + 0.2);
  CHECK(rep.within_bound);

  SUBCASE("grid refinement is stable") {
    const auto rep2 =
        uniformity_product(params, 4, 1, 0.2, 2 * rep.grid_size);
    CHECK(std::abs(rep2.epsilon_achieved - rep.epsilon_achieved) <= 1e-3);
  }
}

TEST_CASE("a generic phase avoids degenerate nodes at moderate scales") {
  // theta passing the exceptional-set proxy scan keeps the node set
  // separated at every reachable scale with q_n <= 200
  auto alpha = FrequencySpec::golden();
  auto report = is_exceptional_phase(0.31, alpha, 10000);
  CHECK_FALSE(report.possibly_exceptional);
  auto params =
      ModelParams::make(2.0, FrequencySpec::golden(), 0.31, 0.0, 8192);
  for (int n = 4; params.alpha().q(n) <= 200; ++n) {
    if (params.alpha().q(n) < 8) continue;
    const auto rep = uniformity_product(params, n, 1, 0.2, 0);
    CHECK(std::isfinite(rep.epsilon_achieved));
  }
}

// ---------------------------------------------------------------------------
// sine sums

TEST_CASE("sine sum is empty at the first golden scale") {
  auto alpha = FrequencySpec::golden();
  const std::vector<std::int64_t> shifts{0};
  const auto res = sine_sum_check(alpha, 0.37, 1, 6, shifts);
  CHECK(res.sum == 0.0);
  CHECK(res.deviation == 0.0);
}

TEST_CASE("unshifted golden sine sums have a small constant") {
  auto alpha = FrequencySpec::golden();
  alpha.ensure_depth(20);
  const std::int64_t qn = alpha.q(8).convert_to<std::int64_t>();  // 34
  const std::vector<std::int64_t> shifts(static_cast<std::size_t>(qn), 0);
  const auto res = sine_sum_check(alpha, 0.29, 8, 13, shifts);
  CHECK(std::abs(res.sum + (qn - 1) * std::numbers::ln2) <=
        10 * std::log(static_cast<double>(qn)));
}

TEST_CASE("both deviation directions carry one fitted constant") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto golden = FrequencySpec::golden();
  golden.ensure_depth(26);
  auto liou = construct_liouville(0.4, 10);

  double fitted = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const double x = unif(rng);
    // golden at a few scales, shifts zero, r chosen to satisfy the
    // precondition 10 m q_n < q_{r+1}
    for (const int n : {6, 8, 10}) {
      const auto qn = golden.q(n).convert_to<std::int64_t>();
      const std::vector<std::int64_t> shifts(static_cast<std::size_t>(qn), 0);
      const auto res = sine_sum_check(golden, x, n, n + 5, shifts);
      fitted = std::max(fitted, std::abs(res.deviation));
    }
    // Liouville at the resonant scale with nonzero shift patterns
    const auto qn = liou.q(4).convert_to<std::int64_t>();  // 137
    std::vector<std::int64_t> shifts(static_cast<std::size_t>(qn));
    for (auto& s : shifts)
      s = static_cast<std::int64_t>(unif(rng) * 5) - 2;  // |m_k| <= 2
    const auto res = sine_sum_check(liou, x, 4, 4, shifts);
    fitted = std::max(fitted, std::abs(res.deviation));
  }
  CHECK(fitted <= 20.0);
  CHECK(fitted > 0.0);
}

TEST_CASE("sine sum enforces the shift precondition") {
  auto golden = FrequencySpec::golden();
  golden.ensure_depth(12);
  const auto qn = golden.q(6).convert_to<std::int64_t>();
  // r = n = 6: q_7 / (10 q_6) < 1, so even m = 1 violates it
  const std::vector<std::int64_t> shifts(static_cast<std::size_t>(qn), 0);
  CHECK_THROWS_AS(sine_sum_check(golden, 0.3, 6, 6, shifts), Error);
}

// ---------------------------------------------------------------------------
// exceptional phases

TEST_CASE("theta = 0 is exceptional through the integer relation") {
  auto alpha = FrequencySpec::golden();
  const auto rep = is_exceptional_phase(0.0, alpha, 50);
  CHECK(rep.possibly_exceptional);
  bool has_zero = false;
  for (const auto s : rep.integer_relation_hits) has_zero |= (s == 0);
  CHECK(has_zero);
}

TEST_CASE("a generic theta scans clean to K = 10^4") {
  auto alpha = FrequencySpec::golden();
  const auto rep = is_exceptional_phase(0.31, alpha, 10000);
  CHECK(rep.small_sine_hits.empty());
  CHECK(rep.integer_relation_hits.empty());
  CHECK_FALSE(rep.possibly_exceptional);
}

TEST_CASE("constructed near-resonant theta is flagged at k = q_n") {
  auto alpha = FrequencySpec::golden();
  alpha.ensure_depth(40);
  const int N = prepare_depth(alpha, 100000);
  const std::int64_t qn = alpha.q(16).convert_to<std::int64_t>();  // 1597
  const double qa = to_double(multiple_mod_1(alpha, BigInt(qn), N));
  const double theta = (1.0 - qa) / 2.0;
  const auto rep = is_exceptional_phase(theta, alpha, 2 * qn);
  bool hit_at_qn = false;
  for (const auto k : rep.small_sine_hits) hit_at_qn |= (k == qn);
  CHECK(hit_at_qn);
}
