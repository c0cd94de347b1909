#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amo/experiment.hpp"

using namespace amo;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("cf renders the documented csv columns") {
  ExperimentConfig cfg;
  cfg.command = "cf";
  cfg.alpha = "golden";
  cfg.depth = 8;
  const auto text = render(cfg);
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == 2 + 8);
  CHECK(lines[0].rfind("# amo-lab csv schema v1 command=cf", 0) == 0);
  CHECK(lines[1] ==
        "n,p,q,delta_lo,delta_hi,ln_ratio,provenance,error");
  // Fibonacci q column, provenance on every row
  CHECK(lines[2].rfind("1,1,1,", 0) == 0);
  CHECK(lines[7].rfind("6,8,13,", 0) == 0);
  for (std::size_t i = 2; i < lines.size(); ++i)
    CHECK(lines[i].find("amo.frequency.convergents/v1") != std::string::npos);
}

TEST_CASE("jsonl mirrors the csv columns as keys") {
  ExperimentConfig cfg;
  cfg.command = "cf";
  cfg.depth = 4;
  cfg.format = "jsonl";
  const auto lines = lines_of(render(cfg));
  REQUIRE(lines.size() == 4);
  for (const auto& line : lines) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("n"));
    CHECK(j.contains("q"));
    CHECK(j.contains("delta_lo"));
    CHECK(j.contains("provenance"));
  }
  CHECK(nlohmann::json::parse(lines[3])["q"] == "5");
}

TEST_CASE("validate flags an empty sweep grid") {
  ExperimentConfig cfg;
  cfg.command = "sweep";
  const auto v = validate(cfg);
  REQUIRE(!v.empty());
  bool mentions_grid = false;
  for (const auto& s : v) mentions_grid |= s.find("grid") != std::string::npos;
  CHECK(mentions_grid);
}

TEST_CASE("validate flags nonpositive couplings with the reduction rule") {
  ExperimentConfig cfg;
  cfg.command = "decay";
  cfg.lambda = -2.0;
  const auto v = validate(cfg);
  REQUIRE(!v.empty());
  bool mentions = false;
  for (const auto& s : v)
    mentions |= s.find("theta + 1/2") != std::string::npos;
  CHECK(mentions);
}

TEST_CASE("validate echoes the liouville depth cap in strict mode") {
  ExperimentConfig cfg;
  cfg.command = "cf";
  cfg.alpha = "liouville:1.0";
  cfg.depth = 10;
  cfg.strict_liouville = true;
  const auto v = validate(cfg);
  REQUIRE(!v.empty());
  bool mentions_cap = false;
  for (const auto& s : v)
    mentions_cap |= s.find("depth cap") != std::string::npos;
  CHECK(mentions_cap);

  cfg.strict_liouville = false;
  CHECK(validate(cfg).empty());
}

TEST_CASE("validate passes the documented examples") {
  ExperimentConfig cfg;
  cfg.command = "decay";
  cfg.alpha = "liouville:0.4";
  cfg.lambda = 2.7182818;
  cfg.box_size = 400;
  cfg.count = 3;
  CHECK(validate(cfg).empty());
}

TEST_CASE("decay emits the documented row schema") {
  ExperimentConfig cfg;
  cfg.command = "decay";
  cfg.alpha = "golden";
  cfg.lambda = 3.0;
  cfg.box_size = 400;
  cfg.count = 3;
  const auto lines = lines_of(render(cfg));
  REQUIRE(lines.size() >= 3);
  CHECK(lines[1] ==
        "lambda,beta_proxy,q_n,energy,fitted_rate,floor,r_squared,box_size,"
        "provenance,error");
  CHECK(lines.size() == 2 + 3);
}

TEST_CASE("sweep output is byte-identical across worker counts and runs") {
  ExperimentConfig cfg;
  cfg.command = "sweep";
  cfg.alpha = "golden";
  cfg.grids.push_back({"lambda", 1.5, 5.0, 6});
  cfg.box_size = 300;
  cfg.count = 2;
  cfg.seed = 17;

  cfg.workers = 1;
  const auto once = render(cfg);
  const auto again = render(cfg);
  cfg.workers = 4;
  const auto parallel = render(cfg);

  CHECK(once == again);
  CHECK(once == parallel);
  // sanity: one row per (grid point, eigenpair) plus comment + header
  CHECK(lines_of(once).size() == 2 + 6 * 2);
}

TEST_CASE("uniformity command picks the working scale automatically") {
  ExperimentConfig cfg;
  cfg.command = "uniformity";
  cfg.alpha = "liouville:0.4";
  cfg.lambda = 2.7182818;
  cfg.theta = 0.31;
  const auto lines = lines_of(render(cfg));
  REQUIRE(lines.size() == 3);
  // columns: n,ell,q_n,...: the auto-selected scale has q_n = 137
  CHECK(lines[2].rfind("4,1,137,", 0) == 0);
  CHECK(lines[2].find("amo.resonance.uniformity_product/v1") !=
        std::string::npos);
}

TEST_CASE("resonance rows carry the error column on failures") {
  ExperimentConfig cfg;
  cfg.command = "resonance";
  cfg.alpha = "silver";
  cfg.y = 1;  // below b_1 for silver: row-level error, exit stays 0
  cfg.y_count = 3;
  const auto lines = lines_of(render(cfg));
  REQUIRE(lines.size() == 2 + 3);
  CHECK(lines[2].find("below the first scale") != std::string::npos);
  CHECK(lines[3].find("below the first scale") == std::string::npos);
}

TEST_CASE("run writes the file and returns 0") {
  ExperimentConfig cfg;
  cfg.command = "cf";
  cfg.depth = 5;
  cfg.output_path = "/tmp/amo_cf_test.csv";
  CHECK(run(cfg) == 0);
  std::ifstream in(cfg.output_path);
  REQUIRE(in.good());
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("# amo-lab csv schema v1", 0) == 0);
}

TEST_CASE("run rejects invalid configs with exit 2") {
  ExperimentConfig cfg;
  cfg.command = "nonsense";
  CHECK(run(cfg) == 2);
}
