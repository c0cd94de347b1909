// amo-lab: command line front end for the almost Mathieu laboratory.
//
// Subcommands map onto the library modules: cf (continued fractions),
// det (box determinants), green (boundary Green entries), resonance
// (site classification), uniformity (interpolation products), decay
// (eigenfunction decay fits), lyapunov (transfer cocycle exponent) and
// sweep (parallel parameter grids). Output is CSV or JSON lines,
// byte-identical for any worker count and seed-stable across runs.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "amo/experiment.hpp"

namespace {

void add_common(CLI::App* cmd, amo::ExperimentConfig& cfg) {
  cmd->add_option("--alpha", cfg.alpha,
                  "frequency: golden | silver | liouville:<beta> | "
                  "explicit:[a1,a2,...]");
  cmd->add_flag("--strict-liouville", cfg.strict_liouville,
                "fail instead of continuing with a tame tail when the "
                "Liouville rule hits its bit cap");
  cmd->add_option("-o,--out", cfg.output_path, "output path ('-' = stdout)");
  cmd->add_option("--format", cfg.format, "csv | jsonl");
  cmd->add_option("--seed", cfg.seed, "seed recorded with the output");
  cmd->add_option("--workers", cfg.workers,
                  "worker threads (default: AMO_LAB_WORKERS or 1)");
}

void add_model(CLI::App* cmd, amo::ExperimentConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "coupling");
  cmd->add_option("--theta", cfg.theta, "phase in [0,1)");
  cmd->add_option("--energy", cfg.energy, "energy E");
}

amo::GridSpec parse_grid(const std::string& text) {
  const auto eq = text.find('=');
  const auto c1 = text.find(':', eq + 1);
  const auto c2 = text.find(':', c1 + 1);
  if (eq == std::string::npos || c1 == std::string::npos ||
      c2 == std::string::npos)
    throw CLI::ValidationError("--grid expects name=lo:hi:count");
  amo::GridSpec g;
  g.name = text.substr(0, eq);
  g.lo = std::stod(text.substr(eq + 1, c1 - eq - 1));
  g.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  g.count = std::stoi(text.substr(c2 + 1));
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amo-lab: numerical experiments on the almost Mathieu operator"};
  app.require_subcommand(1);

  amo::ExperimentConfig cfg;
  bool validate_only = false;
  app.add_flag("--validate-only", validate_only,
               "check the configuration and exit");

  auto* cf = app.add_subcommand("cf", "continued-fraction convergents");
  cf->add_option("--depth", cfg.depth, "number of convergents");
  add_common(cf, cfg);

  auto* det = app.add_subcommand("det", "log-scaled box determinant");
  det->add_option("--k", cfg.k, "determinant order");
  det->add_option("--shift", cfg.theta_shift, "phase shift");
  add_model(det, cfg);
  add_common(det, cfg);

  auto* green = app.add_subcommand("green", "boundary Green entries of a box");
  green->add_option("--x1", cfg.box_x1, "left box end");
  green->add_option("--box", cfg.box_size, "box size");
  green->add_option("--y", cfg.y, "probed site");
  add_model(green, cfg);
  add_common(green, cfg);

  auto* res = app.add_subcommand("resonance", "site resonance classification");
  res->add_option("--y", cfg.y, "first site");
  res->add_option("--count", cfg.y_count, "number of consecutive sites");
  add_common(res, cfg);

  auto* uni = app.add_subcommand("uniformity", "interpolation-node uniformity");
  uni->add_option("--n", cfg.n_scale, "scale index (0: largest q_n <= 300)");
  uni->add_option("--ell", cfg.ell, "resonance index");
  uni->add_option("--epsilon", cfg.epsilon, "target epsilon");
  uni->add_option("--grid", cfg.grid_size, "x-grid size (0: 16 q_n)");
  add_model(uni, cfg);
  add_common(uni, cfg);

  auto* decay = app.add_subcommand("decay", "eigenfunction decay-rate fits");
  decay->add_option("--x1", cfg.box_x1, "left box end");
  decay->add_option("--box", cfg.box_size, "box size");
  decay->add_option("--count", cfg.count, "eigenpairs to fit");
  add_model(decay, cfg);
  add_common(decay, cfg);

  auto* lyap = app.add_subcommand("lyapunov", "transfer cocycle exponent");
  lyap->add_option("--steps", cfg.steps, "cocycle length");
  lyap->add_option("--samples", cfg.samples, "phase samples");
  add_model(lyap, cfg);
  add_common(lyap, cfg);

  auto* sweep = app.add_subcommand("sweep", "parallel grid of decay fits");
  std::vector<std::string> grid_texts;
  sweep->add_option("--grid", grid_texts,
                    "grid as name=lo:hi:count (lambda, theta); repeatable");
  sweep->add_option("--x1", cfg.box_x1, "left box end");
  sweep->add_option("--box", cfg.box_size, "box size");
  sweep->add_option("--count", cfg.count, "eigenpairs per grid point");
  add_model(sweep, cfg);
  add_common(sweep, cfg);

  CLI11_PARSE(app, argc, argv);

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    for (const auto& g : grid_texts) cfg.grids.push_back(parse_grid(g));
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (validate_only) {
    const auto violations = amo::validate(cfg);
    for (const auto& v : violations) std::cout << v << "\n";
    return violations.empty() ? 0 : 2;
  }
  return amo::run(cfg);
}
