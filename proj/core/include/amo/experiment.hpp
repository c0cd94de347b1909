#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace amo {

/// Inclusive linear grid lo..hi with `count` points.
struct GridSpec {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
  double at(int i) const {
    if (count <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) /
                    static_cast<double>(count - 1);
  }
};

/// One experiment invocation. `command` selects the owning module
/// operation; unused fields are ignored by the dispatcher.
struct ExperimentConfig {
  std::string command;  // cf|det|green|resonance|uniformity|decay|lyapunov|sweep
  std::string alpha = "golden";
  bool strict_liouville = false;  // no tame tail past the rule cap

  double lambda = 3.0;
  double theta = 0.31;
  std::optional<double> energy;

  int depth = 20;            // cf
  std::int64_t k = 100;      // det
  double theta_shift = 0.0;  // det

  std::int64_t box_x1 = 0;   // green / decay / sweep
  std::int64_t box_size = 2000;
  std::int64_t y = 0;        // green probe / resonance start
  std::int64_t y_count = 1;  // resonance row count

  int n_scale = 0;           // uniformity (0: largest q_n <= 300)
  std::int64_t ell = 1;
  double epsilon = 0.2;
  int grid_size = 0;

  int count = 5;             // decay/sweep eigenpairs per point
  std::int64_t steps = 20000;  // lyapunov
  int samples = 8;

  std::vector<GridSpec> grids;  // sweep only; empty grid is invalid

  std::string output_path = "-";  // "-" writes to stdout
  std::string format = "csv";     // csv | jsonl
  std::uint64_t seed = 1;
  int workers = 0;  // 0: AMO_LAB_WORKERS env or 1
};

/// Violation list; empty iff run() would pass the target operation's
/// preconditions.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Dispatches, writes header + rows to the output path, and returns
/// the process exit status: 0 on success (row-level failures become
/// rows with an error column), 1 on I/O failure, 2 on invalid config.
int run(const ExperimentConfig& config);

/// Rendered output of a run without touching the filesystem; used by
/// run() and directly by tests.
std::string render(const ExperimentConfig& config);

}  // namespace amo
