#include "amo/experiment.hpp"

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "amo/frequency.hpp"
#include "amo/green.hpp"
#include "amo/localization.hpp"
#include "amo/resonance.hpp"

namespace amo {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_int(std::int64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%" PRId64, v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // cells are pre-rendered
};

constexpr const char* kSchemaVersion = "v1";

std::string provenance(const std::string& op) {
  return "amo." + op + "/" + kSchemaVersion;
}

int resolve_workers(const ExperimentConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  if (const char* env = std::getenv("AMO_LAB_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

// Deterministic parallel map: results land by index, so the output is
// identical for any worker count.
template <typename Fn>
std::vector<std::vector<std::string>> parallel_rows(int n_items, int workers,
                                                    Fn&& fn) {
  std::vector<std::vector<std::string>> rows(
      static_cast<std::size_t>(n_items));
  if (workers <= 1) {
    for (int i = 0; i < n_items; ++i) rows[static_cast<std::size_t>(i)] = fn(i);
    return rows;
  }
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_items) return;
      rows[static_cast<std::size_t>(i)] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, n_items); ++w)
    pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return rows;
}

FrequencySpec make_alpha(const ExperimentConfig& cfg) {
  if (cfg.alpha.rfind("liouville:", 0) == 0 && cfg.strict_liouville) {
    const double beta = std::stod(cfg.alpha.substr(10));
    LiouvilleOptions opts;
    opts.tame_tail = false;
    return construct_liouville(beta, std::max(3, cfg.depth), opts);
  }
  return FrequencySpec::parse(cfg.alpha);
}

// --- command tables --------------------------------------------------------

Table rows_cf(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"n",        "p",        "q",       "delta_lo",
               "delta_hi", "ln_ratio", "provenance", "error"};
  FrequencySpec alpha = make_alpha(cfg);
  auto convs = convergents(alpha, cfg.depth);
  const auto est = estimate_beta(alpha, cfg.depth);
  for (const auto& c : convs) {
    std::vector<std::string> row;
    row.push_back(fmt_int(c.n));
    row.push_back(c.p.str());
    row.push_back(c.q.str());
    row.push_back(fmt_double(to_double(c.delta_lo)));
    row.push_back(fmt_double(to_double(c.delta_hi)));
    row.push_back(fmt_double(est.per_n[static_cast<std::size_t>(c.n - 1)]));
    row.push_back(provenance("frequency.convergents"));
    row.push_back("");
    t.rows.push_back(std::move(row));
  }
  return t;
}

ModelParams make_params(const ExperimentConfig& cfg, double lambda,
                        double theta, double energy,
                        std::int64_t max_site_hint) {
  return ModelParams::make(lambda, make_alpha(cfg), theta, energy,
                           max_site_hint);
}

Table rows_det(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"k",    "theta_shift", "sign",      "log_mag",
               "value", "provenance", "error"};
  const ModelParams params = make_params(cfg, cfg.lambda, cfg.theta,
                                         cfg.energy.value_or(0.0),
                                         std::max<std::int64_t>(cfg.k, 4));
  const LogDet d = det_p(params, cfg.theta_shift, cfg.k);
  std::vector<std::string> row{fmt_int(d.k),
                               fmt_double(cfg.theta_shift),
                               fmt_int(d.sign),
                               fmt_double(d.log_mag),
                               std::abs(d.log_mag) < 700 ? fmt_double(d.value())
                                                         : std::string(),
                               provenance("operator.det_p"),
                               ""};
  t.rows.push_back(std::move(row));
  return t;
}

Table rows_green(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"x1",          "x2",           "y",
               "g_left_sign", "g_left_log",   "g_right_sign",
               "g_right_log", "provenance",   "error"};
  const Box box{cfg.box_x1, cfg.box_x1 + cfg.box_size - 1};
  const ModelParams params =
      make_params(cfg, cfg.lambda, cfg.theta, cfg.energy.value_or(0.0),
                  std::max<std::int64_t>(std::abs(box.x1) + box.size(), 16));
  std::vector<std::string> row{fmt_int(box.x1), fmt_int(box.x2),
                               fmt_int(cfg.y)};
  try {
    const BoxGreen g = green_cramer(params, box, cfg.y);
    row.push_back(fmt_int(g.g_left.sign));
    row.push_back(fmt_double(g.g_left.log_mag));
    row.push_back(fmt_int(g.g_right.sign));
    row.push_back(fmt_double(g.g_right.log_mag));
    row.push_back(provenance("green.green_cramer"));
    row.push_back("");
  } catch (const Error& e) {
    row.insert(row.end(), {"", "", "", "", provenance("green.green_cramer"),
                           e.what()});
  }
  t.rows.push_back(std::move(row));
  return t;
}

Table rows_resonance(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"y",   "n",        "q_n",       "b_n",  "resonant",
               "ell", "distance", "provenance", "error"};
  FrequencySpec alpha = make_alpha(cfg);
  for (std::int64_t y = cfg.y; y < cfg.y + cfg.y_count; ++y) {
    std::vector<std::string> row{fmt_int(y)};
    try {
      const ResonanceReport r = classify_site(alpha, y);
      row.push_back(fmt_int(r.n));
      row.push_back(fmt_double(r.q_n));
      row.push_back(fmt_double(r.b_n));
      row.push_back(r.resonant ? "1" : "0");
      row.push_back(r.ell ? fmt_int(*r.ell) : "");
      row.push_back(fmt_int(r.distance));
      row.push_back(provenance("resonance.classify_site"));
      row.push_back("");
    } catch (const Error& e) {
      row.insert(row.end(), {"", "", "", "", "", "",
                             provenance("resonance.classify_site"), e.what()});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table rows_uniformity(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"n",     "ell",   "q_n",        "i1_lo",      "i1_hi",
               "i2_lo", "i2_hi", "epsilon_achieved",          "bound",
               "beta_proxy",     "grid_size",  "within_bound", "provenance",
               "error"};
  FrequencySpec alpha = make_alpha(cfg);
  int n = cfg.n_scale;
  if (n <= 0) {
    // largest scale with q_n <= 300
    n = 1;
    alpha.ensure_depth(3);
    while (alpha.q(n + 1) <= 300) {
      alpha.ensure_depth(n + 3);
      ++n;
    }
  }
  alpha.ensure_depth(n + 2);
  const auto qn = alpha.q(n).convert_to<std::int64_t>();
  const ModelParams params = ModelParams::make(
      cfg.lambda, std::move(alpha), cfg.theta, cfg.energy.value_or(0.0),
      std::max<std::int64_t>(16, (cfg.ell + 2) * qn));
  std::vector<std::string> row;
  try {
    const UniformityReport r =
        uniformity_product(params, n, cfg.ell, cfg.epsilon, cfg.grid_size);
    row = {fmt_int(r.n),
           fmt_int(r.ell),
           fmt_int(r.q_n),
           fmt_int(r.i1.x1),
           fmt_int(r.i1.x2),
           fmt_int(r.i2.x1),
           fmt_int(r.i2.x2),
           fmt_double(r.epsilon_achieved),
           fmt_double(r.bound),
           fmt_double(r.beta_proxy),
           fmt_int(r.grid_size),
           r.within_bound ? "1" : "0",
           provenance("resonance.uniformity_product"),
           ""};
  } catch (const Error& e) {
    row = {fmt_int(n), fmt_int(cfg.ell), "", "", "", "", "", "", "", "", "",
           "", provenance("resonance.uniformity_product"), e.what()};
  }
  t.rows.push_back(std::move(row));
  return t;
}

std::vector<std::string> decay_row(const ModelParams& params,
                                   const Eigenpair& pair, double beta_proxy,
                                   std::int64_t box_size) {
  std::vector<std::string> row{fmt_double(params.lambda()),
                               fmt_double(beta_proxy)};
  // largest q_n at or under the box size: the scale the box resolves
  const FrequencySpec& a = params.alpha();
  BigInt qn = a.q(1);
  for (int n = 1; n + 1 <= a.materialized_depth() && a.q(n) <= box_size; ++n)
    qn = a.q(n);
  row.push_back(fmt_double(qn.convert_to<double>()));
  row.push_back(fmt_double(pair.energy));
  try {
    const DecayReport rep = fit_decay(pair, params, beta_proxy);
    row.push_back(fmt_double(rep.fitted_rate));
    row.push_back(fmt_double(rep.predicted_rate_floor));
    row.push_back(fmt_double(rep.r_squared));
    row.push_back(fmt_int(box_size));
    row.push_back(provenance("localization.fit_decay"));
    row.push_back("");
  } catch (const Error& e) {
    row.insert(row.end(),
               {"", "", "", fmt_int(box_size),
                provenance("localization.fit_decay"), e.what()});
  }
  return row;
}

const std::vector<std::string> kDecayColumns = {
    "lambda",     "beta_proxy", "q_n",       "energy", "fitted_rate",
    "floor",      "r_squared",  "box_size",  "provenance", "error"};

Table rows_decay(const ExperimentConfig& cfg) {
  Table t;
  t.columns = kDecayColumns;
  const Box box{cfg.box_x1, cfg.box_x1 + cfg.box_size - 1};
  const ModelParams params =
      make_params(cfg, cfg.lambda, cfg.theta, 0.0,
                  std::max<std::int64_t>(std::abs(box.x1) + box.size(), 16));
  const double beta_proxy = beta_proxy_of(params.alpha());
  Selector sel;
  sel.kind = Selector::Kind::MostLocalized;
  sel.target_median = true;
  const auto pairs = eigensolve(params, box, cfg.count, sel);
  for (const auto& pair : pairs)
    t.rows.push_back(decay_row(params.with_energy(pair.energy), pair,
                               beta_proxy, box.size()));
  return t;
}

Table rows_lyapunov(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"lambda", "energy",    "steps", "samples",
               "value",  "provenance", "error"};
  const ModelParams params = make_params(cfg, cfg.lambda, cfg.theta,
                                         cfg.energy.value_or(0.0),
                                         std::max<std::int64_t>(cfg.steps, 4));
  const double value = lyapunov(params, cfg.steps, cfg.samples);
  t.rows.push_back({fmt_double(params.lambda()), fmt_double(params.energy()),
                    fmt_int(cfg.steps), fmt_int(cfg.samples),
                    fmt_double(value), provenance("localization.lyapunov"),
                    ""});
  return t;
}

Table rows_sweep(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"grid_index"};
  for (const auto& g : cfg.grids) t.columns.push_back(g.name);
  t.columns.insert(t.columns.end(), kDecayColumns.begin(),
                   kDecayColumns.end());

  int total = 1;
  for (const auto& g : cfg.grids) total *= g.count;

  const int workers = resolve_workers(cfg);
  std::vector<std::vector<std::vector<std::string>>> chunks(
      static_cast<std::size_t>(total));
  auto compute_point = [&](int index) {
    // unravel the grid index, first grid fastest
    double lambda = cfg.lambda;
    double theta = cfg.theta;
    std::vector<double> values;
    int rem = index;
    for (const auto& g : cfg.grids) {
      const int i = rem % g.count;
      rem /= g.count;
      const double v = g.at(i);
      values.push_back(v);
      if (g.name == "lambda") lambda = v;
      if (g.name == "theta") theta = v;
    }
    const Box box{cfg.box_x1, cfg.box_x1 + cfg.box_size - 1};
    const ModelParams params = make_params(
        cfg, lambda, theta, 0.0,
        std::max<std::int64_t>(std::abs(box.x1) + box.size(), 16));
    const double beta_proxy = beta_proxy_of(params.alpha());
    Selector sel;
    sel.kind = Selector::Kind::MostLocalized;
    sel.target_median = true;
    std::vector<std::vector<std::string>> rows;
    try {
      const auto pairs = eigensolve(params, box, cfg.count, sel);
      for (const auto& pair : pairs) {
        auto row = decay_row(params.with_energy(pair.energy), pair,
                             beta_proxy, box.size());
        std::vector<std::string> full{fmt_int(index)};
        for (const double v : values) full.push_back(fmt_double(v));
        full.insert(full.end(), row.begin(), row.end());
        rows.push_back(std::move(full));
      }
    } catch (const Error& e) {
      std::vector<std::string> full{fmt_int(index)};
      for (const double v : values) full.push_back(fmt_double(v));
      full.resize(t.columns.size() - 1);
      full.push_back(e.what());
      rows.push_back(std::move(full));
    }
    return rows;
  };

  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= total) return;
      chunks[static_cast<std::size_t>(i)] = compute_point(i);
    }
  };
  if (workers <= 1) {
    for (int i = 0; i < total; ++i)
      chunks[static_cast<std::size_t>(i)] = compute_point(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, total); ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& chunk : chunks)
    for (auto& row : chunk) t.rows.push_back(std::move(row));
  return t;
}

Table dispatch(const ExperimentConfig& cfg) {
  if (cfg.command == "cf") return rows_cf(cfg);
  if (cfg.command == "det") return rows_det(cfg);
  if (cfg.command == "green") return rows_green(cfg);
  if (cfg.command == "resonance") return rows_resonance(cfg);
  if (cfg.command == "uniformity") return rows_uniformity(cfg);
  if (cfg.command == "decay") return rows_decay(cfg);
  if (cfg.command == "lyapunov") return rows_lyapunov(cfg);
  if (cfg.command == "sweep") return rows_sweep(cfg);
  throw Error("unknown command: " + cfg.command);
}

std::string render_csv(const ExperimentConfig& cfg, const Table& t) {
  std::ostringstream os;
  os << "# amo-lab csv schema " << kSchemaVersion << " command=" << cfg.command
     << " seed=" << cfg.seed << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) os << ',';
    os << t.columns[c];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      os << row[c];
    }
    os << '\n';
  }
  return os.str();
}

std::string render_jsonl(const Table& t) {
  std::ostringstream os;
  for (const auto& row : t.rows) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t c = 0; c < t.columns.size() && c < row.size(); ++c)
      j[t.columns[c]] = row[c];
    os << j.dump() << '\n';
  }
  return os.str();
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> v;
  static const char* kCommands[] = {"cf",         "det",   "green",
                                    "resonance",  "uniformity", "decay",
                                    "lyapunov",   "sweep"};
  bool known = false;
  for (const char* c : kCommands) known = known || cfg.command == c;
  if (!known) v.push_back("unknown command '" + cfg.command + "'");

  try {
    FrequencySpec spec = make_alpha(cfg);
    if (cfg.command == "cf") spec.ensure_depth(cfg.depth + 2);
  } catch (const DepthCapError& e) {
    v.push_back(std::string("frequency: ") + e.what());
  } catch (const Error& e) {
    v.push_back(std::string("frequency: ") + e.what());
  }

  if (cfg.command != "cf" && cfg.command != "resonance" && cfg.lambda <= 0)
    v.push_back(
        "lambda must be positive (negative couplings reduce to "
        "lambda > 0 with theta + 1/2; lambda = 0 is the free case, not "
        "an experiment target)");
  if (cfg.command == "cf" && cfg.depth < 1)
    v.push_back("cf: depth must be >= 1");
  if (cfg.command == "det" && cfg.k < 0) v.push_back("det: k must be >= 0");
  if ((cfg.command == "green" || cfg.command == "decay" ||
       cfg.command == "sweep") &&
      cfg.box_size < 1)
    v.push_back(cfg.command + ": box must be nonempty");
  if ((cfg.command == "decay" || cfg.command == "sweep") &&
      cfg.box_size > 10000)
    v.push_back(cfg.command + ": box exceeds the eigensolver cap 10000");
  if (cfg.command == "green" &&
      !(cfg.box_x1 <= cfg.y && cfg.y < cfg.box_x1 + cfg.box_size))
    v.push_back("green: probe site y outside the box");
  if (cfg.command == "lyapunov" && cfg.steps < 10000)
    v.push_back("lyapunov: steps must be >= 10000");
  if (cfg.command == "sweep") {
    if (cfg.grids.empty()) v.push_back("sweep: no grid given");
    for (const auto& g : cfg.grids) {
      if (g.count < 1)
        v.push_back("sweep: grid '" + g.name + "' is empty");
      if (g.name != "lambda" && g.name != "theta")
        v.push_back("sweep: unknown grid dimension '" + g.name + "'");
      if (g.name == "lambda" && (g.lo <= 0 || g.hi <= 0))
        v.push_back(
            "sweep: lambda grid must stay positive (negative couplings "
            "reduce to lambda > 0 with theta + 1/2)");
    }
  }
  if (cfg.format != "csv" && cfg.format != "jsonl")
    v.push_back("format must be csv or jsonl");
  if (cfg.count < 1) v.push_back("count must be >= 1");
  return v;
}

std::string render(const ExperimentConfig& cfg) {
  const Table t = dispatch(cfg);
  return cfg.format == "jsonl" ? render_jsonl(t) : render_csv(cfg, t);
}

int run(const ExperimentConfig& cfg) {
  const auto violations = validate(cfg);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "invalid config: " << v << "\n";
    return 2;
  }
  std::string text;
  try {
    text = render(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (cfg.output_path == "-") {
    std::cout << text;
    return std::cout ? 0 : 1;
  }
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open " << cfg.output_path << "\n";
    return 1;
  }
  out << text;
  return out ? 0 : 1;
}

}  // namespace amo
