// fpb: configuration-driven experiments for the fractional p-biharmonic
// toolkit. Exit codes: 0 success, 1 numerical failure, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpb/config.hpp"
#include "fpb/cs_extension.hpp"
#include "fpb/dnmap.hpp"
#include "fpb/field_io.hpp"
#include "fpb/inverse.hpp"
#include "fpb/parallel.hpp"
#include "fpb/poincare.hpp"
#include "fpb/solver.hpp"
#include "fpb/verification/criteria.hpp"

#ifndef FPB_VERSION
#define FPB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;

struct Globals {
  std::string config;
  std::string out = "fpb_out";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::vector<int> criteria;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

fpb::ExperimentConfig load(const Globals& g) {
  if (g.config.empty()) throw fpb::ConfigError("--config is required for this command", "", 0);
  fpb::ExperimentConfig cfg = fpb::load_config(g.config);
  if (g.seed) {
    cfg.seed = cfg.poincare_seed = cfg.probe_seed = cfg.noise_seed = *g.seed;
    for (const char* key : {"solver.seed", "solver.poincare_seed", "inverse.probe_seed", "inverse.noise_seed"}) {
      cfg.resolved[key] = std::to_string(*g.seed);
    }
  }
  if (g.tol) {
    if (!(*g.tol > 0.0)) throw fpb::ConfigError("--tol must be positive", "solver.tol", 0);
    cfg.tol = *g.tol;
    std::ostringstream os;
    os.precision(17);
    os << cfg.tol;
    cfg.resolved["solver.tol"] = os.str();
  }
  return cfg;
}

json manifest(const std::string& command, const fpb::ExperimentConfig& cfg, const Globals& g) {
  json j;
  j["artifact"] = "fpb";
  j["version"] = FPB_VERSION;
  j["command"] = command;
  j["config_file"] = g.config;
  j["threads"] = g.threads;
  json resolved = json::object();
  for (const auto& [k, v] : cfg.resolved) resolved[k] = v;
  json overrides = json::object();
  if (g.seed) overrides["seed"] = *g.seed;
  if (g.tol) overrides["tol"] = *g.tol;
  j["config"] = resolved;
  j["overrides"] = overrides;
  return j;
}

fs::path prepare(const Globals& g, const std::string& command, const fpb::ExperimentConfig& cfg) {
  const fs::path dir(g.out);
  fs::create_directories(dir);
  write_json(dir / "manifest.json", manifest(command, cfg, g));
  return dir;
}

json report_json(const fpb::SolveReport& r, const fpb::SolverOptions& opt) {
  json j;
  j["energy"] = r.energy;
  j["gradient_norm"] = r.gradient_norm;
  j["residual"] = r.residual;
  j["iterations"] = r.iterations;
  j["epsilon"] = r.epsilon;
  j["converged"] = r.converged;
  j["message"] = r.message;
  j["energy_history"] = r.energy_history;
  j["tol"] = opt.tol;
  j["budget"] = opt.budget;
  j["eps_schedule"] = opt.eps_schedule;
  j["residual_seed"] = opt.residual_seed;
  return j;
}

void write_timing(const fs::path& dir, double seconds) {
  json t;
  t["wall_seconds"] = seconds;
  write_json(dir / "timing.json", t);
}

fpb::EnergyOperator make_operator(const fpb::ExperimentConfig& cfg, const fpb::GridSpec& grid) {
  return fpb::EnergyOperator(fpb::make_anisotropy(cfg, grid), cfg.s, cfg.p, fpb::make_sigma(cfg, grid));
}

int cmd_forward(const Globals& g) {
  const auto cfg = load(g);
  const auto grid = fpb::make_grid(cfg);
  const auto mask = fpb::make_mask(cfg, grid);
  const auto op = make_operator(cfg, grid);
  const auto data = fpb::make_data(cfg, grid);
  const auto opt = fpb::make_solver_options(cfg);
  const auto dir = prepare(g, "forward", cfg);
  const fpb::SolveReport r = cfg.mode == "interior" ? fpb::solve_interior_source(data, mask, op, opt)
                                                    : fpb::solve_exterior_value(data, mask, op, opt);
  json j = report_json(r, opt);
  j["mode"] = cfg.mode;
  write_json(dir / "result.json", j);
  fpb::write_field(dir / "solution.bin", r.solution);
  fpb::write_field(dir / "solution.csv", r.solution);
  write_timing(dir, r.wall_seconds);
  if (!r.converged) throw NumericalFailure("forward solve did not converge: " + r.message);
  return kOk;
}

int cmd_poincare(const Globals& g) {
  const auto cfg = load(g);
  const auto grid = fpb::make_grid(cfg);
  const auto mask = fpb::make_mask(cfg, grid);
  fpb::PoincareOptions opt;
  opt.tol = cfg.tol;
  opt.restarts = cfg.restarts;
  opt.seed = cfg.poincare_seed;
  opt.budget = cfg.budget;
  opt.memory = cfg.memory;
  const auto dir = prepare(g, "poincare", cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const fpb::PoincareResult r = fpb::poincare_eigenpair(mask, cfg.s, cfg.p, opt);
  json j;
  j["lambda1"] = r.lambda1;
  j["c_star"] = r.c_star;
  j["residual"] = r.residual;
  j["converged"] = r.converged;
  j["message"] = r.message;
  j["distinct_values"] = r.distinct_values;
  j["minimizer_lp_norm"] = fpb::lp_norm(r.minimizer, cfg.p);
  json restarts = json::array();
  for (const auto& o : r.restarts) {
    restarts.push_back({{"seed", o.seed}, {"value", o.value}, {"residual", o.residual}, {"converged", o.converged}});
  }
  j["restarts"] = restarts;
  j["tol"] = opt.tol;
  write_json(dir / "result.json", j);
  fpb::write_field(dir / "minimizer.bin", r.minimizer);
  write_timing(dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  if (!r.converged) throw NumericalFailure("eigenpair search did not converge: " + r.message);
  return kOk;
}

int cmd_dn(const Globals& g) {
  const auto cfg = load(g);
  const auto grid = fpb::make_grid(cfg);
  const auto mask = fpb::make_mask(cfg, grid);
  const auto opt = fpb::make_solver_options(cfg);
  if (cfg.dn_matrix && cfg.p != 2.0) {
    throw fpb::ConfigError(cfg.source + ": [dn] matrix: requires [problem] p = 2", "dn.matrix", 0);
  }
  const auto dir = prepare(g, "dn", cfg);
  const auto t0 = std::chrono::steady_clock::now();
  fpb::DnContext ctx(mask, make_operator(cfg, grid), opt);
  const fpb::TraceDatum f(fpb::make_data(cfg, grid), mask);
  json j;
  try {
    const double value = fpb::dn_pair(ctx, f, f);
    j["pairing"] = value;
    j["error_bound"] = fpb::dn_pair_error_bound(ctx, f, value);
    j["solve"] = report_json(ctx.solve(f), opt);
    if (cfg.dn_matrix) {
      const Eigen::MatrixXd M = fpb::dn_matrix_linear(ctx);
      std::ofstream os(dir / "dn_matrix.csv");
      os.precision(17);
      for (Eigen::Index a = 0; a < M.rows(); ++a) {
        for (Eigen::Index b = 0; b < M.cols(); ++b) os << (b ? "," : "") << M(a, b);
        os << '\n';
      }
      j["matrix_size"] = M.rows();
    }
  } catch (const std::runtime_error& e) {
    throw NumericalFailure(e.what());
  }
  write_json(dir / "result.json", j);
  write_timing(dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return kOk;
}

int cmd_extend(const Globals& g) {
  const auto cfg = load(g);
  if (!(cfg.s > 0.0 && cfg.s < 1.0)) {
    throw fpb::ConfigError(cfg.source + ": [problem] s: the extension requires 0 < s < 1, got " +
                               cfg.resolved.at("problem.s"),
                           "problem.s", 0);
  }
  if (cfg.levels < 4 || !(cfg.y0 > 0.0) || !(cfg.ratio > 0.0 && cfg.ratio < 1.0)) {
    throw fpb::ConfigError(cfg.source + ": [extension]: need levels >= 4, y0 > 0 and 0 < ratio < 1",
                           "extension.levels", 0);
  }
  const auto grid = fpb::make_grid(cfg);
  auto data = fpb::make_data(cfg, grid);
  if (data.components() != 1) throw fpb::ConfigError(cfg.source + ": [problem] m: extension needs m = 1", "problem.m", 0);
  const auto dir = prepare(g, "extend", cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const fpb::PoissonKernelSpec spec(cfg.n, cfg.s);
  // Heights are stored increasing; the geometric sequence descends from y0.
  const fpb::ExtensionSlices slices = fpb::extend(data, fpb::geometric_heights(cfg.y0, cfg.ratio, cfg.levels), spec);
  fpb::NormalTraceOptions nto;
  nto.richardson_terms = cfg.richardson_terms;
  const fpb::NormalTrace trace = fpb::normal_trace(slices, spec, nto);

  fpb::write_stacked_fields(dir / "slices.bin", slices.slices);
  json heights;
  heights["heights"] = slices.heights;
  heights["file"] = "slices.bin";
  write_json(dir / "heights.json", heights);
  fpb::write_field(dir / "trace.bin", trace.trace);

  json j;
  j["heights"] = slices.heights;
  j["tail_mass"] = slices.tail_mass;
  j["support_warning"] = slices.support_warning;
  j["warning"] = slices.warning;
  j["calibration"] = trace.calibration;
  j["relative_error"] = trace.relative_error;
  j["exponent"] = trace.exponent;
  std::vector<double> ratios;
  for (const auto& slice : slices.slices) ratios.push_back(fpb::lp_norm(slice, cfg.p) / fpb::lp_norm(data, cfg.p));
  j["lp_contraction_ratio"] = ratios;
  write_json(dir / "result.json", j);
  write_timing(dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  if (slices.support_warning) std::cerr << "warning: " << slices.warning << '\n';
  return kOk;
}

int cmd_invert(const Globals& g) {
  const auto cfg = load(g);
  const auto grid = fpb::make_grid(cfg);
  const auto mask = fpb::make_mask(cfg, grid);
  if (cfg.boxes.size() != 1) {
    throw fpb::ConfigError(cfg.source + ": [mask] boxes: invert tiles a single interior box", "mask.boxes", 0);
  }
  if (cfg.sigma_levels.empty()) throw fpb::ConfigError(cfg.source + ": missing required field [inverse] levels",
                                                       "inverse.levels", 0);
  const auto window = fpb::window_points(cfg, grid);
  for (std::size_t k : window) {
    if (mask.interior(k)) {
      throw fpb::ConfigError(cfg.source + ": [inverse] window_outer: the window must avoid the interior",
                             "inverse.window_outer", 0);
    }
  }
  if (window.empty()) throw fpb::ConfigError(cfg.source + ": [inverse]: empty probe window", "inverse.window_outer", 0);
  fpb::BlockPartition blocks;
  try {
    blocks = fpb::tile_blocks(grid, cfg.boxes.front(), cfg.block);
  } catch (const std::invalid_argument& e) {
    throw fpb::ConfigError(cfg.source + ": [inverse] block: " + e.what(), "inverse.block", 0);
  }
  const auto A = fpb::make_anisotropy(cfg, grid);
  const auto truth = fpb::make_sigma(cfg, grid);
  const auto opt = fpb::make_solver_options(cfg);
  const auto dir = prepare(g, "invert", cfg);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<fpb::TraceDatum> probes;
  for (const auto& f : fpb::window_probes(grid, window, cfg.probes, cfg.probe_radius, cfg.probe_seed)) {
    fpb::Field full(grid, cfg.m);
    for (std::size_t i = 0; i < grid.size(); ++i) full(i, 0) = f(i);
    probes.emplace_back(full, mask);
  }
  fpb::MeasurementOracle oracle(mask, A, cfg.s, cfg.p, truth, opt);
  fpb::ReconstructionOptions ro;
  ro.budget = cfg.scan_budget;
  ro.noise = cfg.noise;
  ro.noise_seed = cfg.noise_seed;
  fpb::SigmaEstimate est;
  try {
    est = fpb::reconstruct_sigma(oracle, probes, blocks, cfg.sigma_levels, mask, A, cfg.s, cfg.p, opt, ro);
  } catch (const std::runtime_error& e) {
    throw NumericalFailure(e.what());
  }

  fpb::write_field(dir / "sigma_estimate.bin", fpb::Field(grid, 1, [&] {
                     const auto c = est.field(grid, blocks, cfg.sigma_levels.front());
                     return std::vector<double>(c.values().begin(), c.values().end());
                   }()));
  std::ofstream ledger(dir / "ledger.csv");
  ledger.precision(17);
  ledger << "block,level,test,statistic,slack,verdict\n";
  for (const auto& row : est.ledger) {
    ledger << row.block << ',' << row.level << ',' << row.test << ',' << row.statistic << ',' << row.slack << ','
           << row.verdict << '\n';
  }

  json j;
  j["lower"] = est.lower;
  j["upper"] = est.upper;
  j["estimate"] = est.estimate;
  j["inconclusive"] = est.inconclusive;
  j["simulations"] = est.simulations;
  j["budget_exhausted"] = est.budget_exhausted;
  std::vector<double> truth_blocks;
  for (const auto& b : blocks.blocks) truth_blocks.push_back(truth[b.front()]);
  j["truth"] = truth_blocks;
  json meas = json::array();
  for (const auto& m : est.measurements) {
    meas.push_back({{"value", m.value}, {"error", m.error}, {"noise", m.noise}, {"seed", m.seed}});
  }
  j["measurements"] = meas;
  write_json(dir / "result.json", j);
  write_timing(dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  if (est.budget_exhausted) std::cerr << "warning: scan budget exhausted; partial estimate\n";
  return kOk;
}

int cmd_verify(const Globals& g) {
  std::vector<int> ids = g.criteria.empty() ? fpb::verification::criterion_ids() : g.criteria;
  json table = json::array();
  int failed = 0;
  for (int id : ids) {
    fpb::verification::CriterionResult r;
    try {
      r = fpb::verification::run_criterion(id);
    } catch (const std::out_of_range& e) {
      throw fpb::ConfigError(e.what(), "criteria", 0);
    }
    std::cout << fpb::verification::format_result(r) << std::endl;
    table.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"measured", r.measured}});
    failed += r.passed ? 0 : 1;
  }
  std::cout << ids.size() << " criteria, " << failed << " failed\n";
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    json j;
    j["artifact"] = "fpb";
    j["version"] = FPB_VERSION;
    j["criteria"] = table;
    write_json(fs::path(g.out) / "verify.json", j);
  }
  return failed == 0 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional p-biharmonic solvers, DN maps and inverse experiments"};
  app.set_version_flag("--version", std::string(FPB_VERSION));
  Globals g;
  app.add_option("--config", g.config, "experiment configuration file");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1, 256))->capture_default_str();
  app.add_option("--seed", g.seed, "override every seed in the configuration");
  app.add_option("--tol", g.tol, "override the solver tolerance");
  app.require_subcommand(1);
  app.fallthrough();

  std::function<int(const Globals&)> action;
  auto add = [&](const char* name, const char* help, int (*fn)(const Globals&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };
  add("forward", "solve the interior-source or exterior-value problem", cmd_forward);
  add("poincare", "compute the first eigenpair and Poincare constant", cmd_poincare);
  add("dn", "evaluate the DN pairing (and the p = 2 DN matrix)", cmd_dn);
  add("extend", "extension slices and weighted normal trace", cmd_extend);
  add("invert", "level-scan reconstruction of the conformal factor", cmd_invert);
  auto* verify = add("verify", "run the acceptance suite", cmd_verify);
  verify->add_option("--criteria", g.criteria, "criterion ids to run (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  fpb::set_thread_count(g.threads);
  try {
    return action(g);
  } catch (const fpb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
