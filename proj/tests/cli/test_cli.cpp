#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fpb/config.hpp"
#include "fpb/field_io.hpp"
#include "fpb/verification/oracles.hpp"

using namespace fpb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kExe = FPB_EXE;
const fs::path kConfigs = FPB_CONFIG_DIR;
const fs::path kData = FPB_TEST_DATA_DIR;
const fs::path kWork = FPB_WORK_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

/// Runs fpb with the given argument string; captures stdout and stderr.
Run run_fpb(const std::string& args, const std::string& tag) {
  fs::create_directories(kWork);
  const fs::path o = kWork / (tag + ".stdout");
  const fs::path e = kWork / (tag + ".stderr");
  const std::string cmd = kExe.string() + " " + args + " > " + o.string() + " 2> " + e.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

fs::path outdir(const std::string& tag) {
  const fs::path d = kWork / tag;
  fs::remove_all(d);
  return d;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

/// Copy of a shipped configuration with one line replaced.
fs::path variant(const std::string& base, const std::string& from, const std::string& to, const std::string& name) {
  std::string text = slurp(kConfigs / base);
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  text.replace(at, from.size(), to);
  const fs::path p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST_CASE("exit codes and diagnostics") {
  SUBCASE("missing required field") {
    const Run r = run_fpb("forward --config " + (kData / "missing_s.cfg").string() + " --out " + outdir("e1").string(), "e1");
    CHECK(r.code == 2);
    CHECK(r.err.find("[problem] s") != std::string::npos);
  }
  SUBCASE("extension outside 0 < s < 1") {
    const Run r = run_fpb("extend --config " + (kData / "extend_bad_s.cfg").string() + " --out " + outdir("e2").string(), "e2");
    CHECK(r.code == 2);
    CHECK(r.err.find("0 < s < 1") != std::string::npos);
  }
  SUBCASE("malformed number reports file and line") {
    const Run r = run_fpb("forward --config " + (kData / "bad_number.cfg").string() + " --out " + outdir("e3").string(), "e3");
    CHECK(r.code == 2);
    CHECK(r.err.find("bad_number.cfg:11") != std::string::npos);
    CHECK(r.err.find("[problem] p") != std::string::npos);
  }
  SUBCASE("missing config file") {
    const Run r = run_fpb("forward --config " + (kWork / "nope.cfg").string(), "e4");
    CHECK(r.code == 2);
  }
  SUBCASE("no subcommand") {
    CHECK(run_fpb("", "e5").code == 2);
    CHECK(run_fpb("frobnicate", "e6").code == 2);
  }
  SUBCASE("unknown criterion") {
    CHECK(run_fpb("verify --criteria 99 --out " + outdir("e7").string(), "e7").code == 2);
  }
  SUBCASE("non-convergence is a numerical failure with outputs kept") {
    const fs::path d = outdir("e8");
    const Run r = run_fpb("forward --config " + (kData / "tiny_budget.cfg").string() + " --out " + d.string(), "e8");
    CHECK(r.code == 1);
    CHECK(r.err.find("did not converge") != std::string::npos);
    CHECK_FALSE(read_json(d / "result.json").at("converged").get<bool>());
  }
  SUBCASE("version") {
    const Run r = run_fpb("--version", "e9");
    CHECK(r.code == 0);
    CHECK(r.out.find(FPB_VERSION) != std::string::npos);
  }
}

TEST_CASE("forward solution matches the dense oracle and round-trips") {
  const fs::path d = outdir("forward");
  REQUIRE(run_fpb("forward --config " + (kConfigs / "exterior_p2.cfg").string() + " --out " + d.string(), "forward").code == 0);
  const auto cfg = load_config(kConfigs / "exterior_p2.cfg");
  const GridSpec g = make_grid(cfg);
  const DomainMask mask = make_mask(cfg, g);
  const Field u = read_field(d / "solution.bin");
  const Field ref = verification::dense_exterior_value(make_data(cfg, g), mask, verification::dense_linear_operator(g, cfg.s));
  CHECK(max_abs_diff(u, ref) < 1e-8);
  CHECK(max_abs_diff(read_field(d / "solution.csv"), u) == 0.0);
  const json r = read_json(d / "result.json");
  CHECK(r.at("converged").get<bool>());
  CHECK(r.at("gradient_norm").get<double>() <= cfg.tol);
  const json m = read_json(d / "manifest.json");
  CHECK(m.at("command") == "forward");
  CHECK(m.at("config").at("problem.s") == "0.5");
  CHECK(m.at("config").at("solver.tol") == "1e-10");
  CHECK(fs::exists(d / "timing.json"));
}

TEST_CASE("zero data gives the zero solution") {
  const fs::path d = outdir("zero");
  REQUIRE(run_fpb("forward --config " + (kData / "zero_data.cfg").string() + " --out " + d.string(), "zero").code == 0);
  const Field u = read_field(d / "solution.bin");
  for (double v : u.values()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("overrides are echoed in the manifest") {
  const fs::path d = outdir("override");
  REQUIRE(run_fpb("forward --config " + (kConfigs / "exterior_p2.cfg").string() + " --seed 5 --tol 1e-9 --out " + d.string(),
              "override").code == 0);
  const json m = read_json(d / "manifest.json");
  CHECK(m.at("overrides").at("seed") == 5);
  CHECK(m.at("config").at("solver.seed") == "5");
  CHECK(m.at("config").at("inverse.noise_seed") == "5");
  CHECK(m.at("config").at("solver.tol") == "1.0000000000000001e-09");
  CHECK(read_json(d / "result.json").at("tol").get<double>() == 1e-9);
}

TEST_CASE("poincare matches the dense eigenvalue; restarts are stable") {
  const fs::path d5 = outdir("poincare5");
  REQUIRE(run_fpb("poincare --config " + (kConfigs / "poincare_p2.cfg").string() + " --out " + d5.string(), "p5").code == 0);
  const auto cfg = load_config(kConfigs / "poincare_p2.cfg");
  const GridSpec g = make_grid(cfg);
  const double dense =
      verification::dense_first_eigenvalue(make_mask(cfg, g), verification::dense_linear_operator(g, cfg.s));
  const json r5 = read_json(d5 / "result.json");
  CHECK(r5.at("lambda1").get<double>() == doctest::Approx(dense).epsilon(1e-7));
  CHECK(std::abs(r5.at("minimizer_lp_norm").get<double>() - 1.0) <= 1e-10);
  CHECK(r5.at("restarts").size() == 5);

  const fs::path d1 = outdir("poincare1");
  const fs::path one = variant("poincare_p2.cfg", "restarts = 5", "restarts = 1", "poincare_one.cfg");
  REQUIRE(run_fpb("poincare --config " + one.string() + " --out " + d1.string(), "p1").code == 0);
  const json r1 = read_json(d1 / "result.json");
  REQUIRE(r1.at("restarts").size() == 1);
  CHECK(r1.at("restarts")[0] == r5.at("restarts")[0]);
  const Field u = read_field(d5 / "minimizer.bin");
  CHECK(u.grid() == g);
}

TEST_CASE("DN matrix equals the dense Schur complement") {
  const fs::path d = outdir("dn");
  REQUIRE(run_fpb("dn --config " + (kConfigs / "dn_p2.cfg").string() + " --out " + d.string(), "dn").code == 0);
  const auto cfg = load_config(kConfigs / "dn_p2.cfg");
  const GridSpec g = make_grid(cfg);
  const DomainMask mask = make_mask(cfg, g);
  const Eigen::MatrixXd S = verification::dense_dn_matrix(mask, verification::dense_linear_operator(g, cfg.s));
  std::ifstream is(d / "dn_matrix.csv");
  std::string line;
  Eigen::Index row = 0;
  double worst = 0.0;
  while (std::getline(is, line)) {
    std::stringstream ls(line);
    std::string cell;
    Eigen::Index col = 0;
    while (std::getline(ls, cell, ',')) worst = std::max(worst, std::abs(std::stod(cell) - S(row, col++)));
    CHECK(col == S.cols());
    ++row;
  }
  CHECK(row == S.rows());
  CHECK(worst <= 1e-10 * S.cwiseAbs().maxCoeff());
  const json r = read_json(d / "result.json");
  const Field f = make_data(cfg, g);
  Eigen::VectorXd fe(mask.exterior_count());
  for (std::size_t k = 0; k < mask.exterior_count(); ++k) fe(k) = f(mask.exterior_points()[k]);
  CHECK(r.at("pairing").get<double>() == doctest::Approx(fe.dot(S * fe)).epsilon(1e-10));
}

TEST_CASE("extension outputs are consistent") {
  const fs::path d = outdir("extend");
  const Run run = run_fpb("extend --config " + (kConfigs / "extend_s05.cfg").string() + " --out " + d.string(), "extend");
  REQUIRE(run.code == 0);
  const json h = read_json(d / "heights.json");
  const auto slices = read_stacked_fields(d / "slices.bin");
  CHECK(slices.size() == h.at("heights").size());
  CHECK(slices.size() == 6);
  const json r = read_json(d / "result.json");
  CHECK(r.at("relative_error").get<double>() < 2e-2);
  for (double ratio : r.at("lp_contraction_ratio")) CHECK(ratio <= 1.0 + 1e-10);
  CHECK(read_field(d / "trace.bin").points() == 512);
}

TEST_CASE("inversion recovers the inclusion and writes the ledger") {
  const fs::path d = outdir("invert");
  REQUIRE(run_fpb("invert --config " + (kConfigs / "invert_inclusion.cfg").string() + " --out " + d.string(), "invert").code == 0);
  const json r = read_json(d / "result.json");
  const auto est = r.at("estimate").get<std::vector<double>>();
  const auto truth = r.at("truth").get<std::vector<double>>();
  REQUIRE(est.size() == truth.size());
  for (std::size_t b = 0; b < est.size(); ++b) CHECK(std::abs(est[b] - truth[b]) <= 0.05 * truth[b]);
  std::ifstream ledger(d / "ledger.csv");
  std::string header;
  std::getline(ledger, header);
  CHECK(header == "block,level,test,statistic,slack,verdict");
  const Field sigma = read_field(d / "sigma_estimate.bin");
  CHECK(sigma.points() == 32 * 32);
}

TEST_CASE("runs are deterministic, including across thread counts") {
  for (const char* cfg : {"interior_p3.cfg", "invert_noise.cfg"}) {
    const std::string cmd = std::string(cfg).rfind("invert", 0) == 0 ? "invert" : "forward";
    const fs::path a = outdir("det_a");
    const fs::path b = outdir("det_b");
    const fs::path c = outdir("det_c");
    REQUIRE(run_fpb(cmd + " --config " + (kConfigs / cfg).string() + " --out " + a.string(), "det_a").code == 0);
    REQUIRE(run_fpb(cmd + " --config " + (kConfigs / cfg).string() + " --out " + b.string(), "det_b").code == 0);
    REQUIRE(run_fpb(cmd + " --threads 2 --config " + (kConfigs / cfg).string() + " --out " + c.string(), "det_c").code == 0);
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    CHECK(slurp(a / "result.json") == slurp(b / "result.json"));
    CHECK(slurp(a / "result.json") == slurp(c / "result.json"));
  }
}

TEST_CASE("verify subcommand runs selected criteria") {
  const fs::path d = outdir("verify");
  const Run r = run_fpb("verify --criteria 1 --out " + d.string(), "verify");
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS  C1") != std::string::npos);
  const json j = read_json(d / "verify.json");
  REQUIRE(j.at("criteria").size() == 1);
  CHECK(j.at("criteria")[0].at("passed").get<bool>());
}
