#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fpb/config.hpp"
#include "fpb/field_io.hpp"
#include "test_support.hpp"

using namespace fpb;
using namespace fpb::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fpb_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string config_error_field(const std::string& text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

const char* kMinimal = R"(
[grid]
n = 1
N = 32
L = 6.283185307179586
[mask]
boxes = 8 24
[problem]
s = 0.5
p = 2
)";

}  // namespace

TEST_CASE("binary and csv field round trips") {
  std::mt19937_64 rng(71);
  const GridSpec g(2, 8, 3.5);
  const Field u = smooth_random(g, rng, 2, 2);
  write_field(scratch("u.bin"), u);
  write_field(scratch("u.csv"), u);
  const Field b = read_field(scratch("u.bin"));
  const Field c = read_field(scratch("u.csv"));
  CHECK(b.grid() == g);
  CHECK(b.components() == 2);
  CHECK(max_abs_diff(b, u) == 0.0);
  CHECK(c.same_layout(u));
  CHECK(max_abs_diff(c, u) == 0.0);

  std::vector<Field> stack = {u, u * 2.0, u * -1.0};
  write_stacked_fields(scratch("s.bin"), stack);
  const auto back = read_stacked_fields(scratch("s.bin"));
  REQUIRE(back.size() == 3);
  CHECK(max_abs_diff(back[1], u * 2.0) == 0.0);
}

TEST_CASE("corrupt field files are rejected") {
  {
    std::ofstream f(scratch("short.bin"), std::ios::binary);
    f << "abc";
  }
  CHECK_THROWS(read_field_binary(scratch("short.bin")));
  const GridSpec g(1, 8, 1.0);
  write_field_binary(scratch("trail.bin"), Field(g, 1));
  {
    std::ofstream f(scratch("trail.bin"), std::ios::binary | std::ios::app);
    f << "x";
  }
  CHECK_THROWS(read_field_binary(scratch("trail.bin")));
  CHECK_THROWS(read_field(scratch("does_not_exist.bin")));
}

TEST_CASE("minimal configuration and defaults") {
  const auto cfg = parse_config(kMinimal);
  CHECK(cfg.n == 1);
  CHECK(cfg.N == 32);
  CHECK(cfg.s == 0.5);
  CHECK(cfg.mode == "exterior");
  CHECK(cfg.resolved.at("problem.s") == "0.5");
  CHECK(cfg.resolved.count("solver.tol") == 1);
  const GridSpec g = make_grid(cfg);
  const DomainMask mask = make_mask(cfg, g);
  CHECK(mask.interior_count() == 16);
  CHECK(make_sigma(cfg, g)[0] == 1.0);
  CHECK(max_abs(make_data(cfg, g)) == 0.0);
  CHECK(make_solver_options(cfg).tol == cfg.tol);
}

TEST_CASE("coefficients, data and inverse sections") {
  const std::string text = std::string(kMinimal) + R"(
[coefficients]
anisotropy = diagonal
anisotropy_diag = 1 4
sigma_background = 1
inclusions = 10 14 2.5
[data]
kind = cos
amplitude = 2
modes = 1
[inverse]
block = 4
levels = 1 1.5 2
window_outer = 2 30
window_inner = 6 26
)";
  std::string two = text;
  two.replace(two.find("p = 2"), 5, "p = 2\nm = 2");
  const auto cfg = parse_config(two);
  const GridSpec g = make_grid(cfg);
  const auto A = make_anisotropy(cfg, g);
  CHECK(A.components() == 2);
  CHECK(A.upper() == doctest::Approx(2.0));
  const auto sigma = make_sigma(cfg, g);
  CHECK(sigma[12] == 2.5);
  CHECK(sigma[20] == 1.0);
  CHECK(cfg.sigma_levels.size() == 3);
  const auto win = window_points(cfg, g);
  CHECK(win.size() == 8);
}

TEST_CASE("configuration diagnostics name the field and line") {
  const std::string missing = "[grid]\nn = 1\nN = 32\nL = 1\n[mask]\nboxes = 8 24\n[problem]\np = 2\n";
  try {
    parse_config(missing, "m.cfg");
    FAIL("missing field accepted");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "problem.s");
    CHECK(std::string(e.what()).find("[problem] s") != std::string::npos);
  }
  const std::string bad = std::string(kMinimal) + "[solver]\ntol = fast\n";
  try {
    parse_config(bad, "b.cfg");
    FAIL("bad number accepted");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "solver.tol");
    CHECK(e.line() == 12);
    CHECK(std::string(e.what()).find("b.cfg:12") == 0);
  }
  CHECK(config_error_field(std::string(kMinimal) + "[solver]\nspeed = 3\n") == "solver.speed");
  CHECK(config_error_field(std::string(kMinimal) + "[bogus]\nx = 1\n") != "<none>");
  std::string sideways = kMinimal;
  sideways.replace(sideways.find("p = 2"), 5, "p = 2\nmode = sideways");
  CHECK(config_error_field(sideways) == "problem.mode");
}

TEST_CASE("data files resolve relative to the configuration file") {
  const GridSpec g(1, 32, 6.283185307179586);
  const Field u = Field::from_function(g, [](auto x) { return std::sin(x[0]); });
  write_field_binary(scratch("datum.bin"), u);
  {
    std::ofstream f(scratch("rel.cfg"));
    f << kMinimal << "[data]\nkind = file\nfile = datum.bin\n";
  }
  const auto cfg = load_config(scratch("rel.cfg"));
  CHECK(max_abs_diff(make_data(cfg, make_grid(cfg)), u) == 0.0);
}
