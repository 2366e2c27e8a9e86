#pragma once

/// @file config.hpp
/// @brief Experiment configuration files (INI grammar: `[section]` headers,
/// `key = value` lines, `;` or `#` comments) and the builders that turn a
/// configuration into grids, masks, coefficients and data fields.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpb/energy_ops.hpp"
#include "fpb/solver.hpp"

namespace fpb {

/// Parse or validation failure. `field` is "section.key" (empty for syntax
/// errors) and `line` is 0 when the field is absent from the file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string field, int line)
      : std::runtime_error(message), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct Inclusion {
  IndexBox box;
  double value = 1.0;
};

struct ExperimentConfig {
  // [grid]
  int n = 1;
  int N = 64;
  double L = 6.283185307179586;
  // [mask]
  std::vector<IndexBox> boxes;
  std::string bitmap;
  // [problem]
  double s = 0.5;
  double p = 2.0;
  int m = 1;
  std::string mode = "exterior";          ///< exterior | interior
  // [coefficients]
  std::string anisotropy = "identity";    ///< identity | scaled | diagonal
  double anisotropy_scale = 1.0;
  std::vector<double> anisotropy_diag;
  double sigma_background = 1.0;
  double sigma_floor = 1.0;
  std::vector<Inclusion> inclusions;
  // [data]
  std::string data_kind = "zero";         ///< zero | cos | gaussian | bump | file
  double amplitude = 1.0;
  std::vector<int> modes;
  std::vector<double> center;
  double width = 1.0;
  std::string data_file;
  // [solver]
  double tol = 1e-8;
  std::size_t budget = 0;
  std::vector<double> eps_schedule;
  std::uint64_t seed = 7;
  int restarts = 5;
  int memory = 10;
  std::uint64_t poincare_seed = 20240611;
  // [dn]
  bool dn_matrix = false;
  // [extension]
  double y0 = 0.5;
  double ratio = 0.5;
  int levels = 6;
  int richardson_terms = 4;
  // [inverse]
  int block = 4;
  std::vector<double> sigma_levels;
  int probes = 8;
  double probe_radius = 3.0;
  std::uint64_t probe_seed = 20240611;
  IndexBox window_outer;
  IndexBox window_inner;
  double noise = 0.0;
  std::uint64_t noise_seed = 1;
  std::size_t scan_budget = 4000;

  /// Every known field as "section.key" -> value, defaults included.
  std::map<std::string, std::string> resolved;
  std::string source;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::string& name = "<string>");

GridSpec make_grid(const ExperimentConfig& cfg);
DomainMask make_mask(const ExperimentConfig& cfg, const GridSpec& grid);
AnisotropyField make_anisotropy(const ExperimentConfig& cfg, const GridSpec& grid);
/// Background value with the inclusions painted on top.
ConformalCoefficient make_sigma(const ExperimentConfig& cfg, const GridSpec& grid);
/// The [data] field with cfg.m components (component c uses mode shift c).
Field make_data(const ExperimentConfig& cfg, const GridSpec& grid);
SolverOptions make_solver_options(const ExperimentConfig& cfg);
/// Points of window_outer that are not in window_inner.
std::vector<std::size_t> window_points(const ExperimentConfig& cfg, const GridSpec& grid);

}  // namespace fpb
