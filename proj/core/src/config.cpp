#include "fpb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fpb/field_io.hpp"
#include "fpb/inverse.hpp"

namespace fpb {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"grid", {"n", "N", "L"}},
      {"mask", {"boxes", "bitmap"}},
      {"problem", {"s", "p", "m", "mode"}},
      {"coefficients",
       {"anisotropy", "anisotropy_scale", "anisotropy_diag", "sigma_background", "sigma_floor", "inclusions"}},
      {"data", {"kind", "amplitude", "modes", "center", "width", "file"}},
      {"solver", {"tol", "budget", "eps_schedule", "seed", "restarts", "memory", "poincare_seed"}},
      {"dn", {"matrix"}},
      {"extension", {"y0", "ratio", "levels", "richardson_terms"}},
      {"inverse",
       {"block", "levels", "probes", "probe_radius", "probe_seed", "window_outer", "window_inner", "noise",
        "noise_seed", "budget"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const std::string& text, std::string name) : name_(std::move(name)) {
    std::istringstream is(text);
    try {
      pt::read_ini(is, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(name_ + ":" + std::to_string(e.line()) + ": syntax error: " + e.message(), "",
                        static_cast<int>(e.line()));
    }
    index_lines(text);
    for (const auto& [section, body] : tree_) {
      const auto sec = known_keys().find(section);
      if (body.empty() && !body.data().empty()) {
        fail(section, "key outside of any section");
      }
      if (sec == known_keys().end()) fail(section, "unknown section [" + section + "]");
      for (const auto& [key, value] : body) {
        if (!sec->second.count(key)) fail(section + "." + key, "unknown field [" + section + "] " + key);
      }
    }
  }

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    const auto it = lines_.find(field);
    const int line = it == lines_.end() ? 0 : it->second;
    std::string where = name_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": " + what, field, line);
  }

  bool has(const std::string& field) const { return raw(field).has_value(); }

  std::optional<std::string> raw(const std::string& field) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(field, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string required(const std::string& field) const {
    const auto v = raw(field);
    if (!v) fail(field, "missing required field " + label(field));
    return *v;
  }

  double number(const std::string& field, const std::string& text) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      fail(field, label(field) + ": expected a decimal number, got '" + text + "'");
    }
  }

  long long integer(const std::string& field, const std::string& text) const {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      fail(field, label(field) + ": expected an integer, got '" + text + "'");
    }
  }

  void get(const std::string& field, double& out) {
    if (auto v = raw(field)) out = number(field, *v);
    record(field, fmt(out));
  }
  void get(const std::string& field, int& out) {
    if (auto v = raw(field)) out = static_cast<int>(integer(field, *v));
    record(field, std::to_string(out));
  }
  void get(const std::string& field, std::size_t& out) {
    if (auto v = raw(field)) {
      const long long x = integer(field, *v);
      if (x < 0) fail(field, label(field) + ": must be nonnegative");
      out = static_cast<std::size_t>(x);
    }
    record(field, std::to_string(out));
  }
  void get(const std::string& field, std::uint64_t& out, bool) {
    if (auto v = raw(field)) {
      const long long x = integer(field, *v);
      if (x < 0) fail(field, label(field) + ": must be nonnegative");
      out = static_cast<std::uint64_t>(x);
    }
    record(field, std::to_string(out));
  }
  void get(const std::string& field, std::string& out) {
    if (auto v = raw(field)) out = *v;
    record(field, out);
  }
  void get(const std::string& field, bool& out) {
    if (auto v = raw(field)) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        fail(field, label(field) + ": expected true or false, got '" + *v + "'");
      }
    }
    record(field, out ? "true" : "false");
  }
  void get(const std::string& field, std::vector<double>& out) {
    if (auto v = raw(field)) {
      out.clear();
      for (const auto& t : tokens(*v, " ,\t")) out.push_back(number(field, t));
    }
    std::string joined;
    for (double d : out) joined += (joined.empty() ? "" : " ") + fmt(d);
    record(field, joined);
  }
  void get(const std::string& field, std::vector<int>& out) {
    if (auto v = raw(field)) {
      out.clear();
      for (const auto& t : tokens(*v, " ,\t")) out.push_back(static_cast<int>(integer(field, t)));
    }
    std::string joined;
    for (int d : out) joined += (joined.empty() ? "" : " ") + std::to_string(d);
    record(field, joined);
  }

  IndexBox box(const std::string& field, const std::string& text) const {
    const auto t = tokens(text, " ,\t");
    if (t.size() != 2 && t.size() != 4) fail(field, label(field) + ": a box needs 2 or 4 integers i0 i1 [j0 j1]");
    IndexBox b;
    b.i0 = static_cast<int>(integer(field, t[0]));
    b.i1 = static_cast<int>(integer(field, t[1]));
    if (t.size() == 4) {
      b.j0 = static_cast<int>(integer(field, t[2]));
      b.j1 = static_cast<int>(integer(field, t[3]));
    }
    return b;
  }

  void record(const std::string& field, const std::string& value) { resolved_[field] = value; }
  std::map<std::string, std::string>& resolved() { return resolved_; }

  static std::string label(const std::string& field) {
    const auto dot = field.find('.');
    if (dot == std::string::npos) return field;
    return "[" + field.substr(0, dot) + "] " + field.substr(dot + 1);
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

 private:
  void index_lines(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::string section;
    int no = 0;
    while (std::getline(is, line)) {
      ++no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        lines_.emplace(section, no);
        continue;
      }
      const auto eq = t.find('=');
      if (eq != std::string::npos) lines_.emplace(section + "." + trim(t.substr(0, eq)), no);
    }
  }

  std::string name_;
  pt::ptree tree_;
  std::map<std::string, int> lines_;
  std::map<std::string, std::string> resolved_;
};

std::string box_text(const IndexBox& b) {
  return std::to_string(b.i0) + " " + std::to_string(b.i1) + " " + std::to_string(b.j0) + " " +
         std::to_string(b.j1);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
  Reader r(text, name);
  ExperimentConfig c;
  c.source = name;

  c.n = static_cast<int>(r.integer("grid.n", r.required("grid.n")));
  c.N = static_cast<int>(r.integer("grid.N", r.required("grid.N")));
  c.L = r.number("grid.L", r.required("grid.L"));
  r.get("grid.n", c.n);
  r.get("grid.N", c.N);
  r.get("grid.L", c.L);
  if (c.n != 1 && c.n != 2) r.fail("grid.n", "[grid] n: must be 1 or 2");
  if (c.N < 4 || c.N % 2 != 0) r.fail("grid.N", "[grid] N: must be even and at least 4");
  if (!(c.L > 0.0)) r.fail("grid.L", "[grid] L: must be positive");

  if (auto v = r.raw("mask.boxes")) {
    for (const auto& part : tokens(*v, ";")) {
      if (!trim(part).empty()) c.boxes.push_back(r.box("mask.boxes", part));
    }
  }
  std::string boxes;
  for (const auto& b : c.boxes) boxes += (boxes.empty() ? "" : "; ") + box_text(b);
  r.record("mask.boxes", boxes);
  r.get("mask.bitmap", c.bitmap);

  c.s = r.number("problem.s", r.required("problem.s"));
  c.p = r.number("problem.p", r.required("problem.p"));
  r.get("problem.s", c.s);
  r.get("problem.p", c.p);
  r.get("problem.m", c.m);
  r.get("problem.mode", c.mode);
  if (!(c.s > 0.0)) r.fail("problem.s", "[problem] s: must be positive");
  if (!(c.p > 1.0)) r.fail("problem.p", "[problem] p: must exceed 1");
  if (c.m < 1 || c.m > 8) r.fail("problem.m", "[problem] m: must lie in 1..8");
  if (c.mode != "exterior" && c.mode != "interior") {
    r.fail("problem.mode", "[problem] mode: expected exterior or interior, got '" + c.mode + "'");
  }

  r.get("coefficients.anisotropy", c.anisotropy);
  r.get("coefficients.anisotropy_scale", c.anisotropy_scale);
  r.get("coefficients.anisotropy_diag", c.anisotropy_diag);
  r.get("coefficients.sigma_background", c.sigma_background);
  c.sigma_floor = c.sigma_background;
  r.get("coefficients.sigma_floor", c.sigma_floor);
  if (c.anisotropy != "identity" && c.anisotropy != "scaled" && c.anisotropy != "diagonal") {
    r.fail("coefficients.anisotropy", "[coefficients] anisotropy: expected identity, scaled or diagonal");
  }
  if (c.anisotropy == "diagonal" && c.anisotropy_diag.size() != static_cast<std::size_t>(c.m)) {
    r.fail("coefficients.anisotropy_diag", "[coefficients] anisotropy_diag: needs m positive entries");
  }
  if (!(c.sigma_floor > 0.0)) r.fail("coefficients.sigma_floor", "[coefficients] sigma_floor: must be positive");
  if (auto v = r.raw("coefficients.inclusions")) {
    for (const auto& part : tokens(*v, ";")) {
      auto t = tokens(part, " ,\t");
      if (t.empty()) continue;
      if (t.size() != 3 && t.size() != 5) {
        r.fail("coefficients.inclusions", "[coefficients] inclusions: expected 'i0 i1 [j0 j1] value' per entry");
      }
      const double value = r.number("coefficients.inclusions", t.back());
      t.pop_back();
      std::string joined;
      for (const auto& x : t) joined += x + " ";
      c.inclusions.push_back({r.box("coefficients.inclusions", joined), value});
    }
  }
  std::string inc;
  for (const auto& i : c.inclusions) inc += (inc.empty() ? "" : "; ") + box_text(i.box) + " " + Reader::fmt(i.value);
  r.record("coefficients.inclusions", inc);

  r.get("data.kind", c.data_kind);
  r.get("data.amplitude", c.amplitude);
  r.get("data.modes", c.modes);
  r.get("data.center", c.center);
  r.get("data.width", c.width);
  r.get("data.file", c.data_file);
  static const std::set<std::string> kinds = {"zero", "cos", "gaussian", "bump", "file"};
  if (!kinds.count(c.data_kind)) r.fail("data.kind", "[data] kind: expected zero, cos, gaussian, bump or file");
  if (c.data_kind == "file" && c.data_file.empty()) r.fail("data.file", "[data] file: required for kind = file");

  r.get("solver.tol", c.tol);
  r.get("solver.budget", c.budget);
  r.get("solver.eps_schedule", c.eps_schedule);
  r.get("solver.seed", c.seed, true);
  r.get("solver.restarts", c.restarts);
  r.get("solver.memory", c.memory);
  r.get("solver.poincare_seed", c.poincare_seed, true);
  if (!(c.tol > 0.0)) r.fail("solver.tol", "[solver] tol: must be positive");
  if (c.restarts < 1) r.fail("solver.restarts", "[solver] restarts: must be at least 1");

  r.get("dn.matrix", c.dn_matrix);

  r.get("extension.y0", c.y0);
  r.get("extension.ratio", c.ratio);
  r.get("extension.levels", c.levels);
  r.get("extension.richardson_terms", c.richardson_terms);

  r.get("inverse.block", c.block);
  r.get("inverse.levels", c.sigma_levels);
  r.get("inverse.probes", c.probes);
  r.get("inverse.probe_radius", c.probe_radius);
  r.get("inverse.probe_seed", c.probe_seed, true);
  if (auto v = r.raw("inverse.window_outer")) c.window_outer = r.box("inverse.window_outer", *v);
  if (auto v = r.raw("inverse.window_inner")) c.window_inner = r.box("inverse.window_inner", *v);
  r.record("inverse.window_outer", box_text(c.window_outer));
  r.record("inverse.window_inner", box_text(c.window_inner));
  r.get("inverse.noise", c.noise);
  r.get("inverse.noise_seed", c.noise_seed, true);
  r.get("inverse.budget", c.scan_budget);
  if (c.noise < 0.0 || c.noise >= 1.0) r.fail("inverse.noise", "[inverse] noise: must lie in [0, 1)");

  c.resolved = std::move(r.resolved());
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string() + ": cannot open config file", "", 0);
  std::stringstream ss;
  ss << is.rdbuf();
  ExperimentConfig c = parse_config(ss.str(), path.string());
  // Relative data and bitmap paths resolve against the config directory.
  const auto base = path.parent_path();
  if (!c.data_file.empty() && std::filesystem::path(c.data_file).is_relative()) {
    c.data_file = (base / c.data_file).string();
  }
  if (!c.bitmap.empty() && std::filesystem::path(c.bitmap).is_relative()) {
    c.bitmap = (base / c.bitmap).string();
  }
  return c;
}

GridSpec make_grid(const ExperimentConfig& cfg) { return GridSpec(cfg.n, cfg.N, cfg.L); }

DomainMask make_mask(const ExperimentConfig& cfg, const GridSpec& grid) {
  if (!cfg.bitmap.empty()) {
    std::ifstream is(cfg.bitmap);
    if (!is) throw ConfigError(cfg.source + ": [mask] bitmap: cannot open '" + cfg.bitmap + "'", "mask.bitmap", 0);
    std::vector<std::uint8_t> bits;
    char ch;
    while (is.get(ch)) {
      if (ch == '0' || ch == '1') bits.push_back(ch == '1');
    }
    if (bits.size() != grid.size()) {
      throw ConfigError(cfg.source + ": [mask] bitmap: expected " + std::to_string(grid.size()) + " cells, found " +
                            std::to_string(bits.size()),
                        "mask.bitmap", 0);
    }
    return DomainMask(grid, std::move(bits));
  }
  if (cfg.boxes.empty()) throw ConfigError(cfg.source + ": missing required field [mask] boxes", "mask.boxes", 0);
  try {
    return DomainMask::boxes(grid, cfg.boxes);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source + ": [mask] boxes: " + e.what(), "mask.boxes", 0);
  }
}

AnisotropyField make_anisotropy(const ExperimentConfig& cfg, const GridSpec& grid) {
  if (cfg.anisotropy == "scaled") return AnisotropyField::constant(grid, cfg.m, cfg.anisotropy_scale);
  if (cfg.anisotropy == "diagonal") return AnisotropyField::diagonal(grid, cfg.anisotropy_diag);
  return AnisotropyField::identity(grid, cfg.m);
}

ConformalCoefficient make_sigma(const ExperimentConfig& cfg, const GridSpec& grid) {
  std::vector<double> v(grid.size(), cfg.sigma_background);
  for (const auto& inc : cfg.inclusions) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto idx = grid.multi_index(k);
      const bool in_i = idx[0] >= inc.box.i0 && idx[0] < inc.box.i1;
      const bool in_j = grid.dim() == 1 || (idx[1] >= inc.box.j0 && idx[1] < inc.box.j1);
      if (in_i && in_j) v[k] = inc.value;
    }
  }
  try {
    return ConformalCoefficient(grid, std::move(v), cfg.sigma_floor);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source + ": [coefficients]: " + e.what(), "coefficients.sigma_floor", 0);
  }
}

Field make_data(const ExperimentConfig& cfg, const GridSpec& grid) {
  if (cfg.data_kind == "file") {
    Field f = read_field(cfg.data_file);
    if (!(f.grid() == grid) || f.components() != cfg.m) {
      throw ConfigError(cfg.source + ": [data] file: field layout does not match [grid] and m", "data.file", 0);
    }
    return f;
  }
  Field f(grid, cfg.m);
  if (cfg.data_kind == "zero") return f;
  for (int c = 0; c < cfg.m; ++c) {
    Field comp(grid, 1);
    if (cfg.data_kind == "bump") {
      const double ci = cfg.center.size() > 0 ? cfg.center[0] : 0.0;
      const double cj = cfg.center.size() > 1 ? cfg.center[1] : 0.0;
      comp = bump_field(grid, ci + c, cj, cfg.width);
    } else {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto x = grid.point(k);
        double v = 1.0;
        if (cfg.data_kind == "cos") {
          for (int a = 0; a < grid.dim(); ++a) {
            const int mode = a < static_cast<int>(cfg.modes.size()) ? cfg.modes[a] : 1;
            v *= std::cos(grid.wavenumber(mode + (a == 0 ? c : 0)) * x[a]);
          }
        } else {
          double r2 = 0.0;
          for (int a = 0; a < grid.dim(); ++a) {
            const double c0 = a < static_cast<int>(cfg.center.size()) ? cfg.center[a] : 0.5 * grid.period();
            double d = x[a] - c0 - (a == 0 ? c * grid.spacing() : 0.0);
            d -= grid.period() * std::round(d / grid.period());
            r2 += d * d;
          }
          v = std::exp(-r2 / (2.0 * cfg.width * cfg.width));
        }
        comp(k) = v;
      }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) f(k, c) = cfg.amplitude * comp(k);
  }
  return f;
}

SolverOptions make_solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.tol;
  o.budget = cfg.budget;
  o.eps_schedule = cfg.eps_schedule;
  o.memory = cfg.memory;
  o.residual_seed = cfg.seed;
  return o;
}

std::vector<std::size_t> window_points(const ExperimentConfig& cfg, const GridSpec& grid) {
  auto inside = [&](const IndexBox& b, const std::array<int, 2>& idx) {
    return idx[0] >= b.i0 && idx[0] < b.i1 && (grid.dim() == 1 || (idx[1] >= b.j0 && idx[1] < b.j1));
  };
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto idx = grid.multi_index(k);
    if (inside(cfg.window_outer, idx) && !inside(cfg.window_inner, idx)) out.push_back(k);
  }
  return out;
}

}  // namespace fpb
