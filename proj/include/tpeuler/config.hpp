#pragma once
//
// Run configuration: flat INI sections (gas, grid, forcing, initial, solver,
// flags, output), command-line overrides with the same dotted keys, and
// resolution into the numeric objects of a run.
//

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tpeuler/diagnostics.hpp"
#include "tpeuler/errors.hpp"
#include "tpeuler/forcing.hpp"
#include "tpeuler/gas.hpp"
#include "tpeuler/grid.hpp"
#include "tpeuler/layer.hpp"
#include "tpeuler/scheme.hpp"

namespace tpeuler {

enum ExitCode : int {
  exit_ok = 0,
  exit_range = 2,
  exit_instability = 3,
  exit_io = 4,
  exit_not_converged = 5,
  exit_unknown_key = 6,
  exit_contradiction = 7,
};

/// Configuration problem carrying the process exit code it maps to.
class ConfigError : public ConfigurationError {
public:
  ConfigError(int code, const std::string& what) : ConfigurationError(what), code_(code) {}
  int code() const noexcept { return code_; }

private:
  int code_;
};

struct RunConfig {
  struct {
    double gamma = 1.4;
    std::optional<double> big_m; ///< unset: smallest integer M admitting the initial data
    double eps = 0.01;
  } gas;
  struct {
    int n_x = 25;
  } grid;
  struct {
    std::string name = "zero";
    double amplitude = 0.0;
  } forcing;
  struct {
    std::string name = "constant";
    double rho_bar = 1.0;
    double amplitude = 0.1; ///< bump only
    std::string path;       ///< file only
  } initial;
  struct {
    double omega = 0.5;
    double tol = 1e-8;
    int max_iter = 500;
  } solver;
  struct {
    bool no_cutoff = false;
    bool freeze_l = false;
  } flags;
  struct {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
  } output;

  bool wants(const std::string& format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
  }
};

using KeyValues = std::map<std::string, std::string>;

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "gas.gamma",         "gas.M",          "gas.eps",           "grid.n_x",
      "forcing.name",      "forcing.amplitude", "initial.name",   "initial.rho_bar",
      "initial.amplitude", "initial.path",   "solver.omega",      "solver.tol",
      "solver.max_iter",   "flags.no_cutoff", "flags.freeze_L",   "output.directory",
      "output.formats"};
  return keys;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError(exit_range, key + ": not a finite number: '" + text + "'");
  }
  return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(exit_range, key + ": not an integer: '" + text + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(exit_range, key + ": not a boolean: '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(exit_range, msg);
}

} // namespace detail

/// Flattens INI text into dotted keys. Values outside a section are rejected.
inline KeyValues read_ini(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(exit_range, std::string("malformed config: ") + e.what());
  }
  KeyValues kv;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(exit_unknown_key, "unknown key: " + section);
    for (const auto& [key, value] : body) kv[section + "." + key] = value.get_value<std::string>();
  }
  return kv;
}

inline KeyValues read_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(exit_io, "cannot open config file: " + path);
  return read_ini(in);
}

/// Builds a validated RunConfig; later entries of `layers` override earlier ones.
inline RunConfig parse_config(const std::vector<KeyValues>& layers) {
  KeyValues kv;
  for (const auto& l : layers) {
    for (const auto& [k, v] : l) kv[k] = v;
  }
  const auto& known = config_keys();
  for (const auto& [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ConfigError(exit_unknown_key, "unknown key: " + k);
    }
  }

  using namespace detail;
  RunConfig c;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("gas.gamma")) c.gas.gamma = parse_double("gas.gamma", *v);
  if (auto v = get("gas.M"); v && *v != "auto") c.gas.big_m = parse_double("gas.M", *v);
  if (auto v = get("gas.eps")) c.gas.eps = parse_double("gas.eps", *v);
  if (auto v = get("grid.n_x")) c.grid.n_x = parse_int("grid.n_x", *v);
  if (auto v = get("forcing.name")) c.forcing.name = *v;
  if (auto v = get("forcing.amplitude")) c.forcing.amplitude = parse_double("forcing.amplitude", *v);
  if (auto v = get("initial.name")) c.initial.name = *v;
  if (auto v = get("initial.rho_bar")) c.initial.rho_bar = parse_double("initial.rho_bar", *v);
  if (auto v = get("initial.amplitude")) c.initial.amplitude = parse_double("initial.amplitude", *v);
  if (auto v = get("initial.path")) c.initial.path = *v;
  if (auto v = get("solver.omega")) c.solver.omega = parse_double("solver.omega", *v);
  if (auto v = get("solver.tol")) c.solver.tol = parse_double("solver.tol", *v);
  if (auto v = get("solver.max_iter")) c.solver.max_iter = parse_int("solver.max_iter", *v);
  if (auto v = get("flags.no_cutoff")) c.flags.no_cutoff = parse_bool("flags.no_cutoff", *v);
  if (auto v = get("flags.freeze_L")) c.flags.freeze_l = parse_bool("flags.freeze_L", *v);
  if (auto v = get("output.directory")) c.output.directory = *v;
  if (auto v = get("output.formats")) c.output.formats = split_list(*v);

  require(c.gas.gamma > 1.0 && c.gas.gamma <= 5.0 / 3.0,
          "gas.gamma must lie in (1, 5/3], got " + std::to_string(c.gas.gamma));
  require(!c.gas.big_m || *c.gas.big_m > 0.0, "gas.M must be positive");
  require(c.gas.eps > 0.0, "gas.eps must be positive");
  require(c.grid.n_x >= 2, "grid.n_x must be at least 2");
  require(c.forcing.amplitude >= 0.0, "forcing.amplitude must be nonnegative");
  require(c.initial.rho_bar > 0.0, "initial.rho_bar must be positive");
  require(std::abs(c.initial.amplitude) < 1.0, "initial.amplitude must satisfy |a| < 1");
  require(c.solver.omega > 0.0 && c.solver.omega <= 1.0, "solver.omega must lie in (0, 1]");
  require(c.solver.tol > 0.0, "solver.tol must be positive");
  require(c.solver.max_iter >= 1, "solver.max_iter must be at least 1");
  for (const auto& f : c.output.formats) {
    require(f == "csv" || f == "json", "output.formats: unknown format '" + f + "'");
  }
  require(!c.output.formats.empty(), "output.formats must name at least one format");
  const std::vector<std::string> forcings{"zero", "sin_t", "sin_xt", "gravity_pulse"};
  require(std::find(forcings.begin(), forcings.end(), c.forcing.name) != forcings.end(),
          "forcing.name: unknown forcing '" + c.forcing.name + "'");
  const std::vector<std::string> initials{"constant", "bump", "file"};
  require(std::find(initials.begin(), initials.end(), c.initial.name) != initials.end(),
          "initial.name: unknown initial data '" + c.initial.name + "'");

  if (c.flags.no_cutoff && c.flags.freeze_l) {
    throw ConfigError(exit_contradiction,
                      "flags.freeze_L only affects the cutoff band and contradicts flags.no_cutoff");
  }
  if (c.initial.name == "file" && c.initial.path.empty()) {
    throw ConfigError(exit_contradiction, "initial.name = file requires initial.path");
  }
  if (c.initial.name != "file" && !c.initial.path.empty()) {
    throw ConfigError(exit_contradiction, "initial.path is only valid with initial.name = file");
  }
  if (c.initial.name == "file" && !std::filesystem::exists(c.initial.path)) {
    throw ConfigError(exit_io, "initial.path does not exist: " + c.initial.path);
  }
  return c;
}

inline RunConfig parse_config(const KeyValues& kv) { return parse_config(std::vector<KeyValues>{kv}); }

/// Reads `rho,m` rows (one per odd node, optional header) from a CSV file.
inline std::vector<ConservedState> load_initial_file(const std::string& path, int n_x) {
  std::ifstream in(path);
  if (!in) throw ConfigError(exit_io, "cannot open initial data file: " + path);
  std::vector<ConservedState> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = detail::split_list(line);
    if (cells.size() != 2) {
      throw ConfigError(exit_range, path + ":" + std::to_string(line_no) + ": expected 'rho,m'");
    }
    if (rows.empty() && line_no == 1 && cells[0] == "rho") continue;
    const double rho = detail::parse_double("initial.path", cells[0]);
    const double m = detail::parse_double("initial.path", cells[1]);
    if (rho < 0.0) throw ConfigError(exit_range, path + ":" + std::to_string(line_no) + ": negative density");
    rows.push_back(rho > 0.0 ? ConservedState{rho, m} : ConservedState{});
  }
  if (static_cast<int>(rows.size()) != n_x) {
    throw ConfigError(exit_range, "initial data file has " + std::to_string(rows.size()) +
                                      " rows but the grid has " + std::to_string(n_x) +
                                      " cells at level 0");
  }
  return rows;
}

/// Everything a run needs, derived from a RunConfig.
struct RunSetup {
  RunConfig config;
  GasParams gas;
  Grid grid;
  Forcing forcing;
  SchemeOptions scheme;
  Layer initial;
  bool auto_m = false;
  std::vector<std::string> warnings;
};

namespace detail {

struct InitialData {
  std::optional<InitialSampler> sampler;
  std::vector<ConservedState> cells; ///< file data
  double rho_bar = 0.0;
  double energy0 = 0.0;
};

inline InitialData initial_data(const RunConfig& c) {
  InitialData d;
  const double n = 2.0 * c.grid.n_x;
  const double dx = 1.0 / n;
  if (c.initial.name == "file") {
    d.cells = load_initial_file(c.initial.path, c.grid.n_x);
    // Piecewise-constant data: integrals are exact cell sums. energy0 only
    // needs the density for eta*, which does not depend on M.
    const GasParams probe = make_gas_params(c.gas.gamma, 1.0, 1.0, 0.0, c.gas.eps);
    for (const auto& u : d.cells) {
      d.rho_bar += 2.0 * dx * u.rho;
      d.energy0 += 2.0 * dx * energy_density(u, probe);
    }
    if (!(d.rho_bar > 0.0)) throw ConfigError(exit_range, "initial data has zero mass");
    return d;
  }
  const double rb = c.initial.rho_bar;
  if (c.initial.name == "constant") {
    d.sampler = [rb](double) { return ConservedState{rb, 0.0}; };
  } else {
    const double a = c.initial.amplitude;
    d.sampler = [rb, a](double x) {
      return ConservedState{rb * (1.0 + a * std::sin(2.0 * std::numbers::pi * x)), 0.0};
    };
  }
  const GasParams probe = make_gas_params(c.gas.gamma, 1.0, 1.0, 0.0, c.gas.eps);
  for (int j = 0; j <= 2 * c.grid.n_x; ++j) {
    const double wgt = (j == 0 || j == 2 * c.grid.n_x) ? 0.5 * dx : dx;
    const ConservedState u = (*d.sampler)(j * dx);
    d.rho_bar += wgt * u.rho;
    d.energy0 += wgt * energy_density(u, probe);
  }
  return d;
}

inline Layer initial_layer(const InitialData& d, const Grid& grid, const GasParams& gp,
                           const SchemeOptions& opt) {
  if (d.sampler) return init_layer(*d.sampler, grid, gp, opt);
  return make_layer(grid, 0, d.cells, gp);
}

/// Smallest M with max(w - I, I - z) <= M / margin over the initial layer.
inline double band_requirement(const Layer& l, const GasParams& gp) {
  double need = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    const RiemannPair zw = to_invariants(l.values[k], gp);
    need = std::max({need, zw.w - l.i_vals[k], l.i_vals[k] - zw.z});
  }
  return need;
}

} // namespace detail

/// Fraction of M the initial data may occupy when M is chosen automatically;
/// the band shrinks to M exp(-1/4) > 0.77 M over one period.
inline constexpr double auto_m_margin = 0.7;

inline RunSetup resolve(const RunConfig& c) {
  RunSetup s;
  s.config = c;
  s.scheme.cutoff = !c.flags.no_cutoff;
  s.scheme.freeze_l = c.flags.freeze_l;
  const auto data = detail::initial_data(c);
  try {
    s.forcing = builtin_forcing(c.forcing.name, c.forcing.amplitude);
  } catch (const ConfigurationError& e) {
    throw ConfigError(exit_range, e.what());
  }

  auto build = [&](double m) {
    s.gas = make_gas_params(c.gas.gamma, m, data.rho_bar, data.energy0, c.gas.eps);
    s.grid = build_grid(c.grid.n_x, s.gas);
    s.initial = detail::initial_layer(data, s.grid, s.gas, s.scheme);
  };
  try {
    if (c.gas.big_m) {
      build(*c.gas.big_m);
    } else {
      s.auto_m = true;
      double m = 1.0;
      for (int it = 0;; ++it) {
        build(m);
        const double need = std::ceil(detail::band_requirement(s.initial, s.gas) / auto_m_margin);
        if (need <= m) break;
        if (it == 100) throw ConfigError(exit_range, "automatic M did not settle");
        m = need;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ConfigurationError& e) {
    throw ConfigError(exit_range, e.what());
  } catch (const DomainError& e) {
    throw ConfigError(exit_range, e.what());
  }

  const BandReport band = band_check(s.initial, 0.0, s.gas);
  if (band.violations > 0) {
    throw ConfigError(exit_range, "initial data leaves the band -M + I <= z, w <= M + I (margin " +
                                      std::to_string(band.min_margin) + "); increase gas.M");
  }
  const double cond = std::pow(s.gas.big_m, 1.0 + 1.0 / s.gas.theta) * s.forcing.amplitude();
  if (cond > 0.1) {
    std::ostringstream w;
    w << "warning: M^(1+1/theta) * |F| = " << cond
      << " exceeds 0.1; the forcing is not small relative to the band";
    s.warnings.push_back(w.str());
  }
  return s;
}

} // namespace tpeuler
