#pragma once
//
// Subcommands behind the tpeuler executable. Each returns a process exit
// code (see ExitCode) and reports through the given streams.
//

#include <chrono>
#include <cmath>
#include <filesystem>
#include <future>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpeuler/config.hpp"
#include "tpeuler/io.hpp"
#include "tpeuler/period_map.hpp"
#include "tpeuler/scheme.hpp"

namespace tpeuler {

inline nlohmann::json setup_json(const RunSetup& s) {
  return {{"gamma", s.gas.gamma},
          {"M", s.gas.big_m},
          {"M_auto", s.auto_m},
          {"eps", s.gas.eps},
          {"K", s.gas.K},
          {"alpha_zeta", s.gas.alpha_zeta},
          {"rho_bar", s.gas.rho_bar},
          {"energy0", s.gas.energy0},
          {"n_x", s.grid.n_x},
          {"n_t", s.grid.n_t},
          {"dx", s.grid.dx},
          {"dt", s.grid.dt},
          {"ratio", s.grid.ratio},
          {"forcing", s.forcing.name()},
          {"forcing_amplitude", s.config.forcing.amplitude},
          {"initial", s.config.initial.name},
          {"cutoff", s.scheme.cutoff},
          {"freeze_L", s.scheme.freeze_l}};
}

namespace detail {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const InstabilityError& e) {
    err << "error: " << e.what() << '\n';
    return exit_instability;
  } catch (const DomainError& e) {
    err << "error: run aborted: " << e.what() << '\n';
    return exit_instability;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << '\n';
    return exit_range;
  }
}

inline RunSetup resolve_reporting(const RunConfig& c, std::ostream& err) {
  RunSetup s = resolve(c);
  for (const auto& w : s.warnings) err << w << '\n';
  return s;
}

} // namespace detail

/// Validates the configuration and prints the resolved parameters.
inline int cmd_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunSetup s = detail::resolve_reporting(c, err);
    out << setup_json(s).dump(2) << '\n';
    return static_cast<int>(exit_ok);
  });
}

/// One period from the configured initial data: layers.csv, summary.{csv,json},
/// diagnostics.json.
inline int cmd_run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunSetup s = detail::resolve_reporting(c, err);
    const auto dir = output_path(c.output.directory);
    ensure_directory(dir);

    std::ofstream layers;
    const auto layers_file = dir / "layers.csv";
    LayerObserver observer;
    if (c.wants("csv")) {
      layers = open_output(layers_file);
      layers << layers_header << '\n';
      observer = [&](const Layer& l) { write_layer_rows(layers, l, s.gas); };
    }
    const PeriodResult res = run_period(s.initial, s.forcing, s.gas, s.scheme, observer);
    if (c.wants("csv")) close_output(layers, layers_file);

    const MassEnergy m0 = mass_energy(s.initial, s.gas);
    const MassEnergy m1 = mass_energy(res.final_layer, s.gas);
    double node_drift = 0.0;
    for (std::size_t k = 0; k < s.initial.size(); ++k) {
      node_drift = std::max({node_drift, std::abs(res.final_layer.values[k].rho - s.initial.values[k].rho),
                             std::abs(res.final_layer.values[k].m - s.initial.values[k].m)});
    }
    double min_l_raw = 0.0;
    int band_violations = 0;
    int cut_nodes = 0;
    int vacuum_nodes = 0;
    for (const auto& r : res.trace) {
      min_l_raw = std::min(min_l_raw, r.l_raw);
      band_violations += r.band_violations;
      cut_nodes += r.cut_nodes;
      vacuum_nodes += r.vacuum_nodes;
    }
    nlohmann::json summary = setup_json(s);
    summary["schema_version"] = schema_version;
    summary["mass_initial"] = m0.mass;
    summary["mass_final"] = m1.mass;
    summary["relative_mass_drift"] = std::abs(m1.mass - m0.mass) / m0.mass;
    summary["energy_initial"] = m0.energy;
    summary["energy_final"] = m1.energy;
    summary["accumulated_L"] = res.final_layer.l_val;
    summary["min_l_raw"] = min_l_raw;
    summary["l_clipped"] = res.any_clipped;
    summary["band_violations"] = band_violations;
    summary["cut_nodes"] = cut_nodes;
    summary["vacuum_nodes"] = vacuum_nodes;
    summary["max_node_drift"] = node_drift;
    if (c.wants("csv")) write_summary_csv(dir / "summary.csv", summary);
    if (c.wants("json")) {
      write_json(dir / "summary.json", summary);
      write_json(dir / "diagnostics.json", diagnostics_json(res.trace));
    }
    out << "run: " << res.trace.size() << " levels, relative mass drift "
        << summary["relative_mass_drift"].get<double>() << ", max node drift " << node_drift
        << ", output " << dir.string() << '\n';
    return static_cast<int>(exit_ok);
  });
}

inline nlohmann::json certificate_json(const FixedPointReport& rep) {
  return {{"schema_version", schema_version},
          {"converged", rep.converged},
          {"diverged", rep.diverged},
          {"iterations", rep.iterations},
          {"residual", rep.residual_history.empty() ? 0.0 : rep.residual_history.back()},
          {"initial_residual", rep.residual_history.empty() ? 0.0 : rep.residual_history.front()},
          {"contraction_factor", rep.contraction_factor},
          {"periodicity_defect", rep.periodicity_defect},
          {"band_margin_min", rep.band_margin_min},
          {"band_violations", rep.band_violations},
          {"mass_drift", rep.mass_drift},
          {"boundedness_violations", rep.boundedness_violations},
          {"max_accumulated_L", rep.max_accumulated_l},
          {"l_clipped", rep.any_entropy_clipped}};
}

inline FixedPointReport solve_periodic(const RunSetup& s) {
  const FixedPointOptions fo{s.config.solver.omega, s.config.solver.tol, s.config.solver.max_iter};
  return fixed_point(encode(s.initial, s.gas), s.forcing, fo, s.gas, s.grid, s.scheme);
}

/// Fixed point of the period map: fixed_point_trace.csv, periodic_layers.csv
/// (levels 0 and 2 n_t) and certificate.json.
inline int cmd_periodic(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunSetup s = detail::resolve_reporting(c, err);
    const auto dir = output_path(c.output.directory);
    ensure_directory(dir);
    const FixedPointReport rep = solve_periodic(s);

    if (c.wants("csv")) {
      write_trace_csv(dir / "fixed_point_trace.csv", rep.trace);
      const auto file = dir / "periodic_layers.csv";
      auto layers = open_output(file);
      layers << layers_header << '\n';
      write_layer_rows(layers, rep.start_layer, s.gas);
      write_layer_rows(layers, rep.end_layer, s.gas);
      close_output(layers, file);
    }
    nlohmann::json cert = certificate_json(rep);
    cert["setup"] = setup_json(s);
    write_json(dir / "certificate.json", cert);

    out << "periodic: " << (rep.converged ? "converged" : "not converged") << " after "
        << rep.iterations << " iterations, residual " << cert["residual"].get<double>()
        << ", contraction factor " << rep.contraction_factor << '\n';
    return static_cast<int>(rep.converged ? exit_ok : exit_not_converged);
  });
}

struct SweepRow {
  double value = 0.0;
  double residual = 0.0;
  double mass_drift = 0.0;
  double min_band_margin = 0.0;
  double runtime_s = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string error;
};

/// Runs `periodic` for each value of `axis` (n_x, amplitude or gamma) in
/// parallel and writes sweep.csv.
inline int cmd_sweep(const RunConfig& c, const std::string& axis, const std::vector<double>& values,
                     std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (axis != "n_x" && axis != "amplitude" && axis != "gamma") {
      throw ConfigError(exit_range, "sweep axis must be n_x, amplitude or gamma, got '" + axis + "'");
    }
    if (values.size() < 2) throw ConfigError(exit_range, "sweep needs at least two values");

    std::vector<RunConfig> configs;
    for (double v : values) {
      RunConfig rc = c;
      if (axis == "n_x") {
        if (v != std::floor(v) || v < 2) throw ConfigError(exit_range, "n_x values must be integers >= 2");
        rc.grid.n_x = static_cast<int>(v);
      } else if (axis == "amplitude") {
        if (!(v >= 0.0)) throw ConfigError(exit_range, "amplitude values must be nonnegative");
        rc.forcing.amplitude = v;
      } else {
        if (!(v > 1.0 && v <= 5.0 / 3.0)) throw ConfigError(exit_range, "gamma values must lie in (1, 5/3]");
        rc.gas.gamma = v;
      }
      configs.push_back(rc);
    }
    // Resolve up front so configuration errors surface before any work starts.
    std::vector<RunSetup> setups;
    for (const auto& rc : configs) setups.push_back(detail::resolve_reporting(rc, err));

    std::vector<std::future<SweepRow>> jobs;
    for (std::size_t i = 0; i < setups.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, [&setups, &values, i] {
        SweepRow row;
        row.value = values[i];
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const FixedPointReport rep = solve_periodic(setups[i]);
          row.residual = rep.residual_history.back();
          row.mass_drift = rep.mass_drift;
          row.min_band_margin = rep.band_margin_min;
          row.iterations = rep.iterations;
          row.converged = rep.converged;
        } catch (const std::exception& e) {
          row.error = e.what();
          row.residual = std::nan("");
        }
        row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return row;
      }));
    }
    std::vector<SweepRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());

    const auto dir = output_path(c.output.directory);
    ensure_directory(dir);
    const auto file = dir / "sweep.csv";
    auto csv = open_output(file);
    csv << sweep_header << '\n';
    for (const auto& r : rows) {
      csv << fmt17(r.value) << ',' << fmt17(r.residual) << ',' << fmt17(r.mass_drift) << ','
          << fmt17(r.min_band_margin) << ',' << fmt17(r.runtime_s) << ',' << r.iterations << ','
          << (r.converged ? 1 : 0) << '\n';
      if (!r.error.empty()) err << "sweep value " << r.value << ": " << r.error << '\n';
    }
    close_output(csv, file);
    out << "sweep: " << rows.size() << " runs over " << axis << ", table " << file.string() << '\n';
    return static_cast<int>(exit_ok);
  });
}

} // namespace tpeuler
