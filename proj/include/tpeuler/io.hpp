#pragma once
//
// CSV and JSON persistence. CSV numbers use 17 significant digits so that
// outputs of identical runs compare byte for byte.
//

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpeuler/diagnostics.hpp"
#include "tpeuler/errors.hpp"
#include "tpeuler/layer.hpp"
#include "tpeuler/period_map.hpp"

namespace tpeuler {

/// Bumped whenever a CSV header or JSON key changes.
inline constexpr int schema_version = 1;

inline constexpr const char* layers_header = "n,j,x,rho,m,z,w,I,lo,hi";
inline constexpr const char* trace_header = "iteration,residual,contraction_factor,mass,energy";
inline constexpr const char* sweep_header =
    "value,residual,mass_drift,min_band_margin,runtime_s,iterations,converged";

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// output.directory, placed under $TPEULER_OUTPUT_ROOT when that is set and
/// the directory is relative.
inline std::filesystem::path output_path(const std::string& directory) {
  std::filesystem::path p(directory);
  if (p.is_relative()) {
    if (const char* root = std::getenv("TPEULER_OUTPUT_ROOT"); root && *root) {
      p = std::filesystem::path(root) / p;
    }
  }
  return p;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

inline std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw IoError("write failed for " + file.string());
}

inline void write_layer_rows(std::ostream& out, const Layer& layer, const GasParams& gp) {
  for (std::size_t k = 0; k < layer.size(); ++k) {
    const ConservedState& u = layer.values[k];
    const RiemannPair zw = to_invariants(u, gp);
    out << layer.level << ',' << layer.node(k) << ',' << fmt17(layer.x(k)) << ','
        << fmt17(u.rho) << ',' << fmt17(u.m) << ',' << fmt17(zw.z) << ',' << fmt17(zw.w) << ','
        << fmt17(layer.i_vals[k]) << ',' << fmt17(layer.lo[k]) << ',' << fmt17(layer.hi[k])
        << '\n';
  }
}

inline nlohmann::json to_json(const DiagnosticsRecord& r) {
  return {{"level", r.level},
          {"mass", r.mass},
          {"energy", r.energy},
          {"l_increment", r.l_increment},
          {"l_raw", r.l_raw},
          {"accumulated_l", r.accumulated_l},
          {"m_n", r.m_n},
          {"band_margin_min", r.band_margin_min},
          {"band_violations", r.band_violations},
          {"boundary_left_ok", r.boundary_left_ok},
          {"boundary_right_ok", r.boundary_right_ok},
          {"boundary_right_value", r.boundary_right_value},
          {"cut_nodes", r.cut_nodes},
          {"vacuum_nodes", r.vacuum_nodes}};
}

inline nlohmann::json diagnostics_json(const std::vector<DiagnosticsRecord>& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace) records.push_back(to_json(r));
  return {{"schema_version", schema_version}, {"records", std::move(records)}};
}

inline void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  auto out = open_output(file);
  out << j.dump(2) << '\n';
  close_output(out, file);
}

/// Flat key/value summary written as a two-row CSV (header, values).
inline void write_summary_csv(const std::filesystem::path& file, const nlohmann::json& flat) {
  auto out = open_output(file);
  std::string header;
  std::string row;
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    if (!header.empty()) {
      header += ',';
      row += ',';
    }
    header += it.key();
    const auto& v = it.value();
    if (v.is_number_float()) row += fmt17(v.get<double>());
    else if (v.is_string()) row += v.get<std::string>();
    else row += v.dump();
  }
  out << header << '\n' << row << '\n';
  close_output(out, file);
}

inline void write_trace_csv(const std::filesystem::path& file,
                            const std::vector<FixedPointTraceRow>& rows) {
  auto out = open_output(file);
  out << trace_header << '\n';
  for (const auto& r : rows) {
    out << r.iteration << ',' << fmt17(r.residual) << ',' << fmt17(r.contraction_factor) << ','
        << fmt17(r.mass) << ',' << fmt17(r.energy) << '\n';
  }
  close_output(out, file);
}

} // namespace tpeuler
