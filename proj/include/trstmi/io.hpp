#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trstmi/analysis.hpp"
#include "trstmi/frame.hpp"
#include "trstmi/solver.hpp"

namespace trstmi {

using nlohmann::json;

struct FileFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Frame files
//
// JSON: {"d": int, "N": int, "columns": [[re, im, re, im, ...] per column]}
// CSV:  2d rows x N columns; row 2i holds the real parts of coordinate i
//       across columns, row 2i+1 the imaginary parts. Both formats carry
//       full-precision doubles and round-trip exactly.
// ---------------------------------------------------------------------------

inline json frame_to_json(const Frame& frame) {
  json columns = json::array();
  for (Index j = 0; j < frame.count(); ++j) {
    json col = json::array();
    for (Index i = 0; i < frame.dim(); ++i) {
      col.push_back(frame.columns(i, j).real());
      col.push_back(frame.columns(i, j).imag());
    }
    columns.push_back(std::move(col));
  }
  return json{{"d", frame.dim()}, {"N", frame.count()}, {"columns", columns}};
}

inline Frame frame_from_json(const json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("N") ||
      !j.contains("columns")) {
    throw FileFormatError("frame json: expected keys d, N, columns");
  }
  const Index d = j.at("d").get<Index>();
  const Index n = j.at("N").get<Index>();
  if (d < 1 || n < 1) throw FileFormatError("frame json: d and N must be >= 1");
  const json& columns = j.at("columns");
  if (!columns.is_array() || static_cast<Index>(columns.size()) != n) {
    throw FileFormatError("frame json: expected " + std::to_string(n) +
                          " columns");
  }
  Frame frame;
  frame.columns.resize(d, n);
  for (Index jcol = 0; jcol < n; ++jcol) {
    const json& col = columns.at(jcol);
    if (!col.is_array() || static_cast<Index>(col.size()) != 2 * d) {
      throw FileFormatError("frame json: column " + std::to_string(jcol) +
                            " must hold " + std::to_string(2 * d) + " numbers");
    }
    for (Index i = 0; i < d; ++i) {
      frame.columns(i, jcol) = {col.at(2 * i).get<double>(),
                                col.at(2 * i + 1).get<double>()};
    }
  }
  return frame;
}

namespace detail {

inline std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string frame_to_csv(const Frame& frame) {
  std::ostringstream out;
  for (Index i = 0; i < frame.dim(); ++i) {
    for (int part = 0; part < 2; ++part) {
      for (Index j = 0; j < frame.count(); ++j) {
        if (j > 0) out << ',';
        const double v = part == 0 ? frame.columns(i, j).real()
                                   : frame.columns(i, j).imag();
        out << detail::full_precision(v);
      }
      out << '\n';
    }
  }
  return out.str();
}

inline Frame frame_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FileFormatError("frame csv: bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.size() % 2 != 0) {
    throw FileFormatError("frame csv: expected an even, positive row count");
  }
  const Index d = static_cast<Index>(rows.size() / 2);
  const Index n = static_cast<Index>(rows.front().size());
  Frame frame;
  frame.columns.resize(d, n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Index>(rows[r].size()) != n) {
      throw FileFormatError("frame csv: ragged row " + std::to_string(r));
    }
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < n; ++j) {
      frame.columns(i, j) = {rows[2 * i][j], rows[2 * i + 1][j]};
    }
  }
  return frame;
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline Frame load_frame(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (has_suffix(path, ".csv")) return frame_from_csv(buffer.str());
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw FileFormatError("frame json parse error in '" + path + "': " + e.what());
  }
  return frame_from_json(j);
}

inline void save_frame(const std::string& path, const Frame& frame) {
  std::ofstream out(path);
  if (!out) throw FileFormatError("cannot write '" + path + "'");
  if (has_suffix(path, ".csv")) {
    out << frame_to_csv(frame);
  } else {
    out << frame_to_json(frame).dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

inline std::string iso8601_utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline json trust_region_config_to_json(const TrustRegionConfig& tr) {
  return json{{"delta0", tr.delta0},     {"delta_max", tr.delta_max},
              {"eta", tr.eta},           {"shrink", tr.shrink},
              {"grow", tr.grow},         {"grad_tol", tr.grad_tol},
              {"max_outer", tr.max_outer}, {"cg_force_c", tr.cg_force_c},
              {"max_cg", tr.max_cg}};
}

inline json solver_config_to_json(const SolverConfig& cfg) {
  std::vector<double> schedule = cfg.delta_schedule;
  if (schedule.empty() && cfg.N >= 2) {
    schedule = default_delta_schedule(cfg.N, cfg.eps_target);
  }
  return json{{"d", cfg.d},
              {"N", cfg.N},
              {"delta_schedule", schedule},
              {"restarts", cfg.restarts},
              {"seed", cfg.seed},
              {"eps_target", cfg.eps_target},
              {"tr", trust_region_config_to_json(cfg.tr)}};
}

inline json bounds_to_json(const BoundsReport& b) {
  json j{{"d", b.d},
         {"N", b.N},
         {"welch", b.welch},
         {"gerzon_max", b.gerzon_max},
         {"best_applicable", b.best_applicable}};
  j["orthoplex"] = b.orthoplex ? json(*b.orthoplex) : json(nullptr);
  j["levenshtein"] = b.levenshtein ? json(*b.levenshtein) : json(nullptr);
  return j;
}

inline json certificate_to_json(const Certificate& c) {
  json witness = json::object();
  for (const auto& [key, value] : c.witness) witness[key] = value;
  return json{{"kind", to_string(c.kind)},
              {"tolerance", c.tolerance},
              {"witness", witness}};
}

inline json restart_to_json(const RestartRecord& r) {
  json stages = json::array();
  for (const StageRecord& s : r.stages) {
    stages.push_back(json{{"delta", s.delta},
                          {"objective", s.objective},
                          {"coherence", s.coherence},
                          {"outer_iterations", s.outer_iterations}});
  }
  json j{{"restart", r.restart_index},
         {"seed", r.seed},
         {"succeeded", r.succeeded},
         {"stages", stages}};
  if (r.succeeded) {
    j["coherence"] = r.coherence;
  } else {
    j["error"] = r.error;
  }
  return j;
}

/// Assembles the persistent record of a solve: configuration echo, per-restart
/// summaries, the winning frame, and the bounds/certificate analysis of that
/// frame. `method_config` carries the method-specific configuration block.
inline json make_run_record(const std::string& method,
                            const SolveResult& result,
                            const json& method_config,
                            const std::string& started,
                            const std::string& finished,
                            double certificate_tol = kDefaultCertificateTol) {
  json per_restart = json::array();
  for (const RestartRecord& r : result.per_restart) {
    per_restart.push_back(restart_to_json(r));
  }
  json certs = json::array();
  for (const Certificate& c : certificates(result.best_frame, certificate_tol)) {
    certs.push_back(certificate_to_json(c));
  }
  return json{
      {"schema_version", 1},
      {"method", method},
      {"seed", result.config.seed},
      {"config", method_config},
      {"per_restart", per_restart},
      {"best_restart", result.best_restart},
      {"best_coherence", result.best_coherence},
      {"best_frame", frame_to_json(result.best_frame)},
      {"bounds", bounds_to_json(bounds_report(result.config.d, result.config.N))},
      {"certificates", certs},
      {"timestamps", json{{"started", started}, {"finished", finished}}},
      {"wall_time_seconds", result.wall_time_seconds}};
}

}  // namespace trstmi
