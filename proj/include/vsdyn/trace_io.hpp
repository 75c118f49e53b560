#pragma once
// Run artifacts: trace files (CSV and JSON), run manifests, and the file
// helpers shared by the CLI and the report generator. All numeric output is
// written at full precision with fixed row and column order, so identical
// simulations produce byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vsdyn/errors.hpp"
#include "vsdyn/network.hpp"
#include "vsdyn/scenario.hpp"
#include "vsdyn/version.hpp"

namespace vsdyn {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoFailure("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoFailure("error while reading '" + path.string() + "'");
  }
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoFailure("cannot create directory '" +
                      path.parent_path().string() + "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoFailure("cannot open '" + path.string() + "' for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw IoFailure("error while writing '" + path.string() + "'");
  }
}

// A scenario together with its raw bytes and content hash.
struct LoadedScenario {
  std::string path;
  std::string text;
  std::string hash_hex;
  Scenario scenario;
};

inline LoadedScenario load_scenario(const std::filesystem::path& path) {
  LoadedScenario ls;
  ls.path = path.string();
  ls.text = read_text_file(path);
  ls.hash_hex = scenario_hash_hex(ls.text);
  ls.scenario = parse_scenario(ls.text, path.filename().string());
  return ls;
}

namespace detail {

inline void append_csv_number(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace detail

// CSV trace: one row per recorded event, ordered by (replicate, step, edge
// index). Component columns are padded to the widest transmitted vector;
// events whose attempt failed leave them blank.
inline std::string traces_to_csv(const std::vector<SimulationTrace>& traces) {
  Eigen::Index width = 0;
  for (const SimulationTrace& t : traces) {
    for (const TraceEvent& e : t.events) {
      width = std::max(width, e.transmitted.size());
    }
  }
  std::string out =
      "replicate,step,from,to,success,adopted,transmitted_norm";
  for (Eigen::Index i = 0; i < width; ++i) {
    out += ",c" + std::to_string(i);
  }
  out += "\n";
  for (const SimulationTrace& t : traces) {
    for (const TraceEvent& e : t.events) {
      out += std::to_string(t.replicate);
      out += ',';
      out += std::to_string(e.step);
      out += ',';
      out += e.from;
      out += ',';
      out += e.to;
      out += ',';
      out += e.success ? '1' : '0';
      out += ',';
      out += e.adopted ? '1' : '0';
      out += ',';
      detail::append_csv_number(out, e.transmitted.size() > 0
                                         ? e.transmitted.norm()
                                         : 0.0);
      for (Eigen::Index i = 0; i < width; ++i) {
        out += ',';
        if (i < e.transmitted.size()) {
          detail::append_csv_number(out, e.transmitted(i));
        }
      }
      out += '\n';
    }
  }
  return out;
}

// JSON trace mirroring the in-memory structure, hand-emitted at full
// precision so output bytes never depend on a serializer's float policy.
inline std::string traces_to_json(const std::vector<SimulationTrace>& traces) {
  std::string out = "[\n";
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const SimulationTrace& t = traces[ti];
    out += "  {\n    \"replicate\": " + std::to_string(t.replicate) +
           ",\n    \"events\": [";
    for (std::size_t ei = 0; ei < t.events.size(); ++ei) {
      const TraceEvent& e = t.events[ei];
      out += ei == 0 ? "\n" : ",\n";
      out += "      {\"step\": " + std::to_string(e.step) +
             ", \"edge_index\": " + std::to_string(e.edge_index) +
             ", \"from\": \"" + e.from + "\", \"to\": \"" + e.to +
             "\", \"success\": " + (e.success ? "true" : "false") +
             ", \"adopted\": " + (e.adopted ? "true" : "false") +
             ", \"transmitted\": [";
      for (Eigen::Index i = 0; i < e.transmitted.size(); ++i) {
        if (i > 0) out += ", ";
        detail::append_csv_number(out, e.transmitted(i));
      }
      out += "]}";
    }
    out += t.events.empty() ? "],\n" : "\n    ],\n";
    out += "    \"final_representations\": {";
    bool first = true;
    for (const auto& [id, v] : t.final_representations) {
      out += first ? "\n" : ",\n";
      first = false;
      out += "      \"" + id + "\": [";
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        detail::append_csv_number(out, v(i));
      }
      out += "]";
    }
    out += first ? "},\n" : "\n    },\n";
    out += "    \"adoption_step\": {";
    first = true;
    for (const auto& [id, step] : t.adoption_step) {
      out += first ? "\n" : ",\n";
      first = false;
      out += "      \"" + id + "\": " + std::to_string(step);
    }
    out += first ? "}\n" : "\n    }\n";
    out += ti + 1 < traces.size() ? "  },\n" : "  }\n";
  }
  out += "]\n";
  return out;
}

// Every run writes a manifest beside its outputs: enough to reproduce the run
// and to detect a scenario file that changed after the fact.
inline std::string make_manifest(const std::string& command,
                                 const LoadedScenario& ls,
                                 std::uint64_t seed, int replicates) {
  std::string out = "{\n";
  out += "  \"command\": \"" + command + "\",\n";
  out += "  \"engine_version\": \"" + std::string(kEngineVersion) + "\",\n";
  out += "  \"scenario_format_version\": " +
         std::to_string(kScenarioFormatVersion) + ",\n";
  out += "  \"scenario_path\": \"" + ls.path + "\",\n";
  out += "  \"scenario_hash\": \"" + ls.hash_hex + "\",\n";
  out += "  \"seed\": " + std::to_string(seed) + ",\n";
  out += "  \"replicates\": " + std::to_string(replicates) + "\n";
  out += "}\n";
  return out;
}

}  // namespace vsdyn
