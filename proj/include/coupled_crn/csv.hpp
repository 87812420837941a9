#pragma once

// CSV emission and run manifests.  Doubles are printed with 17 significant
// digits so that re-running a configuration reproduces output byte for byte.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coupled_crn/errors.hpp"
#include "coupled_crn/version.hpp"

namespace ccrn {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw UsageError("cannot open output file: " + path);
    columns_ = header.size();
    write_row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
      throw InternalError("CSV row width does not match header");
    }
    write_row(cells);
  }

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(std::int64_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t columns_ = 0;
};

// Everything needed to reproduce one CLI run bit-exactly: the subcommand, the
// fully resolved configuration (defaults materialized) and the master seed.
// Written alongside every output file as <out>.manifest.json.
struct RunManifest {
  std::string subcommand;
  std::string model_path;
  nlohmann::json resolved_config = nlohmann::json::object();
  std::uint64_t master_seed = 0;
  double wall_clock_seconds = 0.0;

  void write(const std::string& out_path) const {
    nlohmann::json doc;
    doc["tool_version"] = kVersion;
    doc["subcommand"] = subcommand;
    if (!model_path.empty()) doc["model"] = model_path;
    doc["config"] = resolved_config;
    doc["master_seed"] = master_seed;
    doc["wall_clock_seconds"] = wall_clock_seconds;
    std::ofstream out(out_path + ".manifest.json", std::ios::binary);
    if (!out) throw UsageError("cannot open manifest file: " + out_path);
    out << doc.dump(2) << '\n';
  }
};

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ccrn
