#pragma once

// Configuration-driven experiment runner behind the `harmrec` executable.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmrec/mesh.hpp"

namespace harmrec::cli {

enum class MeasurementKind { points, box, grid };

struct MeasurementConfig {
  MeasurementKind kind = MeasurementKind::points;
  std::vector<Point> points;           // explicit list, or the generated formation
  std::optional<std::vector<double>> values;
  int m = 0;
};

struct RunConfig {
  DomainSpec domain;
  double s = 1.0;
  std::string f = "0";
  std::optional<std::string> exact_field;
  MeasurementConfig measurements;
  double noise = 0.0;
  int k_min = 2;
  int k_max = 5;
  int surrogate_level = 7;
  int k = 3;            // proximity: coarse level
  int min_gap = 2;
  int level = 3;        // mesh-dump
  int max_level = 10;
  double d = 0.0;
  double tau_rel = 1e-14;
  std::string csv_name;
  std::string json_name;
  std::string mesh_name = "mesh.txt";
};

/// Parses and validates a run configuration for `command`. Throws
/// ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc, const std::string& command);

/// The configuration with every default filled in.
nlohmann::json resolved_config(const RunConfig& cfg);

/// Formats a double with 17 significant digits in scientific notation,
/// independent of the locale.
std::string format_double(double v);

struct CommandOutput {
  std::string csv;
  nlohmann::json summary;
};

CommandOutput cmd_riesz(const RunConfig& cfg, int threads);
CommandOutput cmd_recover(const RunConfig& cfg, int threads, std::uint64_t seed);
CommandOutput cmd_proximity(const RunConfig& cfg, int threads);
std::string cmd_mesh_dump(const RunConfig& cfg);

/// Full command line entry point. Returns 0 on success, 2 on configuration
/// errors, 3 on numerical failures.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace harmrec::cli
