#pragma once

#include <cstddef>
#include <string>

#include "toposdf/metrics.hpp"
#include "toposdf/trainer.hpp"

namespace toposdf {

/// Everything a `reconstruct` run needs. Serialized as flat `key = value`
/// lines; `#` starts a comment line.
struct RunConfig {
  TrainConfig train;
  std::string input;
  std::string output;
  double normalize_half_extent = 0.9;
  std::size_t mesh_resolution = 256;
  double mesh_iso = 0.0;
  MetricsOptions metrics;
  std::size_t threads = 0;  // 0: OpenMP default

  void validate() const;
  static RunConfig desk_preset();
};

/// Parses config text over the defaults. Unknown or repeated keys are
/// rejected. When `curriculum_start_iter` is absent it resolves to
/// iterations - 500 (or 0 for shorter runs).
RunConfig parse_run_config(const std::string& text);
RunConfig parse_run_config(const std::string& text, const RunConfig& base);

/// Fully resolved config, one line per key in a fixed order. Parsing the echo
/// reproduces it byte for byte.
std::string echo_run_config(const RunConfig& config);

}  // namespace toposdf
