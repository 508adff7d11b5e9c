#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bqlab/soliton.hpp"

namespace bqlab {

/// Flat key=value experiment manifest; one soliton block per index, e.g.
///   p = 1
///   soliton1.omega = -0.5
///   soliton1.x0 = -2
///   soliton2.omega = 0.5
///   soliton2.x0 = 2
///   grid.half_length = 75   (optional, resolution rule otherwise)
///   grid.n = 2048           (optional)
///   evolve.dt = 0.005       (optional)
///   evolve.dealias = true
///   construction.t0 = 10
///   construction.final_times = 30 40 50
///   output.dir = runs/two_soliton
///   seed = 1
struct RunConfig {
  double p = 1.0;
  std::vector<SolitonParams> solitons;
  std::optional<double> grid_half_length;
  std::optional<int> grid_n;
  std::optional<double> dt;
  bool dealias = true;
  double t0 = 10.0;
  std::vector<double> final_times;
  std::string output_dir;
  unsigned seed = 1;

  static RunConfig parse_text(const std::string& text);
  static RunConfig parse_file(const std::string& path);
  std::string to_text() const;

  /// Validates and returns the soliton family (throws ConfigError with the
  /// violated invariant named).
  SolitonFamily family() const;
};

/// Default output root: $BQLAB_OUTPUT_ROOT or "." when unset.
std::string output_root();

}  // namespace bqlab
