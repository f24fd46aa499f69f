// Run configuration: one JSON file drives every pipeline stage; command-line
// flags override fields one for one.
#pragma once

#include <cstdint>
#include <string>

namespace eightfold {

struct RunConfig {
  // resolution
  int modes = 64;
  int samples = 512;
  // solver
  double tol = 1e-10;
  int max_iter = 60;
  // family selection
  std::string family = "lj-high";  // lj-high | lj-low | cy | newtonian-eight | homogeneous-eight
  double period = 16.0;
  double exponent = 1.0;
  // scans and brackets
  double scan_from = 0.0;
  double scan_to = 0.0;
  int scan_steps = 7;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  // branch continuation
  double h = 0.0;            // 0: 1e-2 x coefficient norm
  double ds = 0.0;           // 0: family default
  double seed_offset = 0.0;  // 0: family default
  // surface command
  double a3 = 0.0;
  double a4 = 0.0;
  double kappa = 0.0;
  double kappa_rel = 0.0;
  double extent = 0.0;  // 0: auto from the critical radii
  int resolution = 64;
  // output
  std::string output_dir = ".";
  std::uint64_t rng_seed = 12345;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);

  /// FNV-1a hash of the canonical serialization; stable across runs.
  std::uint64_t hash() const;
  /// "# eightfold <version> config=<hex hash>" provenance line.
  std::string provenance() const;
};

extern const char* kVersion;

/// Write-then-rename so partial files never appear under the final name.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace eightfold
