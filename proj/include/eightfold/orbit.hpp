// Periodic orbits, choreography construction, seeds and orbit file I/O.
#pragma once

#include <iosfwd>
#include <string>

#include "eightfold/loop_series.hpp"
#include "eightfold/potential.hpp"

namespace eightfold {

/// A T-periodic nine-coordinate trajectory with its potential and grid size.
struct Orbit {
  Potential potential;
  LoopSeries loop;
  int samples = 0;  // N, uniform time grid size; N >= 4M + 4

  Orbit() = default;
  Orbit(const Potential& p, const LoopSeries& l, int N) : potential(p), loop(l), samples(N) {}

  double period() const { return loop.period; }
  int modes() const { return loop.modes; }
};

/// Generating curve of a choreography: one body's closed path.
struct Curve {
  double period = 1.0;
  int modes = 0;
  Eigen::MatrixXd coef;  // 3 x (2M+1), same layout as LoopSeries rows

  Curve() = default;
  Curve(double T, int M) : period(T), modes(M), coef(Eigen::MatrixXd::Zero(3, 2 * M + 1)) {}
};

/// Assemble the full orbit q_i(t) = c(t + (i-1) T/3) from a generating curve.
Orbit orbit_from_curve(const Potential& p, const Curve& c, int N);

/// Extract body i's coordinate rows as a curve.
Curve curve_of_body(const Orbit& o, int body = 0);

/// Max deviation from the choreography shift property, in L2 norm.
double choreography_defect(const Orbit& o);

enum class SeedKind { FigureEightNewtonian, FigureEightLJHigh, FigureEightLJLow };

/// Lissajous-style figure-eight seeds; choreographic with centre of mass at
/// the origin by construction. Seeds need not be solutions.
Orbit choreography_seed(SeedKind kind, double T, int M = 64, int N = 512);

/// Fourier truncation / zero padding; exact on retained modes.
Orbit resample(const Orbit& o, int M2, int N2);

/// Orbit file format (JSON, bit-exact round trip).
std::string orbit_to_json(const Orbit& o);
Orbit orbit_from_json(const std::string& text);
void save_orbit(const Orbit& o, const std::string& path);
Orbit load_orbit(const std::string& path);

}  // namespace eightfold
