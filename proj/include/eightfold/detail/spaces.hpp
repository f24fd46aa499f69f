// Internal coordinate packings for the planar and reduced-choreography solvers.
#pragma once

#include <array>
#include <vector>

#include "eightfold/orbit.hpp"

namespace eightfold::detail {

/// Planar unknowns: the x,y coefficient rows of all three bodies.
struct PlanarSpace {
  static constexpr std::array<int, 6> kCoords{0, 1, 3, 4, 6, 7};

  int M;
  int nb;

  explicit PlanarSpace(int modes) : M(modes), nb(2 * modes + 1) {}

  int dim() const { return 6 * nb; }

  Eigen::VectorXd pack(const LoopSeries& loop) const;
  void unpack(const Eigen::VectorXd& v, LoopSeries& loop) const;

  /// Centre-of-mass rows, one per axis and basis index: 2 nb x dim, constant.
  Eigen::MatrixXd com_rows() const;
  /// Coefficient image of d/dtau at the current point (time-phase anchor).
  Eigen::VectorXd phase_row(const Eigen::VectorXd& v) const;
  /// Coefficient image of the in-plane rotation generator (-y, x).
  Eigen::VectorXd rotation_row(const Eigen::VectorXd& v) const;

  std::vector<int> coord_rows() const { return {kCoords.begin(), kCoords.end()}; }
};

/// Reduced choreography unknowns: one generating curve, x and y coordinates,
/// modes not divisible by three (which makes the centre of mass vanish
/// identically once the three shifted copies are summed).
struct ChoreoSpace {
  int M;
  std::vector<int> allowed;  // ascending mode numbers, n % 3 != 0

  explicit ChoreoSpace(int modes);

  int per_coord() const { return 2 * static_cast<int>(allowed.size()); }
  int dim() const { return 2 * per_coord(); }

  Eigen::VectorXd pack(const Curve& c) const;
  Curve unpack(const Eigen::VectorXd& u, double period) const;

  /// Linear map from curve unknowns to the planar full coefficient vector.
  Eigen::MatrixXd map_to_planar() const;

  Eigen::VectorXd phase_row(const Eigen::VectorXd& u) const;
  Eigen::VectorXd rotation_row(const Eigen::VectorXd& u) const;
};

}  // namespace eightfold::detail
