// Truncated Fourier representation of T-periodic nine-coordinate loops.
#pragma once

#include <Eigen/Core>

namespace eightfold {

/// Real Fourier series per coordinate on scaled time tau = 2*pi*t/T.
/// Coefficient layout per row: [cos_0 .. cos_M, sin_1 .. sin_M].
/// Rows follow the coordinate order (x1,y1,z1,x2,y2,z2,x3,y3,z3).
struct LoopSeries {
  double period = 1.0;
  int modes = 0;                 // M
  Eigen::MatrixXd coef;          // 9 x (2M+1)

  LoopSeries() = default;
  LoopSeries(double T, int M) : period(T), modes(M), coef(Eigen::MatrixXd::Zero(9, 2 * M + 1)) {}

  int nb() const { return 2 * modes + 1; }
  double omega() const;

  /// q(tau), tau in radians.
  Eigen::Matrix<double, 9, 1> eval(double tau) const;
  /// dq/dt(tau) (includes the omega factor).
  Eigen::Matrix<double, 9, 1> eval_deriv(double tau) const;

  /// Values on the uniform grid tau_k = 2 pi k / N; 9 x N.
  Eigen::MatrixXd sample_grid(int N) const;
  /// dq/dt on the same grid; 9 x N.
  Eigen::MatrixXd sample_grid_deriv(int N) const;

  /// Coefficient series of dq/dt.
  LoopSeries derivative() const;

  /// q(t + s) as a coefficient operation; s in time units.
  LoopSeries time_shift(double s) const;
  /// q(-t).
  LoopSeries time_reverse() const;
  /// Apply one 3x3 matrix to every body.
  LoopSeries apply_spatial(const Eigen::Matrix3d& R) const;
  /// Reindex bodies: result body i = this body perm[i].
  LoopSeries permute_bodies(const std::array<int, 3>& perm) const;

  /// Truncate or zero-pad to M2 modes; exact on retained modes.
  LoopSeries resample(int M2) const;

  /// L2(0,T; dt) inner product with another loop of the same (T, M).
  double l2_inner(const LoopSeries& other) const;
  double l2_norm() const;

  /// Per-mode sums over the three bodies of one axis (3 x nb); all-zero rows
  /// mean the centre of mass sits at the origin for all t.
  Eigen::MatrixXd com_coefficients() const;
  double com_max_abs() const;

  /// Relative coefficient mass carried by the top `frac` fraction of modes.
  double tail_mass(double frac = 0.125) const;

  /// Basis values on the uniform grid: (2M+1) x N with rows matching the
  /// coefficient layout. Shared by quadrature and projection code.
  static Eigen::MatrixXd basis_grid(int M, int N);
  /// d/dtau of the basis rows.
  static Eigen::MatrixXd basis_grid_deriv(int M, int N);

  /// Project grid samples (9 x N) onto a series (exact for band-limited data).
  static LoopSeries project_grid(const Eigen::MatrixXd& values, double T, int M);
};

}  // namespace eightfold
