#include "eightfold/loop_series.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eightfold {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double LoopSeries::omega() const { return kTwoPi / period; }

Eigen::Matrix<double, 9, 1> LoopSeries::eval(double tau) const {
  Eigen::Matrix<double, 9, 1> out = coef.col(0);
  for (int n = 1; n <= modes; ++n)
    out += coef.col(n) * std::cos(n * tau) + coef.col(modes + n) * std::sin(n * tau);
  return out;
}

Eigen::Matrix<double, 9, 1> LoopSeries::eval_deriv(double tau) const {
  Eigen::Matrix<double, 9, 1> out = Eigen::Matrix<double, 9, 1>::Zero();
  for (int n = 1; n <= modes; ++n)
    out += n * (coef.col(modes + n) * std::cos(n * tau) - coef.col(n) * std::sin(n * tau));
  return out * omega();
}

Eigen::MatrixXd LoopSeries::basis_grid(int M, int N) {
  Eigen::MatrixXd B(2 * M + 1, N);
  for (int k = 0; k < N; ++k) {
    const double tau = kTwoPi * k / N;
    B(0, k) = 1.0;
    for (int n = 1; n <= M; ++n) {
      B(n, k) = std::cos(n * tau);
      B(M + n, k) = std::sin(n * tau);
    }
  }
  return B;
}

Eigen::MatrixXd LoopSeries::basis_grid_deriv(int M, int N) {
  Eigen::MatrixXd B(2 * M + 1, N);
  for (int k = 0; k < N; ++k) {
    const double tau = kTwoPi * k / N;
    B(0, k) = 0.0;
    for (int n = 1; n <= M; ++n) {
      B(n, k) = -n * std::sin(n * tau);
      B(M + n, k) = n * std::cos(n * tau);
    }
  }
  return B;
}

Eigen::MatrixXd LoopSeries::sample_grid(int N) const { return coef * basis_grid(modes, N); }

Eigen::MatrixXd LoopSeries::sample_grid_deriv(int N) const {
  return omega() * (coef * basis_grid_deriv(modes, N));
}

LoopSeries LoopSeries::derivative() const {
  LoopSeries d(period, modes);
  const double om = omega();
  for (int n = 1; n <= modes; ++n) {
    d.coef.col(n) = om * n * coef.col(modes + n);
    d.coef.col(modes + n) = -om * n * coef.col(n);
  }
  return d;
}

LoopSeries LoopSeries::time_shift(double s) const {
  const double delta = omega() * s;
  LoopSeries out(period, modes);
  out.coef.col(0) = coef.col(0);
  for (int n = 1; n <= modes; ++n) {
    const double cn = std::cos(n * delta), sn = std::sin(n * delta);
    out.coef.col(n) = cn * coef.col(n) + sn * coef.col(modes + n);
    out.coef.col(modes + n) = cn * coef.col(modes + n) - sn * coef.col(n);
  }
  return out;
}

LoopSeries LoopSeries::time_reverse() const {
  LoopSeries out = *this;
  for (int n = 1; n <= modes; ++n) out.coef.col(modes + n) = -coef.col(modes + n);
  return out;
}

LoopSeries LoopSeries::apply_spatial(const Eigen::Matrix3d& R) const {
  LoopSeries out = *this;
  for (int b = 0; b < 3; ++b)
    out.coef.middleRows(3 * b, 3) = R * coef.middleRows(3 * b, 3);
  return out;
}

LoopSeries LoopSeries::permute_bodies(const std::array<int, 3>& perm) const {
  LoopSeries out = *this;
  for (int b = 0; b < 3; ++b) out.coef.middleRows(3 * b, 3) = coef.middleRows(3 * perm[b], 3);
  return out;
}

LoopSeries LoopSeries::resample(int M2) const {
  LoopSeries out(period, M2);
  const int m = std::min(modes, M2);
  out.coef.col(0) = coef.col(0);
  for (int n = 1; n <= m; ++n) {
    out.coef.col(n) = coef.col(n);
    out.coef.col(M2 + n) = coef.col(modes + n);
  }
  return out;
}

double LoopSeries::l2_inner(const LoopSeries& other) const {
  if (other.modes != modes) throw std::invalid_argument("loop mode counts differ");
  double acc = coef.col(0).dot(other.coef.col(0)) * period;
  for (int n = 1; n <= modes; ++n)
    acc += 0.5 * period *
           (coef.col(n).dot(other.coef.col(n)) + coef.col(modes + n).dot(other.coef.col(modes + n)));
  return acc;
}

double LoopSeries::l2_norm() const { return std::sqrt(l2_inner(*this)); }

Eigen::MatrixXd LoopSeries::com_coefficients() const {
  Eigen::MatrixXd s(3, nb());
  for (int axis = 0; axis < 3; ++axis)
    s.row(axis) = coef.row(axis) + coef.row(3 + axis) + coef.row(6 + axis);
  return s;
}

double LoopSeries::com_max_abs() const { return com_coefficients().cwiseAbs().maxCoeff(); }

double LoopSeries::tail_mass(double frac) const {
  const int tail_from = std::max(1, static_cast<int>(std::ceil(modes * (1.0 - frac))));
  double tail = 0.0, total = 0.0;
  for (int n = 1; n <= modes; ++n) {
    const double m = coef.col(n).squaredNorm() + coef.col(modes + n).squaredNorm();
    total += m;
    if (n >= tail_from) tail += m;
  }
  return total > 0.0 ? tail / total : 0.0;
}

LoopSeries LoopSeries::project_grid(const Eigen::MatrixXd& values, double T, int M) {
  const int N = static_cast<int>(values.cols());
  LoopSeries out(T, M);
  const Eigen::MatrixXd B = basis_grid(M, N);
  Eigen::MatrixXd raw = values * B.transpose();  // 9 x nb, sums over grid
  raw *= 2.0 / N;
  raw.col(0) *= 0.5;
  out.coef = raw;
  return out;
}

}  // namespace eightfold
