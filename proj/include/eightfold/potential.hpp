// Pair potentials and exact directional derivatives of the interaction energy.
#pragma once

#include <Eigen/Core>
#include <span>

namespace eightfold {

using Vec3 = Eigen::Vector3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

enum class PotentialKind { LennardJones, Homogeneous, ZeroTest };

/// Pair interaction family: u(r) = r^-12 - r^-6 (Lennard-Jones),
/// u(r) = -1/(a r^a) (homogeneous, a > 0), or u == 0 (free-motion test stub).
struct Potential {
  PotentialKind kind = PotentialKind::LennardJones;
  double exponent_a = 1.0;  // only meaningful for Homogeneous

  static Potential lennard_jones() { return {PotentialKind::LennardJones, 1.0}; }
  static Potential homogeneous(double a);
  static Potential zero_test() { return {PotentialKind::ZeroTest, 1.0}; }
};

/// u and its first four radial derivatives at one separation.
struct PairJet {
  double value = 0, d1 = 0, d2 = 0, d3 = 0, d4 = 0;
};

/// Nine generalized coordinates (x1,y1,z1,x2,y2,z2,x3,y3,z3), unit masses.
struct Configuration {
  Vec9 q = Vec9::Zero();

  Configuration() = default;
  explicit Configuration(const Vec9& q_) : q(q_) {}
  Vec3 body(int i) const { return q.segment<3>(3 * i); }
  void set_body(int i, const Vec3& p) { q.segment<3>(3 * i) = p; }
};

/// Analytic jet of u at r > 0. Throws std::domain_error for r <= 0.
PairJet pair_jet(const Potential& p, double r);

/// U = sum_{i>j} u(r_ij). Throws std::domain_error on coincident bodies.
double potential_energy(const Potential& p, const Configuration& c);

/// L = |qdot|^2 / 2 - U.
double lagrangian_density(const Potential& p, const Configuration& c, const Vec9& qdot);

Vec9 grad_U(const Potential& p, const Configuration& c);
Mat9 hess_U(const Potential& p, const Configuration& c);

/// n-th mixed directional derivative of -U at c along dirs (n = 2, 3 or 4;
/// dirs.size() must equal n). This is the potential part of (phi d/dq)^n L;
/// the order-2 kinetic contribution is the caller's business. Computed by
/// truncated Taylor composition of the pair jets, no finite differencing.
double directional_derivative(const Potential& p, const Configuration& c,
                              std::span<const Vec9> dirs, int order);

}  // namespace eightfold
