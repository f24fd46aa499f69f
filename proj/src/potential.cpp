#include "eightfold/potential.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace eightfold {

namespace {

constexpr std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

void check_separation(double r) {
  if (!(r > 0.0)) throw std::domain_error("pair separation must be positive");
}

}  // namespace

Potential Potential::homogeneous(double a) {
  if (!(a > 0.0)) throw std::domain_error("homogeneous exponent must be positive");
  return {PotentialKind::Homogeneous, a};
}

PairJet pair_jet(const Potential& p, double r) {
  check_separation(r);
  PairJet j;
  switch (p.kind) {
    case PotentialKind::LennardJones: {
      const double i6 = 1.0 / (r * r * r * r * r * r);
      const double i12 = i6 * i6;
      j.value = i12 - i6;
      j.d1 = (-12.0 * i12 + 6.0 * i6) / r;
      j.d2 = (156.0 * i12 - 42.0 * i6) / (r * r);
      j.d3 = (-2184.0 * i12 + 336.0 * i6) / (r * r * r);
      j.d4 = (32760.0 * i12 - 3024.0 * i6) / (r * r * r * r);
      break;
    }
    case PotentialKind::Homogeneous: {
      const double a = p.exponent_a;
      const double ra = std::pow(r, -a);
      j.value = -ra / a;
      j.d1 = ra / r;
      j.d2 = -(a + 1.0) * ra / (r * r);
      j.d3 = (a + 1.0) * (a + 2.0) * ra / (r * r * r);
      j.d4 = -(a + 1.0) * (a + 2.0) * (a + 3.0) * ra / (r * r * r * r);
      break;
    }
    case PotentialKind::ZeroTest:
      break;
  }
  return j;
}

double potential_energy(const Potential& p, const Configuration& c) {
  double u = 0.0;
  for (auto [i, k] : kPairs) {
    const double r = (c.body(i) - c.body(k)).norm();
    check_separation(r);
    u += pair_jet(p, r).value;
  }
  return u;
}

double lagrangian_density(const Potential& p, const Configuration& c, const Vec9& qdot) {
  return 0.5 * qdot.squaredNorm() - potential_energy(p, c);
}

Vec9 grad_U(const Potential& p, const Configuration& c) {
  Vec9 g = Vec9::Zero();
  for (auto [i, k] : kPairs) {
    const Vec3 d = c.body(i) - c.body(k);
    const double r = d.norm();
    check_separation(r);
    const PairJet j = pair_jet(p, r);
    const Vec3 gi = (j.d1 / r) * d;
    g.segment<3>(3 * i) += gi;
    g.segment<3>(3 * k) -= gi;
  }
  return g;
}

Mat9 hess_U(const Potential& p, const Configuration& c) {
  Mat9 h = Mat9::Zero();
  for (auto [i, k] : kPairs) {
    const Vec3 d = c.body(i) - c.body(k);
    const double r = d.norm();
    check_separation(r);
    const PairJet j = pair_jet(p, r);
    const Vec3 n = d / r;
    // upper triangle plus mirror keeps the block symmetric to the last bit
    Eigen::Matrix3d blk;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        const double p = n(a) * n(b);
        blk(a, b) = j.d2 * p + (j.d1 / r) * ((a == b ? 1.0 : 0.0) - p);
        blk(b, a) = blk(a, b);
      }
    h.block<3, 3>(3 * i, 3 * i) += blk;
    h.block<3, 3>(3 * k, 3 * k) += blk;
    h.block<3, 3>(3 * i, 3 * k) -= blk;
    h.block<3, 3>(3 * k, 3 * i) -= blk;
  }
  return h;
}

namespace {

// Polynomials truncated to multilinear monomials in up to four parameters,
// indexed by variable subsets. Products only raise degrees, so any monomial
// with a squared variable can never contribute to the mixed derivative and is
// dropped on the spot.
struct Multilinear {
  int n;
  std::array<double, 16> c{};

  explicit Multilinear(int nvars) : n(nvars) {}

  Multilinear times(const Multilinear& o) const {
    Multilinear out(n);
    const int full = (1 << n) - 1;
    for (int s = 0; s <= full; ++s) {
      double acc = 0.0;
      // iterate submasks a of s
      for (int a = s;; a = (a - 1) & s) {
        acc += c[a] * o.c[s ^ a];
        if (a == 0) break;
      }
      out.c[s] = acc;
    }
    return out;
  }
};

// Derivatives of f(rho) = u(sqrt(rho)) with respect to rho, up to order four.
struct RadialJet {
  double f1, f2, f3, f4;
};

RadialJet sqrt_compose(const PairJet& u, double r) {
  const double rho = r * r;
  RadialJet f;
  f.f1 = u.d1 / (2.0 * r);
  f.f2 = (u.d2 - u.d1 / r) / (4.0 * rho);
  f.f3 = u.d3 / (8.0 * rho * r) - 3.0 * u.d2 / (8.0 * rho * rho) + 3.0 * u.d1 / (8.0 * rho * rho * r);
  f.f4 = u.d4 / (16.0 * rho * rho) - 3.0 * u.d3 / (8.0 * rho * rho * r) +
         15.0 * u.d2 / (16.0 * rho * rho * rho) - 15.0 * u.d1 / (16.0 * rho * rho * rho * r);
  return f;
}

}  // namespace

double directional_derivative(const Potential& p, const Configuration& c,
                              std::span<const Vec9> dirs, int order) {
  if (order < 2 || order > 4) throw std::invalid_argument("directional derivative order must be 2, 3 or 4");
  if (static_cast<int>(dirs.size()) != order)
    throw std::invalid_argument("dirs length must equal the derivative order");

  const int full = (1 << order) - 1;
  double total = 0.0;
  for (auto [i, k] : kPairs) {
    const Vec3 d = c.body(i) - c.body(k);
    const double r = d.norm();
    check_separation(r);

    Vec3 e[4];
    for (int m = 0; m < order; ++m) e[m] = dirs[m].segment<3>(3 * i) - dirs[m].segment<3>(3 * k);

    // rho(t) = |d + sum t_m e_m|^2 truncated to multilinear monomials
    Multilinear delta(order);
    for (int m = 0; m < order; ++m) delta.c[1 << m] = 2.0 * d.dot(e[m]);
    for (int m = 0; m < order; ++m)
      for (int l = m + 1; l < order; ++l) delta.c[(1 << m) | (1 << l)] = 2.0 * e[m].dot(e[l]);

    const RadialJet f = sqrt_compose(pair_jet(p, r), r);
    const Multilinear d2 = delta.times(delta);
    const Multilinear d3 = d2.times(delta);
    double acc = f.f1 * delta.c[full] + 0.5 * f.f2 * d2.c[full] + f.f3 / 6.0 * d3.c[full];
    if (order == 4) acc += f.f4 / 24.0 * d3.times(delta).c[full];
    total += acc;
  }
  return -total;  // derivative of -U, the Lagrangian sign
}

}  // namespace eightfold
