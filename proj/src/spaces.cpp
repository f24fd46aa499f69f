#include "eightfold/detail/spaces.hpp"

#include <cmath>
#include <numbers>

namespace eightfold::detail {

Eigen::VectorXd PlanarSpace::pack(const LoopSeries& loop) const {
  Eigen::VectorXd v(dim());
  for (int a = 0; a < 6; ++a) v.segment(a * nb, nb) = loop.coef.row(kCoords[a]).transpose();
  return v;
}

void PlanarSpace::unpack(const Eigen::VectorXd& v, LoopSeries& loop) const {
  for (int a = 0; a < 6; ++a) loop.coef.row(kCoords[a]) = v.segment(a * nb, nb).transpose();
}

Eigen::MatrixXd PlanarSpace::com_rows() const {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * nb, dim());
  for (int i = 0; i < nb; ++i) {
    for (int body = 0; body < 3; ++body) {
      C(i, (2 * body) * nb + i) = 1.0;           // x rows sit at planar blocks 0,2,4
      C(nb + i, (2 * body + 1) * nb + i) = 1.0;  // y rows at blocks 1,3,5
    }
  }
  return C;
}

Eigen::VectorXd PlanarSpace::phase_row(const Eigen::VectorXd& v) const {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(dim());
  for (int a = 0; a < 6; ++a)
    for (int n = 1; n <= M; ++n) {
      row(a * nb + n) = n * v(a * nb + M + n);
      row(a * nb + M + n) = -n * v(a * nb + n);
    }
  return row;
}

Eigen::VectorXd PlanarSpace::rotation_row(const Eigen::VectorXd& v) const {
  Eigen::VectorXd row(dim());
  for (int body = 0; body < 3; ++body) {
    row.segment((2 * body) * nb, nb) = -v.segment((2 * body + 1) * nb, nb);
    row.segment((2 * body + 1) * nb, nb) = v.segment((2 * body) * nb, nb);
  }
  return row;
}

ChoreoSpace::ChoreoSpace(int modes) : M(modes) {
  for (int n = 1; n <= M; ++n)
    if (n % 3 != 0) allowed.push_back(n);
}

Eigen::VectorXd ChoreoSpace::pack(const Curve& c) const {
  const int K = static_cast<int>(allowed.size());
  Eigen::VectorXd u(dim());
  for (int coord = 0; coord < 2; ++coord)
    for (int i = 0; i < K; ++i) {
      u(coord * 2 * K + i) = c.coef(coord, allowed[i]);
      u(coord * 2 * K + K + i) = c.coef(coord, M + allowed[i]);
    }
  return u;
}

Curve ChoreoSpace::unpack(const Eigen::VectorXd& u, double period) const {
  const int K = static_cast<int>(allowed.size());
  Curve c(period, M);
  for (int coord = 0; coord < 2; ++coord)
    for (int i = 0; i < K; ++i) {
      c.coef(coord, allowed[i]) = u(coord * 2 * K + i);
      c.coef(coord, M + allowed[i]) = u(coord * 2 * K + K + i);
    }
  return c;
}

Eigen::MatrixXd ChoreoSpace::map_to_planar() const {
  const int K = static_cast<int>(allowed.size());
  const int nb = 2 * M + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(6 * nb, dim());
  for (int body = 0; body < 3; ++body) {
    const double delta = body * 2.0 * std::numbers::pi / 3.0;
    for (int coord = 0; coord < 2; ++coord) {
      const int blk = (2 * body + coord) * nb;  // planar row of this body/coord
      for (int i = 0; i < K; ++i) {
        const int n = allowed[i];
        const double cn = std::cos(n * delta), sn = std::sin(n * delta);
        const int ucos = coord * 2 * K + i, usin = coord * 2 * K + K + i;
        // body coefficients of c(tau + delta)
        J(blk + n, ucos) = cn;
        J(blk + n, usin) = sn;
        J(blk + M + n, ucos) = -sn;
        J(blk + M + n, usin) = cn;
      }
    }
  }
  return J;
}

Eigen::VectorXd ChoreoSpace::phase_row(const Eigen::VectorXd& u) const {
  const int K = static_cast<int>(allowed.size());
  Eigen::VectorXd row = Eigen::VectorXd::Zero(dim());
  for (int coord = 0; coord < 2; ++coord)
    for (int i = 0; i < K; ++i) {
      const int n = allowed[i];
      row(coord * 2 * K + i) = n * u(coord * 2 * K + K + i);
      row(coord * 2 * K + K + i) = -n * u(coord * 2 * K + i);
    }
  return row;
}

Eigen::VectorXd ChoreoSpace::rotation_row(const Eigen::VectorXd& u) const {
  const int K2 = per_coord();
  Eigen::VectorXd row(dim());
  row.head(K2) = -u.tail(K2);
  row.tail(K2) = u.head(K2);
  return row;
}

}  // namespace eightfold::detail
