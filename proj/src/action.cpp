#include "eightfold/action.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eightfold {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
}  // namespace

GridEval grid_eval(const Orbit& o, bool with_hessian, double min_separation) {
  const int N = o.samples;
  GridEval g;
  g.q = o.loop.sample_grid(N);
  g.qdot = o.loop.sample_grid_deriv(N);
  g.U.resize(N);
  g.gradU.resize(9, N);
  if (with_hessian) g.hessU.resize(N);
  Configuration c;
  for (int k = 0; k < N; ++k) {
    c.q = g.q.col(k);
    for (auto [i, j] : kPairs) {
      const double r = (c.body(i) - c.body(j)).norm();
      if (!(r > min_separation))
        throw std::domain_error("bodies too close on the quadrature grid (r = " + std::to_string(r) + ")");
    }
    g.U(k) = potential_energy(o.potential, c);
    g.gradU.col(k) = grad_U(o.potential, c);
    if (with_hessian) g.hessU[k] = hess_U(o.potential, c);
  }
  return g;
}

double action(const Orbit& o) {
  const GridEval g = grid_eval(o, false);
  const double w = o.period() / o.samples;
  double s = 0.0;
  for (int k = 0; k < o.samples; ++k) s += 0.5 * g.qdot.col(k).squaredNorm() - g.U(k);
  return w * s;
}

Eigen::VectorXd action_gradient(const Orbit& o) {
  const GridEval g = grid_eval(o, false);
  const int M = o.modes(), N = o.samples, nb = o.loop.nb();
  const double om = o.loop.omega();
  const double w = o.period() / N;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(9 * nb);
  // kinetic part: exact, diagonal pi * omega * n^2 per coefficient
  for (int c = 0; c < 9; ++c)
    for (int n = 1; n <= M; ++n) {
      const double f = std::numbers::pi * om * n * n;
      grad(c * nb + n) = f * o.loop.coef(c, n);
      grad(c * nb + M + n) = f * o.loop.coef(c, M + n);
    }
  // potential part: -(T/N) sum_k dU/dq_c(k) basis_i(k)
  const Eigen::MatrixXd B = LoopSeries::basis_grid(M, N);
  for (int c = 0; c < 9; ++c)
    grad.segment(c * nb, nb) -= w * (B * g.gradU.row(c).transpose());
  return grad;
}

namespace {

/// Fill the (2M+1)^2 block of the bilinear form -int h(t) f_i f_j dt from the
/// cosine/sine transforms of the sample vector h.
void fill_block(const Eigen::VectorXd& h, int M, double weight, Eigen::MatrixXd& out) {
  const int N = static_cast<int>(h.size());
  Eigen::VectorXd Ac(2 * M + 1), As(2 * M + 1);
  for (int m = 0; m <= 2 * M; ++m) {
    double ac = 0.0, as = 0.0;
    for (int k = 0; k < N; ++k) {
      const double ang = kTwoPi * m * k / N;
      ac += h(k) * std::cos(ang);
      as += h(k) * std::sin(ang);
    }
    Ac(m) = ac;
    As(m) = as;
  }
  const int nb = 2 * M + 1;
  out.resize(nb, nb);
  out(0, 0) = weight * Ac(0);
  for (int j = 1; j <= M; ++j) {
    out(0, j) = out(j, 0) = weight * Ac(j);
    out(0, M + j) = out(M + j, 0) = weight * As(j);
  }
  for (int n = 1; n <= M; ++n)
    for (int j = 1; j <= M; ++j) {
      out(n, j) = weight * 0.5 * (Ac(std::abs(n - j)) + Ac(n + j));
      out(M + n, M + j) = weight * 0.5 * (Ac(std::abs(n - j)) - Ac(n + j));
      const double sgn = (j > n) ? 1.0 : (j < n ? -1.0 : 0.0);
      out(n, M + j) = weight * 0.5 * (As(n + j) + sgn * As(std::abs(j - n)));
      out(M + j, n) = out(n, M + j);
    }
}

}  // namespace

Eigen::MatrixXd action_hessian(const Orbit& o, const std::vector<int>& coords) {
  const GridEval g = grid_eval(o, true);
  const int M = o.modes(), N = o.samples, nb = o.loop.nb();
  const double om = o.loop.omega();
  const double w = o.period() / N;
  const int nc = static_cast<int>(coords.size());

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nc * nb, nc * nb);
  Eigen::VectorXd h(N);
  Eigen::MatrixXd blk;
  for (int a = 0; a < nc; ++a)
    for (int b = a; b < nc; ++b) {
      for (int k = 0; k < N; ++k) h(k) = g.hessU[k](coords[a], coords[b]);
      fill_block(h, M, -w, blk);
      H.block(a * nb, b * nb, nb, nb) = blk;
      if (b != a) H.block(b * nb, a * nb, nb, nb) = blk.transpose();
    }
  for (int a = 0; a < nc; ++a)
    for (int n = 1; n <= M; ++n) {
      const double f = std::numbers::pi * om * n * n;
      H(a * nb + n, a * nb + n) += f;
      H(a * nb + M + n, a * nb + M + n) += f;
    }
  return H;
}

Eigen::VectorXd energy_samples(const Orbit& o) {
  const GridEval g = grid_eval(o, false);
  Eigen::VectorXd e(o.samples);
  for (int k = 0; k < o.samples; ++k) e(k) = 0.5 * g.qdot.col(k).squaredNorm() + g.U(k);
  return e;
}

}  // namespace eightfold
