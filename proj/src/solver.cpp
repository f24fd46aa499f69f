#include "eightfold/solver.hpp"

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <cmath>
#include <stdexcept>

#include "eightfold/action.hpp"
#include "eightfold/detail/spaces.hpp"

namespace eightfold {

namespace {

using detail::ChoreoSpace;
using detail::PlanarSpace;

struct KktProblem {
  // residual pieces at the current point
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  Eigen::MatrixXd C;       // constraint rows (anchors recomputed per iterate)
  Eigen::VectorXd c_viol;  // current constraint violation (zero rows for anchors)
};

/// One damped Newton-KKT pass. Returns false if the orbit evaluation failed.
template <class Eval>
SolveReport newton_loop(Eval&& eval, Eigen::VectorXd v, const GaugeOptions& opt,
                        const std::function<Orbit(const Eigen::VectorXd&)>& rebuild) {
  SolveReport rep;
  double gnorm = 0.0;
  int it = 0;
  for (; it <= opt.max_iter; ++it) {
    KktProblem kkt;
    try {
      kkt = eval(v, true);
    } catch (const std::domain_error& e) {
      rep.orbit = rebuild(v);
      rep.residual_norm = std::numeric_limits<double>::infinity();
      rep.iterations = it;
      rep.converged = false;
      rep.message = std::string("collision during iteration: ") + e.what();
      return rep;
    }
    gnorm = kkt.grad.norm();
    const double viol = kkt.c_viol.size() ? kkt.c_viol.cwiseAbs().maxCoeff() : 0.0;
    if (gnorm < opt.tol && viol < opt.tol) break;
    if (it == opt.max_iter) break;

    const int n = static_cast<int>(v.size());
    const int m = static_cast<int>(kkt.C.rows());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -kkt.grad;
    rhs.tail(m) = -kkt.c_viol;
    K.topRightCorner(n, m) = kkt.C.transpose();
    K.bottomLeftCorner(m, n) = kkt.C;

    double lambda = 0.0;
    bool stepped = false;
    for (int attempt = 0; attempt < 6 && !stepped; ++attempt) {
      K.topLeftCorner(n, n) = kkt.hess;
      if (lambda > 0.0) K.topLeftCorner(n, n).diagonal().array() += lambda;
      Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
      if (!sol.allFinite()) {
        lambda = (lambda == 0.0) ? 1e-8 : lambda * 100.0;
        continue;
      }
      const Eigen::VectorXd dv = sol.head(n);
      double alpha = 1.0;
      for (int ls = 0; ls < 10; ++ls) {
        const Eigen::VectorXd v_try = v + alpha * dv;
        try {
          const KktProblem probe = eval(v_try, false);
          const double gn_try = probe.grad.norm();
          if (gn_try < gnorm * (1.0 - 0.05 * alpha) || gn_try < opt.tol) {
            v = v_try;
            stepped = true;
            break;
          }
        } catch (const std::domain_error&) {
          // collision along the step: shrink
        }
        alpha *= 0.5;
      }
      if (!stepped) lambda = (lambda == 0.0) ? 1e-8 * gnorm : lambda * 100.0;
    }
    if (!stepped) {
      rep.orbit = rebuild(v);
      rep.residual_norm = gnorm;
      rep.iterations = it;
      rep.converged = false;
      rep.message = "no descent step found (Levenberg fallback exhausted)";
      return rep;
    }
  }
  rep.orbit = rebuild(v);
  rep.residual_norm = gnorm;
  rep.iterations = it;
  rep.converged = gnorm < opt.tol;
  if (!rep.converged && rep.message.empty()) rep.message = "iteration limit reached";
  return rep;
}

SolveReport solve_planar(const Orbit& seed, const GaugeOptions& opt) {
  const PlanarSpace sp(seed.modes());
  const Eigen::MatrixXd com = sp.com_rows();
  Orbit work = seed;

  auto rebuild = [&](const Eigen::VectorXd& v) {
    Orbit o = work;
    sp.unpack(v, o.loop);
    return o;
  };
  auto eval = [&](const Eigen::VectorXd& v, bool with_hess) {
    const Orbit o = rebuild(v);
    KktProblem kkt;
    const Eigen::VectorXd full_grad = action_gradient(o);
    kkt.grad.resize(sp.dim());
    const int nb = sp.nb;
    for (int a = 0; a < 6; ++a)
      kkt.grad.segment(a * nb, nb) = full_grad.segment(PlanarSpace::kCoords[a] * nb, nb);
    if (with_hess) {
      kkt.hess = action_hessian(o, sp.coord_rows());
      Eigen::VectorXd ph = sp.phase_row(v), rot = sp.rotation_row(v);
      ph.normalize();
      rot.normalize();
      kkt.C.resize(com.rows() + 2, sp.dim());
      kkt.C.topRows(com.rows()) = com;
      kkt.C.row(com.rows()) = ph.transpose();
      kkt.C.row(com.rows() + 1) = rot.transpose();
      kkt.c_viol.resize(kkt.C.rows());
      kkt.c_viol.head(com.rows()) = com * v;
      kkt.c_viol.tail(2).setZero();
    }
    return kkt;
  };

  return newton_loop(eval, sp.pack(seed.loop), opt, rebuild);
}

SolveReport solve_choreography(const Orbit& seed, const GaugeOptions& opt) {
  const ChoreoSpace sp(seed.modes());
  const PlanarSpace psp(seed.modes());
  const Eigen::MatrixXd J = sp.map_to_planar();
  const Potential pot = seed.potential;
  const double T = seed.period();
  const int N = seed.samples;

  auto rebuild = [&](const Eigen::VectorXd& u) {
    return orbit_from_curve(pot, sp.unpack(u, T), N);
  };
  auto eval = [&](const Eigen::VectorXd& u, bool with_hess) {
    const Orbit o = rebuild(u);
    KktProblem kkt;
    const Eigen::VectorXd full_grad = action_gradient(o);
    Eigen::VectorXd pg(psp.dim());
    const int nb = psp.nb;
    for (int a = 0; a < 6; ++a)
      pg.segment(a * nb, nb) = full_grad.segment(PlanarSpace::kCoords[a] * nb, nb);
    kkt.grad = J.transpose() * pg;
    if (with_hess) {
      const Eigen::MatrixXd Hp = action_hessian(o, psp.coord_rows());
      kkt.hess = J.transpose() * Hp * J;
      Eigen::VectorXd ph = sp.phase_row(u), rot = sp.rotation_row(u);
      ph.normalize();
      rot.normalize();
      kkt.C.resize(2, sp.dim());
      kkt.C.row(0) = ph.transpose();
      kkt.C.row(1) = rot.transpose();
      kkt.c_viol = Eigen::VectorXd::Zero(2);
    }
    return kkt;
  };

  return newton_loop(eval, sp.pack(curve_of_body(seed, 0)), opt, rebuild);
}

bool z_rows_clean(const Orbit& o) {
  double zmax = 0.0;
  for (int body = 0; body < 3; ++body)
    zmax = std::max(zmax, o.loop.coef.row(3 * body + 2).cwiseAbs().maxCoeff());
  return zmax < 1e-12;
}

}  // namespace

SolveReport solve_orbit(const Orbit& seed, const GaugeOptions& opt) {
  if (!z_rows_clean(seed))
    throw std::invalid_argument("planar solver requires zero z coefficient rows");
  GaugeOptions o = opt;
  SolveReport rep = opt.choreography ? solve_choreography(seed, o) : solve_planar(seed, o);
  if (rep.converged && opt.allow_refine && rep.orbit.loop.tail_mass() >= 1e-10 &&
      rep.orbit.modes() < 256) {
    Orbit finer = resample(rep.orbit, 2 * rep.orbit.modes(), 2 * rep.orbit.samples);
    o.allow_refine = rep.orbit.modes() * 2 < 256;
    SolveReport finer_rep = solve_orbit(finer, o);
    if (finer_rep.converged) return finer_rep;
  }
  return rep;
}

}  // namespace eightfold
