#include "eightfold/continuation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "eightfold/action.hpp"
#include "eightfold/detail/spaces.hpp"

namespace eightfold {

namespace {

using detail::ChoreoSpace;
using detail::PlanarSpace;

/// Variable space + parameter semantics for one continuation problem.
class ArcSpace {
 public:
  virtual ~ArcSpace() = default;
  virtual int nvars() const = 0;
  virtual int ncons() const = 0;
  virtual Orbit make_orbit(const Eigen::VectorXd& v, double p) const = 0;
  virtual Eigen::VectorXd pack(const Orbit& o) const = 0;
  virtual Eigen::VectorXd gradient(const Orbit& o) const = 0;
  virtual Eigen::MatrixXd hessian(const Orbit& o) const = 0;
  virtual Eigen::MatrixXd constraint_rows(const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd constraint_violation(const Eigen::VectorXd& v,
                                               const Eigen::VectorXd& v_anchor,
                                               const Eigen::MatrixXd& rows) const = 0;
};

Potential potential_for(ParamValue::Kind kind, const Potential& base, double p) {
  return kind == ParamValue::Kind::Exponent ? Potential::homogeneous(p) : base;
}

double period_for(ParamValue::Kind kind, double T_fixed, double p) {
  return kind == ParamValue::Kind::Period ? p : T_fixed;
}

class PlanarArc final : public ArcSpace {
 public:
  PlanarArc(ParamValue::Kind pk, Potential base, double T_fixed, int M, int N)
      : pk_(pk), base_(base), T_fixed_(T_fixed), M_(M), N_(N), sp_(M), com_(sp_.com_rows()) {}

  int nvars() const override { return sp_.dim(); }
  int ncons() const override { return static_cast<int>(com_.rows()) + 2; }

  Orbit make_orbit(const Eigen::VectorXd& v, double p) const override {
    LoopSeries loop(period_for(pk_, T_fixed_, p), M_);
    sp_.unpack(v, loop);
    return Orbit(potential_for(pk_, base_, p), loop, N_);
  }
  Eigen::VectorXd pack(const Orbit& o) const override { return sp_.pack(o.loop); }
  Eigen::VectorXd gradient(const Orbit& o) const override {
    const Eigen::VectorXd g = action_gradient(o);
    Eigen::VectorXd out(sp_.dim());
    for (int a = 0; a < 6; ++a)
      out.segment(a * sp_.nb, sp_.nb) = g.segment(PlanarSpace::kCoords[a] * sp_.nb, sp_.nb);
    return out;
  }
  Eigen::MatrixXd hessian(const Orbit& o) const override {
    return action_hessian(o, sp_.coord_rows());
  }
  Eigen::MatrixXd constraint_rows(const Eigen::VectorXd& v) const override {
    Eigen::MatrixXd C(ncons(), nvars());
    C.topRows(com_.rows()) = com_;
    Eigen::VectorXd ph = sp_.phase_row(v), rot = sp_.rotation_row(v);
    ph.normalize();
    rot.normalize();
    C.row(com_.rows()) = ph.transpose();
    C.row(com_.rows() + 1) = rot.transpose();
    return C;
  }
  Eigen::VectorXd constraint_violation(const Eigen::VectorXd& v, const Eigen::VectorXd& v_anchor,
                                       const Eigen::MatrixXd& rows) const override {
    Eigen::VectorXd c(rows.rows());
    c.head(com_.rows()) = com_ * v;
    c.tail(2) = rows.bottomRows(2) * (v - v_anchor);
    return c;
  }

 private:
  ParamValue::Kind pk_;
  Potential base_;
  double T_fixed_;
  int M_, N_;
  PlanarSpace sp_;
  Eigen::MatrixXd com_;
};

class ChoreoArc final : public ArcSpace {
 public:
  ChoreoArc(ParamValue::Kind pk, Potential base, double T_fixed, int M, int N)
      : pk_(pk), base_(base), T_fixed_(T_fixed), M_(M), N_(N), sp_(M), psp_(M),
        J_(sp_.map_to_planar()) {}

  int nvars() const override { return sp_.dim(); }
  int ncons() const override { return 2; }

  Orbit make_orbit(const Eigen::VectorXd& v, double p) const override {
    Curve c = sp_.unpack(v, period_for(pk_, T_fixed_, p));
    return orbit_from_curve(potential_for(pk_, base_, p), c, N_);
  }
  Eigen::VectorXd pack(const Orbit& o) const override { return sp_.pack(curve_of_body(o, 0)); }
  Eigen::VectorXd gradient(const Orbit& o) const override {
    const Eigen::VectorXd g = action_gradient(o);
    Eigen::VectorXd pg(psp_.dim());
    for (int a = 0; a < 6; ++a)
      pg.segment(a * psp_.nb, psp_.nb) = g.segment(PlanarSpace::kCoords[a] * psp_.nb, psp_.nb);
    return J_.transpose() * pg;
  }
  Eigen::MatrixXd hessian(const Orbit& o) const override {
    return J_.transpose() * action_hessian(o, psp_.coord_rows()) * J_;
  }
  Eigen::MatrixXd constraint_rows(const Eigen::VectorXd& v) const override {
    Eigen::MatrixXd C(2, nvars());
    Eigen::VectorXd ph = sp_.phase_row(v), rot = sp_.rotation_row(v);
    ph.normalize();
    rot.normalize();
    C.row(0) = ph.transpose();
    C.row(1) = rot.transpose();
    return C;
  }
  Eigen::VectorXd constraint_violation(const Eigen::VectorXd& v, const Eigen::VectorXd& v_anchor,
                                       const Eigen::MatrixXd& rows) const override {
    return rows * (v - v_anchor);
  }

 private:
  ParamValue::Kind pk_;
  Potential base_;
  double T_fixed_;
  int M_, N_;
  ChoreoSpace sp_;
  PlanarSpace psp_;
  Eigen::MatrixXd J_;
};

Eigen::VectorXd grad_of(const ArcSpace& sp, const Eigen::VectorXd& v, double p) {
  return sp.gradient(sp.make_orbit(v, p));
}

/// Raw arclength stepper; invokes `record` for every accepted point and
/// `stop` to test termination. Returns a diagnostic on step underflow.
struct ArcRun {
  bool fold_seen = false;
  double p_reversal = 0.0;
  std::string message;
};

template <class Record, class Stop>
ArcRun run_arclength(const ArcSpace& sp, Eigen::VectorXd v, double p, int direction,
                     const BranchControls& ctl, Record&& record, Stop&& stop) {
  ArcRun run;
  const int n = sp.nvars(), m = sp.ncons();
  Eigen::VectorXd tangent = Eigen::VectorXd::Zero(n + 1);
  tangent(n) = direction ? direction : 1.0;
  double ds = ctl.ds0;
  double last_dp = 0.0;

  for (int point = 0; point < ctl.max_points; ++point) {
    Orbit orbit = sp.make_orbit(v, p);
    const Eigen::MatrixXd H = sp.hessian(orbit);
    const Eigen::MatrixXd C = sp.constraint_rows(v);
    Eigen::VectorXd gp;
    {
      const double dp = 1e-6 * std::max(1.0, std::abs(p));
      gp = (grad_of(sp, v, p + dp) - grad_of(sp, v, p - dp)) / (2.0 * dp);
    }
    // tangent from the bordered system [H C^T g_p; C 0 0; t_prev] t = e_last
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
    B.topLeftCorner(n, n) = H;
    B.block(0, n, n, m) = C.transpose();
    B.block(n, 0, m, n) = C;
    B.block(0, n + m, n, 1) = gp;
    B.row(n + m).head(n) = tangent.head(n);
    B(n + m, n + m) = tangent(n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m + 1);
    rhs(n + m) = 1.0;
    const Eigen::VectorXd tsol = B.partialPivLu().solve(rhs);
    Eigen::VectorXd t(n + 1);
    t.head(n) = tsol.head(n);
    t(n) = tsol(n + m);
    if (!t.allFinite() || t.norm() < 1e-14) {
      run.message = "singular tangent system";
      return run;
    }
    t.normalize();
    if (point == 0 && direction != 0 && t(n) * direction < 0) t = -t;
    tangent = t;

    // predictor-corrector with step adaptation
    bool accepted = false;
    while (!accepted) {
      const Eigen::VectorXd v_pred = v + ds * t.head(n);
      const double p_pred = p + ds * t(n);
      Eigen::VectorXd vv = v_pred;
      double pp = p_pred;
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
      bool ok = false;
      int iters = 0;
      for (; iters < 14; ++iters) {
        Orbit cur;
        Eigen::VectorXd g;
        try {
          cur = sp.make_orbit(vv, pp);
          g = sp.gradient(cur);
        } catch (const std::domain_error&) {
          break;  // collision: shrink the step
        }
        const Eigen::VectorXd cv = sp.constraint_violation(vv, v, C);
        const double arc = t.head(n).dot(vv - v_pred) + t(n) * (pp - p_pred);
        const Eigen::VectorXd r_top = g + C.transpose() * mu;
        if (r_top.norm() < ctl.tol && cv.cwiseAbs().maxCoeff() < ctl.tol && std::abs(arc) < 1e-11) {
          ok = true;
          break;
        }
        const Eigen::MatrixXd Hc = sp.hessian(cur);
        Eigen::VectorXd gpc;
        {
          const double dp = 1e-6 * std::max(1.0, std::abs(pp));
          gpc = (grad_of(sp, vv, pp + dp) - grad_of(sp, vv, pp - dp)) / (2.0 * dp);
        }
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
        K.topLeftCorner(n, n) = Hc;
        K.block(0, n, n, m) = C.transpose();
        K.block(n, 0, m, n) = C;
        K.block(0, n + m, n, 1) = gpc;
        K.row(n + m).head(n) = t.head(n);
        K(n + m, n + m) = t(n);
        Eigen::VectorXd R(n + m + 1);
        R.head(n) = r_top;
        R.segment(n, m) = cv;
        R(n + m) = arc;
        const Eigen::VectorXd dy = K.partialPivLu().solve(-R);
        if (!dy.allFinite()) break;
        vv += dy.head(n);
        mu += dy.segment(n, m);
        pp += dy(n + m);
      }
      if (ok) {
        accepted = true;
        last_dp = pp - p;
        v = vv;
        p = pp;
        if (!ctl.fixed_step) {
          if (iters <= 4)
            ds = std::min(ds * 1.3, ctl.ds_max);
          else if (iters >= 9)
            ds = std::max(ds * 0.5, ctl.ds_min);
        }
      } else {
        ds /= 3.0;
        if (ds < ctl.ds_min) {
          run.message = "continuation step underflow";
          return run;
        }
      }
    }

    record(sp.make_orbit(v, p), p);
    if (stop(p, run)) return run;
  }
  run.message = "point budget exhausted";
  return run;
}

}  // namespace

KappaFit fit_kappa_linear(const ScanTable& scan) {
  const auto& rows = scan.rows;
  if (rows.size() < 3) throw std::invalid_argument("linear fit needs at least 3 scan points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    sx += r.parameter;
    sy += r.kappa;
    sxx += r.parameter * r.parameter;
    sxy += r.parameter * r.kappa;
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-14 * std::max(1.0, sxx * n))
    throw std::invalid_argument("degenerate abscissae in the kappa fit");
  KappaFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  return f;
}

SeedResult branch_seed(FamilyCurve& family, const BifurcationPoint& bp, double parameter,
                       double theta, double h, bool prefer_small) {
  const Orbit& base = family.at(parameter);
  double coef_norm = base.loop.coef.norm();
  double h0 = h > 0 ? h : 1e-2 * coef_norm;

  LoopSeries dir = bp.phi1;
  dir.coef = std::cos(theta) * bp.phi1.coef + std::sin(theta) * bp.phi2.coef;
  for (int b = 0; b < 3; ++b) dir.coef.row(3 * b + 2).setZero();  // keep the seed planar

  GaugeOptions g;
  g.choreography = false;
  g.allow_refine = false;
  static constexpr double kUp[] = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 0.5, 0.25};
  static constexpr double kSmall[] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  for (double factor : prefer_small ? kSmall : kUp) {
    const double hh = h0 * factor;
    Orbit seed = base;
    seed.loop.coef += hh * dir.coef;
    const SolveReport rep = solve_orbit(seed, g);
    if (!rep.converged) continue;
    LoopSeries diff = rep.orbit.loop;
    diff.coef -= base.loop.coef;
    const double dist = diff.l2_norm();
    if (dist > hh / 10.0) return {rep, dist, hh};
  }
  throw std::runtime_error(
      "branch seeding kept collapsing to the symmetric family; try a larger h or the other "
      "parameter side");
}

namespace {

void append_point(Branch& b, const Orbit& o, double p, FamilyCurve& family, const KappaFit& kfit) {
  BranchPoint pt;
  pt.parameter = p;
  pt.orbit = o;
  pt.S = action(o);
  pt.S_ref = family.reference_action(p);
  pt.kappa_ref = kfit(p);
  b.points.push_back(std::move(pt));
}

}  // namespace

Branch continue_branch(const SolveReport& start, double start_param, FamilyCurve& family,
                       const KappaFit& kfit, int direction, const BranchControls& ctl) {
  if (!start.converged) throw std::invalid_argument("continue_branch needs a converged start");
  const Orbit& o0 = start.orbit;
  PlanarArc arc(family.parameter_kind(),
                family.parameter_kind() == ParamValue::Kind::Exponent ? Potential::homogeneous(1.0)
                                                                      : o0.potential,
                o0.period(), o0.modes(), o0.samples);
  Branch branch;
  branch.param_kind = family.parameter_kind();
  append_point(branch, o0, start_param, family, kfit);

  double prev_p = start_param;
  bool fold_seen = false;
  double p_reversal = 0.0;
  int motion_sign = 0;
  int snapped = 0;

  auto record = [&](const Orbit& o, double p) {
    append_point(branch, o, p, family, kfit);
    const int s = (p > prev_p) ? 1 : (p < prev_p ? -1 : 0);
    if (s != 0) {
      if (motion_sign != 0 && s != motion_sign && !fold_seen) {
        fold_seen = true;
        p_reversal = prev_p;
      }
      motion_sign = s;
    }
    prev_p = p;
    const auto& pt = branch.points.back();
    // distance-like proxy: exactly on the reference family both actions agree
    if (std::abs(pt.S - pt.S_ref) < 1e-12 * std::max(1.0, std::abs(pt.S)))
      ++snapped;
    else
      snapped = 0;
  };
  auto stop = [&](double p, ArcRun&) {
    if (snapped >= 3) {
      // the run slid onto the symmetric family; drop its tail
      branch.points.resize(branch.points.size() - snapped);
      return true;
    }
    if (p < ctl.param_lo || p > ctl.param_hi) return true;
    // eigenvalue budget: before any reversal use the caller's allowance (the
    // fold must stay reachable); after it, 1.6x the eigenvalue at the fold
    // covers the mirrored range on the way back
    const double budget =
        fold_seen ? 1.6 * std::max(std::abs(kfit(p_reversal)), 1e-300) : ctl.kappa_budget;
    if (budget > 0.0 && std::abs(kfit(p)) > budget) return true;
    if (fold_seen && ctl.post_fold_factor > 0.0) {
      const double travel = ctl.post_fold_factor * std::abs(ctl.bif_param - p_reversal) +
                            std::abs(start_param - p_reversal);
      if (std::abs(p - p_reversal) > travel) return true;
    }
    return false;
  };
  const ArcRun run = run_arclength(arc, arc.pack(o0), start_param, direction, ctl, record, stop);
  if (!run.message.empty() && branch.points.size() < 3)
    throw std::runtime_error("branch continuation failed early: " + run.message);
  return branch;
}

void assign_fold_and_sides(Branch& b) {
  const auto& ps = b.points;
  int fold_idx = -1;
  for (size_t i = 1; i + 1 < ps.size(); ++i) {
    const double a = ps[i].parameter - ps[i - 1].parameter;
    const double c = ps[i + 1].parameter - ps[i].parameter;
    if (a * c < 0.0) {
      fold_idx = static_cast<int>(i);
      break;
    }
  }
  b.fold_index.reset();
  if (fold_idx >= 0) b.fold_index = fold_idx;

  // side labels: the sheet containing the smallest |dS| approaches the
  // reference solution (r -> 0 at the bifurcation parameter)
  b.sides.assign(ps.size(), BranchSide::TowardQ);
  if (fold_idx >= 0) {
    auto sheet_min = [&](size_t lo, size_t hi) {
      double m = 1e300;
      for (size_t i = lo; i < hi; ++i) m = std::min(m, std::abs(ps[i].S - ps[i].S_ref));
      return m;
    };
    const double before = sheet_min(0, fold_idx + 1);
    const double after = sheet_min(fold_idx + 1, ps.size());
    const BranchSide before_side = before <= after ? BranchSide::TowardQ : BranchSide::FoldSide;
    const BranchSide after_side = before <= after ? BranchSide::FoldSide : BranchSide::TowardQ;
    for (size_t i = 0; i < ps.size(); ++i)
      b.sides[i] = (static_cast<int>(i) <= fold_idx) ? before_side : after_side;
  }
}

Branch continue_branch_both(const SolveReport& start, double start_param, FamilyCurve& family,
                            const KappaFit& kfit, const BranchControls& toward_fold,
                            const BranchControls& away) {
  Branch down = continue_branch(start, start_param, family, kfit, -1, toward_fold);
  Branch up = continue_branch(start, start_param, family, kfit, +1, away);
  Branch merged;
  merged.param_kind = down.param_kind;
  for (auto it = down.points.rbegin(); it != down.points.rend(); ++it) merged.points.push_back(*it);
  for (size_t i = 1; i < up.points.size(); ++i) merged.points.push_back(up.points[i]);
  assign_fold_and_sides(merged);
  return merged;
}

namespace {

struct FoldSample {
  double s = 0.0;  // cumulative arclength
  double parameter = 0.0;
  double S = 0.0;
};

/// Vertex of least-squares parabolas parameter(s) and S(s).
std::pair<double, double> fold_vertex(const std::vector<FoldSample>& pts) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd yp(n), yS(n);
  const double s_mid = pts[n / 2].s;  // center for conditioning
  for (int i = 0; i < n; ++i) {
    const double x = pts[i].s - s_mid;
    A(i, 0) = 1.0;
    A(i, 1) = x;
    A(i, 2) = x * x;
    yp(i) = pts[i].parameter;
    yS(i) = pts[i].S;
  }
  const Eigen::Vector3d cp = A.colPivHouseholderQr().solve(yp);
  const Eigen::Vector3d cS = A.colPivHouseholderQr().solve(yS);
  if (std::abs(cp(2)) < 1e-300) throw std::runtime_error("degenerate fold fit");
  const double x0 = -cp(1) / (2.0 * cp(2));
  if (std::abs(x0) > (pts.back().s - pts.front().s))
    throw std::runtime_error("fold vertex fell outside its fit window");
  return {cp(0) + cp(1) * x0 + cp(2) * x0 * x0, cS(0) + cS(1) * x0 + cS(2) * x0 * x0};
}

double arc_between(const BranchPoint& a, const BranchPoint& b) {
  LoopSeries diff = a.orbit.loop;
  diff.coef -= b.orbit.loop.coef;
  return std::hypot(diff.l2_norm(), a.parameter - b.parameter);
}

}  // namespace

FoldInfo locate_fold(const Branch& b, FamilyCurve& family, const BifurcationPoint& bp) {
  if (!b.fold_index) throw std::runtime_error("branch has no parameter turning point");
  const auto& ps = b.points;
  const int idx = *b.fold_index;
  const int lo = std::max(0, idx - 2), hi = std::min<int>(ps.size() - 1, idx + 2);
  if (hi - lo < 2) throw std::runtime_error("too few points around the fold for a quadratic fit");

  // refine the turning region with a short fixed-step re-run so the
  // quadratic fit sees tightly spaced points
  double window_arc = 0.0;
  for (int i = lo + 1; i <= hi; ++i) window_arc += arc_between(ps[i], ps[i - 1]);
  const Orbit& start_orbit = ps[lo].orbit;
  PlanarArc arc(family.parameter_kind(),
                family.parameter_kind() == ParamValue::Kind::Exponent ? Potential::homogeneous(1.0)
                                                                      : start_orbit.potential,
                start_orbit.period(), start_orbit.modes(), start_orbit.samples);
  BranchControls fine;
  fine.ds0 = std::max(window_arc / 16.0, 1e-6);
  fine.fixed_step = true;
  fine.max_points = 30;
  fine.tol = 1e-11;
  double p_min = 1e300, p_max = -1e300;
  for (int i = lo; i <= hi; ++i) {
    p_min = std::min(p_min, ps[i].parameter);
    p_max = std::max(p_max, ps[i].parameter);
  }
  const double p_margin = std::max(1e-9, 0.5 * (p_max - p_min));
  fine.param_lo = p_min - p_margin;
  fine.param_hi = p_max + p_margin;

  std::vector<FoldSample> samples;
  Orbit prev = start_orbit;
  double acc_s = 0.0;
  bool rev_seen = false;
  int after_rev = 0;
  double prev_param = ps[lo].parameter;
  int motion = 0;
  samples.push_back({0.0, ps[lo].parameter, ps[lo].S});
  auto record = [&](const Orbit& o, double p) {
    LoopSeries diff = o.loop;
    diff.coef -= prev.loop.coef;
    acc_s += std::hypot(diff.l2_norm(), p - prev_param);
    samples.push_back({acc_s, p, action(o)});
    const int sgn = (p > prev_param) ? 1 : (p < prev_param ? -1 : 0);
    if (sgn != 0) {
      if (motion != 0 && sgn != motion) rev_seen = true;
      motion = sgn;
    }
    if (rev_seen) ++after_rev;
    prev = o;
    prev_param = p;
  };
  auto stop = [&](double, ArcRun&) { return rev_seen && after_rev >= 6; };
  const int dir = (ps[lo + 1].parameter > ps[lo].parameter) ? +1 : -1;
  run_arclength(arc, arc.pack(start_orbit), ps[lo].parameter, dir, fine, record, stop);
  if (!rev_seen || samples.size() < 7)
    throw std::runtime_error("fold refinement lost the turning point");

  // fit only the samples close to the extremal parameter
  size_t i_ext = 0;
  for (size_t i = 1; i < samples.size(); ++i) {
    const bool more = (dir > 0) ? samples[i].parameter > samples[i_ext].parameter
                                : samples[i].parameter < samples[i_ext].parameter;
    if (more) i_ext = i;
  }
  std::vector<FoldSample> local;
  const double reach = 5.5 * fine.ds0;
  for (const auto& smp : samples)
    if (std::abs(smp.s - samples[i_ext].s) <= reach) local.push_back(smp);
  if (local.size() < 5) local = samples;

  const auto [p_fold, S_fold] = fold_vertex(local);
  FoldInfo f;
  f.parameter = p_fold;
  f.deltaS0 = S_fold - family.reference_action(p_fold);
  f.kappa0 = tracked_pair_eigenvalue(family.at(p_fold), bp.phi1, bp.phi2);
  f.index = idx;
  return f;
}

std::vector<CurveRow> relative_action_curve(const Branch& b, const KappaFit& kfit, double A3,
                                            double A4) {
  std::vector<CurveRow> rows;
  rows.reserve(b.points.size());
  for (size_t i = 0; i < b.points.size(); ++i) {
    const auto& p = b.points[i];
    CurveRow r;
    r.parameter = p.parameter;
    r.kappa = kfit(p.parameter);
    r.dS_exact = p.S - p.S_ref;
    r.side = b.sides.empty() ? BranchSide::TowardQ : b.sides[i];
    r.is_fold = b.fold_index && static_cast<int>(i) == *b.fold_index;
    try {
      const auto [minus, plus] = delta_S_pm(r.kappa, A3, A4);
      r.dS_model = (r.side == BranchSide::FoldSide) ? plus : minus;
    } catch (const std::domain_error&) {
      r.dS_model = std::numeric_limits<double>::quiet_NaN();  // past the model fold
    }
    rows.push_back(r);
  }
  return rows;
}

void Branch::write_csv(std::ostream& os) const {
  os << "parameter,kappa_ref,S,S_ref,dS,side,is_fold\n";
  char buf[200];
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const char* side = sides.empty() || sides[i] == BranchSide::TowardQ ? "toward_q" : "fold_side";
    const int isf = (fold_index && static_cast<int>(i) == *fold_index) ? 1 : 0;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%s,%d\n", p.parameter,
                  p.kappa_ref, p.S, p.S_ref, p.S - p.S_ref, side, isf);
    os << buf;
  }
}

void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "parameter,kappa,dS_exact,dS_model,side,is_fold\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%s,%d\n", r.parameter, r.kappa,
                  r.dS_exact, r.dS_model,
                  r.side == BranchSide::TowardQ ? "toward_q" : "fold_side", r.is_fold ? 1 : 0);
    os << buf;
  }
}

namespace {

/// Try the six lattice directions at one parameter; empty result if every
/// direction collapses back to the reference family.
std::optional<SeedResult> try_seed_all_directions(FamilyCurve& family, const BifurcationPoint& bp,
                                                  double parameter, double h, bool prefer_small) {
  for (int j = 0; j < 6; ++j) {
    const double theta = std::numbers::pi / 6.0 + j * std::numbers::pi / 3.0;
    try {
      return branch_seed(family, bp, parameter, theta, h, prefer_small);
    } catch (const std::runtime_error&) {
      // collapsed; try the next direction
    }
  }
  return std::nullopt;
}

}  // namespace

FoldPipeline run_fold_pipeline(FamilyCurve& family, const BifurcationPoint& bp,
                               const PipelineOptions& opt) {
  FoldPipeline out;
  const double T_star = bp.parameter.value;
  const double dom_lo = family.parameter_min() + 1e-6;
  const double dom_hi = family.parameter_max() - 1e-6;

  // linear eigenvalue map around the crossing
  {
    const double w = 8.0 * opt.seed_offset;
    const ScanTable scan = scan_tracked(family.provider(), bp,
                                        std::max(T_star - w, dom_lo),
                                        std::min(T_star + w, dom_hi), 7);
    out.kfit = fit_kappa_linear(scan);
  }

  // seed both parameter sides; on the fold side large offsets land past the
  // fold where no branch exists, so shrink until something converges
  struct SideRun {
    bool seeded = false;
    double param = 0.0;
    SeedResult seed;
    Branch branch;
    bool has_fold = false;
  };
  std::array<SideRun, 2> runs;
  for (int si = 0; si < 2; ++si) {
    const double sgn = si == 0 ? +1.0 : -1.0;
    SideRun& run = runs[si];
    for (double shrink : {1.0, 1.0 / 3.0, 0.1, 1.0 / 30.0}) {
      const double param = T_star + sgn * opt.seed_offset * shrink;
      if (param < dom_lo || param > dom_hi) continue;
      auto seeded = try_seed_all_directions(family, bp, param, opt.h, shrink < 1.0);
      if (seeded) {
        run.seeded = true;
        run.param = param;
        run.seed = *seeded;
        break;
      }
    }
    if (!run.seeded) continue;

    BranchControls ctl;
    ctl.ds0 = opt.ds0;
    ctl.ds_max = opt.ds_max;
    ctl.max_points = opt.max_points;
    ctl.param_lo = dom_lo;
    ctl.param_hi = dom_hi;
    ctl.bif_param = T_star;
    ctl.post_fold_factor = 4.0;
    // a side that only seeded after shrinking holds the fold; let it run
    const bool shrunk = std::abs(run.param - T_star) < 0.99 * opt.seed_offset;
    ctl.kappa_budget = shrunk ? 0.0 : 5.0 * std::max(std::abs(out.kfit(run.param)), 1e-12);
    run.branch = continue_branch(run.seed.report, run.param, family, out.kfit,
                                 sgn > 0 ? +1 : -1, ctl);
    assign_fold_and_sides(run.branch);
    run.has_fold = run.branch.fold_index.has_value();
  }

  int fold_side = -1;
  for (int si = 0; si < 2; ++si)
    if (runs[si].seeded && runs[si].has_fold) fold_side = si;
  if (fold_side < 0)
    throw std::runtime_error("no parameter reversal found on either side of the bifurcation");

  out.fold_branch = std::move(runs[fold_side].branch);
  out.fold = locate_fold(out.fold_branch, family, bp);
  std::tie(out.A3_fit, out.A4_fit) = fit_A3A4(out.fold.kappa0, out.fold.deltaS0);

  const int other = 1 - fold_side;
  if (runs[other].seeded) out.away_branch = std::move(runs[other].branch);

  // exact-versus-model rows from both runs; the away run carries a single
  // sheet, classified against the fitted model
  out.curve = relative_action_curve(out.fold_branch, out.kfit, out.A3_fit, out.A4_fit);
  if (!out.away_branch.points.empty()) {
    Branch& aw = out.away_branch;
    aw.sides.assign(aw.points.size(), BranchSide::TowardQ);
    double err_tq = 0.0, err_fs = 0.0;
    int counted = 0;
    for (const auto& p : aw.points) {
      try {
        const auto [m, pl] = delta_S_pm(out.kfit(p.parameter), out.A3_fit, out.A4_fit);
        err_tq += std::abs(p.S - p.S_ref - m);
        err_fs += std::abs(p.S - p.S_ref - pl);
        ++counted;
      } catch (const std::domain_error&) {
      }
    }
    if (counted > 0 && err_fs < err_tq)
      aw.sides.assign(aw.points.size(), BranchSide::FoldSide);
    auto rows = relative_action_curve(aw, out.kfit, out.A3_fit, out.A4_fit);
    out.curve.insert(out.curve.end(), rows.begin(), rows.end());
  }
  std::sort(out.curve.begin(), out.curve.end(),
            [](const CurveRow& a, const CurveRow& b) { return a.kappa < b.kappa; });
  return out;
}

double choreography_family_fold(const Orbit& start, int direction, const BranchControls& ctl) {
  ChoreoArc arc(ParamValue::Kind::Period, start.potential, start.period(), start.modes(),
                start.samples);
  std::vector<double> params;
  bool fold_seen = false;
  double p_reversal = 0.0;
  int motion = 0;
  auto record = [&](const Orbit&, double p) {
    if (!params.empty()) {
      const int s = (p > params.back()) ? 1 : -1;
      if (motion != 0 && s != motion && !fold_seen) {
        fold_seen = true;
        p_reversal = params.back();
      }
      motion = s;
    }
    params.push_back(p);
  };
  auto stop = [&](double p, ArcRun&) {
    if (p < ctl.param_lo || p > ctl.param_hi) return true;
    return fold_seen && std::abs(p - p_reversal) > 0.1;
  };
  run_arclength(arc, arc.pack(start), start.period(), direction, ctl, record, stop);
  if (!fold_seen) throw std::runtime_error("no family fold found in the continuation window");

  // quadratic fit of the parameter against the step index around the extremum
  int idx = 0;
  for (size_t i = 1; i < params.size(); ++i)
    if (std::abs(params[i] - p_reversal) < std::abs(params[idx] - p_reversal))
      idx = static_cast<int>(i);
  const int lo_i = std::max(0, idx - 2), hi_i = std::min<int>(params.size() - 1, idx + 2);
  Eigen::MatrixXd A(hi_i - lo_i + 1, 3);
  Eigen::VectorXd y(hi_i - lo_i + 1);
  for (int i = lo_i; i <= hi_i; ++i) {
    const double x = static_cast<double>(i - idx);
    A(i - lo_i, 0) = 1.0;
    A(i - lo_i, 1) = x;
    A(i - lo_i, 2) = x * x;
    y(i - lo_i) = params[i];
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
  if (std::abs(c(2)) < 1e-300) return p_reversal;
  const double x0 = -c(1) / (2.0 * c(2));
  return c(0) + c(1) * x0 + c(2) * x0 * x0;
}

}  // namespace eightfold
