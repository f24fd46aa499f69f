// Acceptance suite: reproduces the tabulated bifurcation/fold results and the
// figure curves, then runs the always-on property checks. One line per
// criterion; exits nonzero if any fails.
#include <cmath>
#include <cstdarg>
#include <mutex>
#include <chrono>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "eightfold/action.hpp"
#include "eightfold/continuation.hpp"
#include "test_support.hpp"

using namespace eightfold;

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Check> g_checks;
std::mutex g_mutex;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_checks.push_back({name, pass, detail});
}

bool within(double value, double expect, double rel_tol) {
  return std::abs(value - expect) <= rel_tol * std::abs(expect);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------------
// per-family heavy pipeline

struct FamilySetup {
  FamilyKind kind;
  const char* name;
  double bracket_lo, bracket_hi;
  double scan_halfwidth;
  double seed_offset;
  double ds0, ds_max;
  // expectations
  double T_star, T_star_tol;
  double slope;
  double fold_param, fold_param_tol;
  double kappa0, deltaS0;
  double A3_fit, A4_fit, A3_integral;
};

struct FamilyResult {
  FamilySetup setup;
  BifurcationPoint bp;
  FoldPipeline pipe;
  double A3_0 = 0, A3_1 = 0, A3i = 0;
  double cy_birth = 0;
  bool ok = false;
  std::string error;
};

FamilyResult run_family(const FamilySetup& s) {
  FamilyResult res;
  res.setup = s;
  try {
    FamilyOptions fopt;  // full production resolution
    FamilyCurve family(s.kind, fopt);
    if (s.kind == FamilyKind::Cy) res.cy_birth = family.birth_parameter();

    res.bp = locate_bifurcation(family.provider(), s.bracket_lo, s.bracket_hi,
                                family.parameter_kind());

    PipelineOptions popt;
    popt.seed_offset = std::abs(s.seed_offset);
    popt.ds0 = s.ds0;
    popt.ds_max = s.ds_max;
    res.pipe = run_fold_pipeline(family, res.bp, popt);

    std::tie(res.A3_0, res.A3_1) = a3_integrals(res.bp);
    res.A3i = std::abs(a3_coefficient(res.A3_0, res.A3_1, res.bp.symmetry));
    res.ok = true;
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  return res;
}

void judge_family(const FamilyResult& r, int idx) {
  const FamilySetup& s = r.setup;
  const std::string tag = s.name;
  if (!r.ok) {
    report("criterion 2: " + tag + " pipeline", false, r.error);
    return;
  }
  // criterion 2: bifurcation point and degeneracy
  report(fmt("criterion 2: %s bifurcation point", s.name),
         std::abs(r.bp.parameter.value - s.T_star) <= s.T_star_tol && r.bp.degeneracy == 2,
         fmt("parameter %.6f (expected %.6g +- %.3g), degeneracy %d", r.bp.parameter.value,
             s.T_star, s.T_star_tol, r.bp.degeneracy));
  if (s.kind == FamilyKind::Cy)
    report("criterion 2: C_y branch born from alpha+",
           std::abs(r.cy_birth - 17.132) <= 0.01,
           fmt("pitchfork at T = %.5f (expected 17.132 +- 0.01)", r.cy_birth));

  // criterion 3: fold parameter and measured fold data
  report(fmt("criterion 3: %s fold parameter", s.name),
         std::abs(r.pipe.fold.parameter - s.fold_param) <= s.fold_param_tol,
         fmt("fold at %.6f (expected %.6g +- %.3g)", r.pipe.fold.parameter, s.fold_param,
             s.fold_param_tol));
  report(fmt("criterion 3: %s (kappa0, deltaS0)", s.name),
         within(r.pipe.fold.kappa0, s.kappa0, 0.20) && within(r.pipe.fold.deltaS0, s.deltaS0, 0.20),
         fmt("kappa0 %+.4e (expected %+.2e +- 20%%), deltaS0 %+.4e (expected %+.2e +- 20%%)",
             r.pipe.fold.kappa0, s.kappa0, r.pipe.fold.deltaS0, s.deltaS0));

  // criterion 4: coefficients
  report(fmt("criterion 4: %s A3 by integral", s.name), within(r.A3i, s.A3_integral, 0.15),
         fmt("A3 integral %.4f (expected %.3g +- 15%%)", r.A3i, s.A3_integral));
  report(fmt("criterion 4: %s fitted (A3, A4)", s.name),
         within(r.pipe.A3_fit, s.A3_fit, 0.10) && within(r.pipe.A4_fit, s.A4_fit, 0.10),
         fmt("A3 %.4f vs %.3g, A4 %.4f vs %.3g (+- 10%%)", r.pipe.A3_fit, s.A3_fit, r.pipe.A4_fit,
             s.A4_fit));
  report(fmt("criterion 4: %s fitted vs integral A3", s.name),
         std::abs(r.pipe.A3_fit - r.A3i) <= 0.20 * std::max(r.pipe.A3_fit, r.A3i),
         fmt("fit %.4f vs integral %.4f (+- 20%%)", r.pipe.A3_fit, r.A3i));

  // criterion 5: model curves track the exact branches within 20% of |dS0|
  {
    const double band = 0.20 * std::abs(r.pipe.fold.deltaS0);
    const double k0 = r.pipe.fold.kappa0;
    double worst = 0.0;
    int used = 0;
    bool covered_minus = false, covered_plus = false;
    for (const auto& row : r.pipe.curve) {
      const double lo = std::min(k0, -k0), hi = std::max(k0, -k0);
      if (row.kappa < lo || row.kappa > hi) continue;
      if (!std::isfinite(row.dS_model)) continue;
      ++used;
      worst = std::max(worst, std::abs(row.dS_exact - row.dS_model));
      if (row.side == BranchSide::TowardQ) covered_minus = true;
      if (row.side == BranchSide::FoldSide) covered_plus = true;
    }
    report(fmt("criterion 5: %s model tracks exact curves", s.name),
           used >= 8 && covered_minus && covered_plus && worst <= band,
           fmt("max |exact-model| %.3e over %d points on both sheets (band %.3e)", worst, used,
               band));
  }

  // criterion 6: linear slope
  report(fmt("criterion 6: %s kappa slope", s.name), within(r.pipe.kfit.slope, s.slope, 0.10),
         fmt("slope %+.5f (expected %+.4g +- 10%%)", r.pipe.kfit.slope, s.slope));

  // artifacts for inspection
  std::filesystem::create_directories("acceptance_artifacts");
  {
    std::ofstream f(fmt("acceptance_artifacts/branch_%d_%s.csv", idx, s.name));
    r.pipe.fold_branch.write_csv(f);
    std::ofstream c(fmt("acceptance_artifacts/curve_%d_%s.csv", idx, s.name));
    write_curve_csv(c, r.pipe.curve);
  }
}

// ---------------------------------------------------------------------------

void criterion_1() {
  try {
    GaugeOptions g;
    g.choreography = true;
    g.allow_refine = false;
    const SolveReport hi = solve_orbit(choreography_seed(SeedKind::FigureEightLJHigh, 16.0), g);
    const SolveReport lo = solve_orbit(choreography_seed(SeedKind::FigureEightLJLow, 16.0), g);
    const double S_hi = action(hi.orbit), S_lo = action(lo.orbit);
    report("criterion 1: alpha+/alpha- found at T = 16 with S(+) > S(-)",
           hi.converged && lo.converged && S_hi > S_lo && std::abs(S_hi - S_lo) > 1e-4,
           fmt("S(alpha+) = %.8f, S(alpha-) = %.8f", S_hi, S_lo));

    FamilyCurve family(FamilyKind::LJHigh, FamilyOptions{});
    BranchControls ctl;
    ctl.ds0 = 0.05;
    ctl.ds_max = 0.35;
    ctl.max_points = 200;
    ctl.param_lo = 14.0;
    ctl.param_hi = 15.6;
    const double t_min = choreography_family_fold(family.at(15.0), -1, ctl);
    report("criterion 1: alpha branches merge", std::abs(t_min - 14.479) <= 0.01,
           fmt("family fold at T = %.5f (expected 14.479 +- 0.01)", t_min));
  } catch (const std::exception& e) {
    report("criterion 1: LJ family", false, e.what());
  }
}

void criterion_7() {
  std::mt19937_64 rng(20240811);
  const Potential lj = Potential::lennard_jones();
  bool ok = true;
  std::string detail = "grad, hess and order-3/4 jets vs finite differences on 100 configurations";
  for (int trial = 0; trial < 100 && ok; ++trial) {
    const Configuration c = test::random_configuration(rng);
    const Vec9 w = test::random_direction(rng);
    const Vec9 g = grad_U(lj, c);
    if (std::abs(g.dot(w) - test::fd_dir1(lj, c, w, 1e-5)) >
        1e-7 * std::max(1.0, std::abs(g.dot(w)))) {
      ok = false;
      detail = fmt("grad mismatch on trial %d", trial);
    }
    const Mat9 h = hess_U(lj, c);
    Configuration cp = c, cm = c;
    cp.q += 1e-5 * w;
    cm.q -= 1e-5 * w;
    const Vec9 fdh = (grad_U(lj, cp) - grad_U(lj, cm)) / 2e-5;
    if ((h * w - fdh).norm() > 1e-6 * (1.0 + fdh.norm())) {
      ok = false;
      detail = fmt("hess mismatch on trial %d", trial);
    }
    const Vec9 d3[3] = {w, w, w};
    const double j3 = directional_derivative(lj, c, d3, 3);
    const double f3 = -test::fd_dir3(lj, c, w, 5e-4);
    if (std::abs(j3 - f3) > 1e-5 * std::max(1.0, std::abs(f3))) {
      ok = false;
      detail = fmt("order-3 jet mismatch on trial %d (%.3e vs %.3e)", trial, j3, f3);
    }
    Vec9 ws[4];
    for (auto& v : ws) v = test::random_direction(rng);
    const Vec9 d4[4] = {ws[0], ws[1], ws[2], ws[3]};
    const double j4 = directional_derivative(lj, c, d4, 4);
    const double f4 = -test::fd_dir4_mixed(lj, c, ws, 1.2e-3);
    if (std::abs(j4 - f4) > 1e-4 * std::max(1.0, std::abs(f4))) {
      ok = false;
      detail = fmt("order-4 jet mismatch on trial %d (%.3e vs %.3e)", trial, j4, f4);
    }
  }
  // action gradient oracle on a random loop
  {
    std::normal_distribution<double> gauss;
    Orbit o(lj, LoopSeries(7.0, 6), 64);
    for (int b = 0; b < 3; ++b) {
      o.loop.coef(3 * b + 0, 0) = 3.0 * std::cos(2 * kPi * b / 3.0);
      o.loop.coef(3 * b + 1, 0) = 3.0 * std::sin(2 * kPi * b / 3.0);
      for (int n = 1; n <= 4; ++n) {
        o.loop.coef(3 * b + 0, n) = 0.1 * gauss(rng);
        o.loop.coef(3 * b + 1, 6 + n) = 0.1 * gauss(rng);
      }
    }
    const Eigen::VectorXd grad = action_gradient(o);
    for (int trial = 0; trial < 40 && ok; ++trial) {
      const int c = std::uniform_int_distribution<int>(0, 8)(rng);
      const int i = std::uniform_int_distribution<int>(0, o.loop.nb() - 1)(rng);
      Orbit op = o, om = o;
      op.loop.coef(c, i) += 1e-6;
      om.loop.coef(c, i) -= 1e-6;
      const double fd = (action(op) - action(om)) / 2e-6;
      if (std::abs(grad(c * o.loop.nb() + i) - fd) > 1e-6 * std::max(1.0, std::abs(fd))) {
        ok = false;
        detail = fmt("action gradient mismatch at coefficient (%d, %d)", c, i);
      }
    }
  }
  report("criterion 7: derivative oracles", ok, detail);
}

void criterion_8(const FamilyResult& alpha_plus) {
  try {
    const Orbit& orbit = alpha_plus.ok
                             ? alpha_plus.bp.orbit
                             : solve_orbit(choreography_seed(SeedKind::FigureEightNewtonian,
                                                             2 * kPi),
                                           [] {
                                             GaugeOptions g;
                                             g.choreography = true;
                                             return g;
                                           }())
                                   .orbit;
    const SpectrumReport rep = eigen_spectrum(orbit, 16);
    int n_triv = 0, tagged_right = 0;
    for (const auto& p : rep.pairs)
      if (p.tag != TrivialTag::Nontrivial) {
        ++n_triv;
        if (std::abs(p.value) < 1e-6 * std::max(1.0, std::pow(2 * kPi / orbit.period(), 2)))
          ++tagged_right;
      }
    bool ortho = true;
    for (size_t i = 0; i < rep.pairs.size() && ortho; ++i)
      for (size_t j = i; j < rep.pairs.size(); ++j) {
        const double ip = rep.pairs[i].fn.l2_inner(rep.pairs[j].fn);
        if (std::abs(ip - (i == j ? 1.0 : 0.0)) > 1e-10) {
          ortho = false;
          break;
        }
      }
    bool kchk = true;
    double worst = 0.0;
    for (const auto& p : rep.pairs) {
      if (p.tag != TrivialTag::Nontrivial || std::abs(p.value) < 1e-4) continue;
      const double k = kappa_check(orbit, p.fn);
      worst = std::max(worst, std::abs(k - p.value) / std::abs(p.value));
      if (std::abs(k - p.value) > 1e-7 * std::abs(p.value)) kchk = false;
    }
    report("criterion 8: spectrum invariants", n_triv == 7 && tagged_right == 7 && ortho && kchk,
           fmt("7 trivial modes: %s, orthonormal to 1e-10: %s, kappa_check worst rel %.2e",
               n_triv == 7 ? "yes" : "no", ortho ? "yes" : "no", worst));
  } catch (const std::exception& e) {
    report("criterion 8: spectrum invariants", false, e.what());
  }
}

void criterion_9() {
  bool ok = true;
  std::string detail;
  for (auto [A3, A4] : {std::pair{0.518, -8.40}, {0.011, 0.736}, {0.036, 0.031}}) {
    const FoldPrediction f = fold_prediction(A3, A4);
    ok = ok && std::abs(f.kappa0 * 8 * A4 - 3 * A3 * A3) <= 1e-12 * std::abs(3 * A3 * A3);
    ok = ok && std::abs(f.deltaS0 * 128 * std::pow(A4, 3) - 9 * std::pow(A3, 4)) <=
                   1e-12 * 9 * std::pow(A3, 4);
    ok = ok && std::abs(2 * A4 * f.deltaS0 - f.kappa0 * f.kappa0) <= 1e-12 * f.kappa0 * f.kappa0;
    const auto fit = fit_A3A4(f.kappa0, f.deltaS0);
    ok = ok && std::abs(fit.first - A3) <= 1e-12 * A3 && std::abs(fit.second - A4) <= 1e-12 * std::abs(A4);
    const auto r = branch_radii(f.kappa0, A3, A4);
    ok = ok && r && std::abs(std::abs(r->first) - f.r0) < 1e-6 * f.r0;
  }
  // dS_minus(0) = 0 exactly
  const auto at0 = delta_S_pm(0.0, 0.518, -8.40);
  ok = ok && at0.first == 0.0;
  detail = fmt("identities to 1e-12, dS_minus(0) = %g", at0.first);

  // cusp log-log slope
  {
    const double A3 = 0.518, A4 = -8.40;
    const double k0 = 3 * A3 * A3 / (8 * A4);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double sc : {3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
      const double kappa = k0 * (1 - sc);
      const double k = 24 * (k0 - kappa) / A4;
      const auto ex = delta_S_pm(kappa, A3, A4);
      const double x = std::log(k), y = std::log(std::abs(ex.first - ex.second));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    ok = ok && std::abs(slope - 1.5) <= 0.01;
    detail += fmt(", cusp slope %.4f", slope);
  }
  // census 7/5/7
  {
    const double A3 = 0.518, A4 = -8.40;
    const double k0 = 3 * A3 * A3 / (8 * A4);
    const size_t c1 = surface_grid(A3, A4, 0.9 * k0, 0.35, 32).critical_points.size();
    const size_t c2 = surface_grid(A3, A4, 0.0, 0.35, 32).critical_points.size();
    const size_t c3 = surface_grid(A3, A4, -0.9 * k0, 0.35, 32).critical_points.size();
    ok = ok && c1 == 7 && c2 == 5 && c3 == 7;
    detail += fmt(", census %zu/%zu/%zu", c1, c2, c3);
  }
  report("criterion 9: reduced-model algebra", ok, detail);
}

void criterion_10(const FamilyResult& cy) {
  if (!cy.ok) {
    report("criterion 10: C3 gauge invariance", false, "C_y pipeline failed: " + cy.error);
    return;
  }
  try {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
    const double base = cy.A3i;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double b = angle(rng);
      LoopSeries p1 = cy.bp.phi1, p2 = cy.bp.phi2;
      p1.coef = std::cos(b) * cy.bp.phi1.coef + std::sin(b) * cy.bp.phi2.coef;
      p2.coef = -std::sin(b) * cy.bp.phi1.coef + std::cos(b) * cy.bp.phi2.coef;
      const auto [a0, a1] = a3_integrals(cy.bp.orbit, p1, p2);
      const double A3 = a3_coefficient(a0, a1, SymmetryTag::C3);
      worst = std::max(worst, std::abs(A3 - base) / base);
    }
    report("criterion 10: C3 gauge invariance of A3", worst <= 1e-6,
           fmt("A3 = %.6f, worst relative change over 20 random rotations %.2e", base, worst));
  } catch (const std::exception& e) {
    report("criterion 10: C3 gauge invariance", false, e.what());
  }
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();

  // table rows: alpha+, alpha-, C_y, homogeneous
  const FamilySetup alpha_plus{FamilyKind::LJHigh, "alpha+",
                               16.80, 16.95, 0.08, +0.010, 0.004, 0.02,
                               16.878, 0.005, -0.0199, 16.875, 0.005,
                               +6.6e-5, +3.0e-9, 0.011, 0.736, 0.011};
  const FamilySetup alpha_minus{FamilyKind::LJLow, "alpha-",
                                14.820, 14.850, 0.08, +0.010, 0.010, 0.05,
                                14.836, 0.005, +0.309, 14.797, 0.005,
                                -1.2e-2, -8.5e-6, 0.544, -8.97, 0.466};
  const FamilySetup cy{FamilyKind::Cy, "C_y",
                       17.200, 17.270, 0.06, +0.010, 0.003, 0.015,
                       17.235, 0.005, +0.0389, 17.234, 0.005,
                       -2.4e-4, -5.1e-9, 0.059, -5.49, 0.056};
  const FamilySetup homog{FamilyKind::HomogeneousEight, "homogeneous",
                          0.985, 1.005, 0.022, -0.010, 0.040, 0.20,
                          0.9966, 0.002, +0.506, 1.027, 0.010,
                          +1.5e-2, +3.8e-3, 0.036, 0.031, 0.037};

  // two worker threads carry the four family pipelines
  auto fut_ap = std::async(std::launch::async, run_family, alpha_plus);
  auto fut_hm = std::async(std::launch::async, run_family, homog);
  criterion_1();
  const FamilyResult r_ap = fut_ap.get();
  auto fut_am = std::async(std::launch::async, run_family, alpha_minus);
  const FamilyResult r_cy = run_family(cy);
  const FamilyResult r_hm = fut_hm.get();
  const FamilyResult r_am = fut_am.get();

  judge_family(r_ap, 0);
  judge_family(r_am, 1);
  judge_family(r_cy, 2);
  judge_family(r_hm, 3);

  criterion_7();
  criterion_8(r_ap);
  criterion_9();
  criterion_10(r_cy);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int failures = 0;
  std::sort(g_checks.begin(), g_checks.end(),
            [](const Check& a, const Check& b) { return a.name < b.name; });
  for (const auto& c : g_checks) {
    std::printf("%s  %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("%d/%zu acceptance checks passed in %.1f s\n", static_cast<int>(g_checks.size()) - failures,
              g_checks.size(), secs);
  return failures == 0 ? 0 : 1;
}
