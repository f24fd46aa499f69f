#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "eightfold/action.hpp"
#include "eightfold/continuation.hpp"

using namespace eightfold;

TEST_CASE("fit_kappa_linear: exact recovery and degenerate abscissae") {
  ScanTable scan;
  for (double p : {1.0, 1.5, 2.0, 2.5, 3.0}) scan.rows.push_back({p, -0.75 + 0.31 * p, 2});
  const KappaFit f = fit_kappa_linear(scan);
  CHECK(f.slope == doctest::Approx(0.31).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-0.75).epsilon(1e-12));

  ScanTable degenerate;
  for (int i = 0; i < 4; ++i) degenerate.rows.push_back({2.0, 0.1 * i, 2});
  CHECK_THROWS_AS(fit_kappa_linear(degenerate), std::invalid_argument);

  ScanTable tiny;
  tiny.rows.push_back({1.0, 0.0, 2});
  CHECK_THROWS_AS(fit_kappa_linear(tiny), std::invalid_argument);
}

TEST_CASE("scan CSV format") {
  ScanTable scan;
  scan.rows.push_back({16.5, 0.00894, 2});
  std::ostringstream os;
  scan.write_csv(os);
  CHECK(os.str().rfind("parameter,kappa,degeneracy\n", 0) == 0);
  CHECK(os.str().find("16.5,") != std::string::npos);
}

TEST_CASE("LJ eight family folds near T = 14.479" * doctest::timeout(600)) {
  FamilyOptions fopt;
  fopt.M = 48;
  fopt.N = 384;
  FamilyCurve family(FamilyKind::LJHigh, fopt);
  const Orbit start = family.at(15.0);
  BranchControls ctl;
  ctl.ds0 = 0.05;
  ctl.ds_max = 0.35;
  ctl.max_points = 200;
  ctl.param_lo = 14.0;
  ctl.param_hi = 15.6;
  const double t_min = choreography_family_fold(start, -1, ctl);
  CHECK(t_min == doctest::Approx(14.479).epsilon(7e-4));
}

TEST_CASE("branch_seed: three-fold branch off the homogeneous eight" * doctest::timeout(600)) {
  FamilyOptions fopt;
  fopt.M = 48;
  fopt.N = 384;
  FamilyCurve family(FamilyKind::HomogeneousEight, fopt);
  const BifurcationPoint bp =
      locate_bifurcation(family.provider(), 0.985, 1.005, ParamValue::Kind::Exponent);

  // a seed slightly past the crossing lands on a distinct orbit
  bool found = false;
  for (int j = 0; j < 6 && !found; ++j) {
    const double theta = std::numbers::pi / 6.0 + j * std::numbers::pi / 3.0;
    try {
      const SeedResult seed = branch_seed(family, bp, bp.parameter.value + 0.01, theta);
      CHECK(seed.report.converged);
      CHECK(seed.distance > seed.h_used / 10.0);
      CHECK(std::abs(action(seed.report.orbit) - family.reference_action(bp.parameter.value + 0.01)) >
            1e-10);
      found = true;
    } catch (const std::runtime_error&) {
      // this direction collapsed; try the next one
    }
  }
  CHECK(found);
}
