#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "eightfold/ls_reduction.hpp"

using namespace eightfold;

namespace {
constexpr double kPi = std::numbers::pi;

double poly_grad_norm(double A3, double A4, double kappa, double r1, double r2) {
  const double r2n = r1 * r1 + r2 * r2;
  const double g1 = kappa * r1 + A3 * r1 * r2 + A4 / 6.0 * r2n * r1;
  const double g2 = kappa * r2 + A3 / 2.0 * (r1 * r1 - r2 * r2) + A4 / 6.0 * r2n * r2;
  return std::hypot(g1, g2);
}
}  // namespace

TEST_CASE("fit_A3A4: closed form against the tabulated fold data") {
  {
    const auto [A3, A4] = fit_A3A4(6.6e-5, 3.0e-9);
    // closed form from the rounded inputs
    CHECK(A4 == doctest::Approx(6.6e-5 * 6.6e-5 / (2.0 * 3.0e-9)).epsilon(1e-14));
    CHECK(A3 == doctest::Approx(std::sqrt(8.0 * 6.6e-5 * A4 / 3.0)).epsilon(1e-14));
    // and against the published coefficients
    CHECK(A3 == doctest::Approx(0.011).epsilon(0.03));
    CHECK(A4 == doctest::Approx(0.736).epsilon(0.02));
  }
  {
    const auto [A3, A4] = fit_A3A4(-1.2e-2, -8.5e-6);
    CHECK(A3 == doctest::Approx(0.544).epsilon(0.08));
    CHECK(A4 == doctest::Approx(-8.97).epsilon(0.08));
  }
  CHECK_THROWS_AS(fit_A3A4(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(fit_A3A4(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(fit_A3A4(1.0, 0.0), std::domain_error);
}

TEST_CASE("algebraic identities hold to 1e-12") {
  for (auto [A3, A4] : {std::pair{0.518, -8.40}, {0.011, 0.736}, {0.036, 0.031}}) {
    const FoldPrediction f = fold_prediction(A3, A4);
    CHECK(f.kappa0 * 8.0 * A4 == doctest::Approx(3.0 * A3 * A3).epsilon(1e-12));
    CHECK(f.deltaS0 * 128.0 * std::pow(A4, 3) ==
          doctest::Approx(9.0 * std::pow(A3, 4)).epsilon(1e-12));
    CHECK(2.0 * A4 * f.deltaS0 == doctest::Approx(f.kappa0 * f.kappa0).epsilon(1e-12));

    // r0 equals both radii at the fold
    const auto radii = branch_radii(f.kappa0, A3, A4);
    REQUIRE(radii.has_value());
    CHECK(std::abs(radii->first) == doctest::Approx(f.r0).epsilon(1e-6));
    CHECK(std::abs(radii->second) == doctest::Approx(f.r0).epsilon(1e-6));

    // fit round trip
    const auto [A3b, A4b] = fit_A3A4(f.kappa0, f.deltaS0);
    CHECK(A3b == doctest::Approx(A3).epsilon(1e-12));
    CHECK(A4b == doctest::Approx(A4).epsilon(1e-12));
  }
}

TEST_CASE("fold_prediction: published radii and theta sets") {
  CHECK(fold_prediction(0.011, 0.736).r0 == doctest::Approx(0.023).epsilon(0.05));
  CHECK(fold_prediction(0.544, -8.97).r0 == doctest::Approx(0.091).epsilon(0.01));

  const FoldPrediction f = fold_prediction(0.518, -8.40);  // A3 A4 < 0
  // the n = 1, 2, 3 set is {pi/6, 5 pi/6, 3 pi/2} modulo 2 pi
  for (double th : f.theta_set) {
    const double m = std::fmod(th, 2.0 * kPi);
    const bool match = std::abs(m - kPi / 6.0) < 1e-9 || std::abs(m - 5.0 * kPi / 6.0) < 1e-9 ||
                       std::abs(m - 3.0 * kPi / 2.0) < 1e-9;
    CHECK(match);
  }
  // flipping the sign of A3 A4 flips the set
  const FoldPrediction g = fold_prediction(0.518, 8.40);
  for (double th : g.theta_set) {
    const double m = std::fmod(th, 2.0 * kPi);
    const bool match = std::abs(m - kPi / 2.0) < 1e-9 || std::abs(m - 7.0 * kPi / 6.0) < 1e-9 ||
                       std::abs(m - 11.0 * kPi / 6.0) < 1e-9;
    CHECK(match);
  }
}

TEST_CASE("branch_radii: zero crossing, fold coincidence, past-fold emptiness") {
  const double A3 = 0.518, A4 = -8.40;
  const auto at0 = branch_radii(0.0, A3, A4);
  REQUIRE(at0.has_value());
  CHECK(at0->first == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(at0->second == doctest::Approx(std::abs(3.0 * A3 / A4)).epsilon(1e-14));

  const double k0 = 3.0 * A3 * A3 / (8.0 * A4);
  const auto atf = branch_radii(k0, A3, A4);
  REQUIRE(atf.has_value());
  CHECK(atf->first == doctest::Approx(atf->second).epsilon(1e-7));

  CHECK_FALSE(branch_radii(1.1 * k0, A3, A4).has_value());  // past the fold (A4 < 0)
  CHECK(branch_radii(-2.0 * k0, A3, A4).has_value());       // other side exists
  CHECK(branch_radii(-2.0 * k0, A3, A4)->first < 0.0);      // negative r: opposite directions
}

TEST_CASE("delta_S_pm: endpoint values") {
  const double A3 = 0.518, A4 = -8.40;
  const auto [m0, p0] = delta_S_pm(0.0, A3, A4);
  CHECK(m0 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p0 == doctest::Approx(-9.0 * std::pow(A3, 4) / (8.0 * std::pow(A4, 3))).epsilon(1e-12));

  const FoldPrediction f = fold_prediction(A3, A4);
  const auto [mf, pf] = delta_S_pm(f.kappa0, A3, A4);
  CHECK(mf == doctest::Approx(f.deltaS0).epsilon(1e-6));
  CHECK(pf == doctest::Approx(f.deltaS0).epsilon(1e-6));

  CHECK_THROWS_AS(delta_S_pm(1.1 * f.kappa0, A3, A4), std::domain_error);
}

TEST_CASE("cusp_expansion: tip value, agreement order, 3/2-power law") {
  const double A3 = 0.518, A4 = -8.40;
  const FoldPrediction f = fold_prediction(A3, A4);
  const auto [cm, cp] = cusp_expansion(f.kappa0, A3, A4);
  CHECK(cm == doctest::Approx(f.deltaS0).epsilon(1e-12));
  CHECK(cp == doctest::Approx(f.deltaS0).epsilon(1e-12));
  CHECK_THROWS_AS(cusp_expansion(2.0 * f.kappa0, A3, A4), std::domain_error);

  // |cusp - exact| / k^(5/2) stays bounded as k -> 0 (here: machine level,
  // since the sqrt(k) coefficient vanishes identically)
  for (double scale : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    const double kappa = f.kappa0 * (1.0 - scale);
    const double k = 24.0 * (f.kappa0 - kappa) / A4;
    const auto ex = delta_S_pm(kappa, A3, A4);
    const auto cu = cusp_expansion(kappa, A3, A4);
    const double resid = std::max(std::abs(ex.first - cu.first), std::abs(ex.second - cu.second));
    CHECK(resid / std::pow(k, 2.5) < 1.0);
  }

  // branch difference log-log slope = 1.5 +- 0.01
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (double scale : {3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
    const double kappa = f.kappa0 * (1.0 - scale);
    const double k = 24.0 * (f.kappa0 - kappa) / A4;
    const auto ex = delta_S_pm(kappa, A3, A4);
    const double diff = std::abs(ex.first - ex.second);
    const double x = std::log(k), y = std::log(diff);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(1.5).epsilon(0.0067));
}

TEST_CASE("surface_grid: critical point census 7/5/7 and stationarity") {
  const double A3 = 0.518, A4 = -8.40;
  const double k0 = 3.0 * A3 * A3 / (8.0 * A4);
  const double extent = 0.35;

  auto census = [&](double kappa) {
    const SurfaceGrid g = surface_grid(A3, A4, kappa, extent, 32);
    for (const auto& c : g.critical_points)
      CHECK(poly_grad_norm(A3, A4, kappa, c.r1, c.r2) < 1e-10);
    return g.critical_points.size();
  };
  CHECK(census(0.9 * k0) == 7);
  CHECK(census(0.0) == 5);
  CHECK(census(-0.9 * k0) == 7);

  // sampled values match the formula on a few nodes
  const SurfaceGrid g = surface_grid(A3, A4, 0.9 * k0, extent, 32);
  for (int i : {0, 7, 19})
    for (int j : {3, 16, 31}) {
      const double r1 = g.grid_value(j), r2 = g.grid_value(i);
      const double r = std::hypot(r1, r2);
      const double s3 = r > 0 ? (3 * r1 * r1 * r2 - r2 * r2 * r2) / (r * r * r) : 0.0;
      const double want = 0.5 * g.kappa * r * r + A3 / 6.0 * r * r * r * s3 +
                          A4 / 24.0 * r * r * r * r;
      CHECK(g.dS(i, j) == doctest::Approx(want).epsilon(1e-14));
    }
  CHECK_THROWS_AS(surface_grid(A3, A4, 0.0, extent, 8), std::invalid_argument);
}

TEST_CASE("a3_coefficient branch formula") {
  CHECK(a3_coefficient(0.011, 0.5, SymmetryTag::D3) == doctest::Approx(0.011));
  CHECK(a3_coefficient(-0.25, 0.0, SymmetryTag::C3) == doctest::Approx(0.25));
  CHECK(a3_coefficient(0.3, 0.4, SymmetryTag::C3) ==
        doctest::Approx(std::sqrt(0.16 + 9 * 0.09) / 3.0).epsilon(1e-14));
}

TEST_CASE("fold_condition: tabulated rows and the degenerate case") {
  CHECK(fold_condition(0.011, 0.736).second);
  CHECK(fold_condition(0.544, -8.97).second);
  CHECK(fold_condition(0.059, -5.49).second);
  CHECK_FALSE(fold_condition(0.036, 0.031).second);  // r0 = 1.74 > 1
  CHECK(fold_condition(0.036, 0.031).first == doctest::Approx(1.719).epsilon(0.02));
  const auto [r0, ok] = fold_condition(0.0, 2.0);
  CHECK(r0 == 0.0);
  CHECK(ok);
}
