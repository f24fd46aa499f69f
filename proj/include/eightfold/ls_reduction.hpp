// Fourth-order reduced action in two dimensions: cubic integrals, the
// coefficient fit from fold data, branch radii, fold/cusp closed forms and
// reduced-action surface grids.
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <utility>

#include "eightfold/spectrum.hpp"

namespace eightfold {

/// Coefficients of dS = (kappa/2) r^2 + (A3/3!) r^3 sin 3theta + (A4/4!) r^4.
struct ReducedModel {
  double kappa = 0.0;
  double A3 = 0.0;  // nonnegative branch coefficient
  double A4 = 0.0;
  double A3_0 = 0.0, A3_1 = 0.0;  // raw signed cubic integrals
  SymmetryTag symmetry = SymmetryTag::D3;
};

struct FoldPrediction {
  double kappa0 = 0.0;   // 3 A3^2 / (8 A4)
  double deltaS0 = 0.0;  // 9 A3^4 / (128 A4^3)
  double r0 = 0.0;       // |3 A3 / (2 A4)|
  std::array<double, 3> theta_set{};
};

/// (A3_0, A3_1): the cubic integrals binom(3,j) int (phi1 d)^j (phi2 d)^(3-j) L dt
/// for j = 0, 1, by the action quadrature. The kinetic term is cubic-free, so
/// the integrand is the pure potential directional derivative.
std::pair<double, double> a3_integrals(const Orbit& o, const LoopSeries& phi1,
                                       const LoopSeries& phi2);
std::pair<double, double> a3_integrals(const BifurcationPoint& bp);

/// D3: A3_0 itself. C3: sqrt((A3_1)^2 + (3 A3_0)^2) / 3, basis invariant.
double a3_coefficient(double A3_0, double A3_1, SymmetryTag tag);

/// Solve kappa0 = 3 A3^2/(8 A4), dS0 = 9 A3^4/(128 A4^3) for (A3 >= 0, A4):
/// A4 = kappa0^2/(2 dS0), A3 = sqrt(8 kappa0 A4 / 3). Signs must satisfy
/// kappa0 * dS0 > 0, otherwise std::domain_error.
std::pair<double, double> fit_A3A4(double kappa0, double deltaS0);

FoldPrediction fold_prediction(double A3, double A4);

/// r_pm(kappa) = (|3A3/A4| pm sqrt((3A3/A4)^2 - 24 kappa/A4)) / 2, or empty
/// past the fold; first <= second, and the first may be negative beyond the
/// bifurcation point.
std::optional<std::pair<double, double>> branch_radii(double kappa, double A3, double A4);

/// Relative actions on the two solution branches at this kappa.
std::pair<double, double> delta_S_pm(double kappa, double A3, double A4);

/// The cusp form in k = 24 (kappa0 - kappa)/A4 (requires k >= 0); agrees with
/// delta_S_pm up to roundoff since the sqrt(k) coefficient vanishes.
std::pair<double, double> cusp_expansion(double kappa, double A3, double A4);

struct SurfaceGrid {
  double A3 = 0.0, A4 = 0.0, kappa = 0.0, extent = 0.0;
  int resolution = 0;
  Eigen::MatrixXd dS;  // dS(i, j) at r1 = grid(j), r2 = grid(i)

  struct CriticalPoint {
    enum class Kind { Center, Bifurcation, Fold };
    Kind kind;
    double r1 = 0.0, r2 = 0.0;
  };
  std::vector<CriticalPoint> critical_points;  // deduplicated within each kind

  double grid_value(int idx) const { return -extent + 2.0 * extent * idx / (resolution - 1); }
  void write_csv(std::ostream& os) const;  // header with A3, A4, kappa; rows r1,r2,dS
};

SurfaceGrid surface_grid(double A3, double A4, double kappa, double extent, int resolution);

/// r0 and the |3A3/(2A4)| << 1 advisory flag.
std::pair<double, bool> fold_condition(double A3, double A4, double threshold = 0.5);

/// First term of the quartic coefficient, int (phi2 d)^4 L dt. The eigenmode
/// sum that completes A4 is not computed here; this value alone is a partial
/// diagnostic, never a substitute for fit_A3A4.
double a4_first_term(const Orbit& o, const LoopSeries& phi2);

}  // namespace eightfold
