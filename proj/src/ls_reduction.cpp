#include "eightfold/ls_reduction.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace eightfold {

namespace {
constexpr double kPi = std::numbers::pi;

double cubic_quadrature(const Orbit& o, const LoopSeries& pa, const LoopSeries& pb,
                        const LoopSeries& pc) {
  const int N = o.samples;
  const Eigen::MatrixXd q = o.loop.sample_grid(N);
  const Eigen::MatrixXd fa = pa.sample_grid(N), fb = pb.sample_grid(N), fc = pc.sample_grid(N);
  const double w = o.period() / N;
  double acc = 0.0;
  Configuration conf;
  for (int k = 0; k < N; ++k) {
    conf.q = q.col(k);
    const Vec9 dirs[3] = {fa.col(k), fb.col(k), fc.col(k)};
    acc += directional_derivative(o.potential, conf, dirs, 3);
  }
  return w * acc;
}

}  // namespace

std::pair<double, double> a3_integrals(const Orbit& o, const LoopSeries& phi1,
                                       const LoopSeries& phi2) {
  const double a3_0 = cubic_quadrature(o, phi2, phi2, phi2);
  const double a3_1 = 3.0 * cubic_quadrature(o, phi1, phi2, phi2);
  return {a3_0, a3_1};
}

std::pair<double, double> a3_integrals(const BifurcationPoint& bp) {
  return a3_integrals(bp.orbit, bp.phi1, bp.phi2);
}

double a3_coefficient(double A3_0, double A3_1, SymmetryTag tag) {
  if (tag == SymmetryTag::D3) return A3_0;
  return std::sqrt(A3_1 * A3_1 + 9.0 * A3_0 * A3_0) / 3.0;
}

std::pair<double, double> fit_A3A4(double kappa0, double deltaS0) {
  if (deltaS0 == 0.0) throw std::domain_error("fit_A3A4: deltaS0 must be nonzero");
  if (kappa0 * deltaS0 <= 0.0)
    throw std::domain_error("fit_A3A4: kappa0 and deltaS0 must carry the same sign");
  const double A4 = kappa0 * kappa0 / (2.0 * deltaS0);
  const double A3 = std::sqrt(8.0 * kappa0 * A4 / 3.0);
  return {A3, A4};
}

FoldPrediction fold_prediction(double A3, double A4) {
  if (A3 == 0.0 || A4 == 0.0) throw std::domain_error("fold_prediction needs A3 != 0 and A4 != 0");
  FoldPrediction f;
  f.kappa0 = 3.0 * A3 * A3 / (8.0 * A4);
  f.deltaS0 = 9.0 * std::pow(A3, 4) / (128.0 * std::pow(A4, 3));
  f.r0 = std::abs(3.0 * A3 / (2.0 * A4));
  for (int n = 1; n <= 3; ++n)
    f.theta_set[n - 1] = (A3 * A4 < 0.0) ? kPi / 6.0 + 2.0 * n * kPi / 3.0
                                         : kPi / 6.0 + (2.0 * n + 1.0) * kPi / 3.0;
  return f;
}

std::optional<std::pair<double, double>> branch_radii(double kappa, double A3, double A4) {
  const double rho = std::abs(3.0 * A3 / A4);
  const double disc = rho * rho - 24.0 * kappa / A4;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  return std::make_pair(0.5 * (rho - s), 0.5 * (rho + s));
}

namespace {
double dS_at(double kappa, double A3, double A4, double r) {
  const double sgn = A4 > 0 ? 1.0 : -1.0;
  return 0.5 * kappa * r * r - std::abs(A3) / 6.0 * sgn * r * r * r + A4 / 24.0 * std::pow(r, 4);
}
}  // namespace

std::pair<double, double> delta_S_pm(double kappa, double A3, double A4) {
  const auto radii = branch_radii(kappa, A3, A4);
  if (!radii) throw std::domain_error("delta_S_pm: kappa is past the fold, no branches exist");
  return {dS_at(kappa, A3, A4, radii->first), dS_at(kappa, A3, A4, radii->second)};
}

std::pair<double, double> cusp_expansion(double kappa, double A3, double A4) {
  const double kappa0 = 3.0 * A3 * A3 / (8.0 * A4);
  const double k = 24.0 * (kappa0 - kappa) / A4;
  if (k < 0.0) throw std::domain_error("cusp_expansion: k = 24 (kappa0 - kappa)/A4 must be >= 0");
  const double sgn = A4 > 0 ? 1.0 : -1.0;
  const double odd = std::abs(A3) / 48.0 * sgn * std::pow(k, 1.5);
  const double smooth =
      A4 / 64.0 *
      (9.0 * std::pow(A3, 4) / (2.0 * std::pow(A4, 4)) - 3.0 * A3 * A3 / (A4 * A4) * k - k * k / 6.0);
  return {odd + smooth, -odd + smooth};
}

SurfaceGrid surface_grid(double A3, double A4, double kappa, double extent, int resolution) {
  if (resolution < 16) throw std::invalid_argument("surface_grid needs resolution >= 16");
  if (!(extent > 0.0)) throw std::invalid_argument("surface_grid needs a positive extent");
  SurfaceGrid g;
  g.A3 = A3;
  g.A4 = A4;
  g.kappa = kappa;
  g.extent = extent;
  g.resolution = resolution;
  g.dS.resize(resolution, resolution);
  for (int i = 0; i < resolution; ++i) {
    const double r2 = g.grid_value(i);
    for (int j = 0; j < resolution; ++j) {
      const double r1 = g.grid_value(j);
      const double r = std::hypot(r1, r2);
      const double s3 = (r > 0) ? (3.0 * r1 * r1 * r2 - r2 * r2 * r2) / (r * r * r) : 0.0;
      g.dS(i, j) = 0.5 * kappa * r * r + A3 / 6.0 * r * r * r * s3 + A4 / 24.0 * std::pow(r, 4);
    }
  }

  using CP = SurfaceGrid::CriticalPoint;
  g.critical_points.push_back({CP::Kind::Center, 0.0, 0.0});
  const auto radii = branch_radii(kappa, std::abs(A3), A4);
  if (radii) {
    const FoldPrediction fp = fold_prediction(A3 == 0.0 ? 1.0 : A3, A4);  // theta set only
    auto add_triple = [&](double r, CP::Kind kind) {
      std::vector<CP> fresh;
      for (double th : fp.theta_set) {
        CP p{kind, r * std::cos(th), r * std::sin(th)};
        bool dup = false;
        for (const auto& q : fresh)
          if (std::hypot(p.r1 - q.r1, p.r2 - q.r2) < 1e-12 * (1.0 + std::abs(r))) dup = true;
        if (!dup) fresh.push_back(p);
      }
      g.critical_points.insert(g.critical_points.end(), fresh.begin(), fresh.end());
    };
    add_triple(radii->first, CP::Kind::Bifurcation);
    add_triple(radii->second, CP::Kind::Fold);
  }
  return g;
}

void SurfaceGrid::write_csv(std::ostream& os) const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# A3=%.17g A4=%.17g kappa=%.17g\n", A3, A4, kappa);
  os << buf << "r1,r2,dS\n";
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid_value(j), grid_value(i), dS(i, j));
      os << buf;
    }
}

std::pair<double, bool> fold_condition(double A3, double A4, double threshold) {
  if (A4 == 0.0) throw std::domain_error("fold_condition needs A4 != 0");
  const double r0 = std::abs(3.0 * A3 / (2.0 * A4));
  return {r0, r0 < threshold};
}

double a4_first_term(const Orbit& o, const LoopSeries& phi2) {
  const int N = o.samples;
  const Eigen::MatrixXd q = o.loop.sample_grid(N);
  const Eigen::MatrixXd f = phi2.sample_grid(N);
  const double w = o.period() / N;
  double acc = 0.0;
  Configuration conf;
  for (int k = 0; k < N; ++k) {
    conf.q = q.col(k);
    const Vec9 fk = f.col(k);
    const Vec9 dirs[4] = {fk, fk, fk, fk};
    acc += directional_derivative(o.potential, conf, dirs, 4);
  }
  return w * acc;
}

}  // namespace eightfold
