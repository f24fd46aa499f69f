#include "eightfold/family.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "eightfold/action.hpp"

namespace eightfold {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

FamilyCurve::FamilyCurve(FamilyKind kind, FamilyOptions opt) : kind_(kind), opt_(opt) {}

ParamValue::Kind FamilyCurve::parameter_kind() const {
  return kind_ == FamilyKind::HomogeneousEight ? ParamValue::Kind::Exponent
                                               : ParamValue::Kind::Period;
}

double FamilyCurve::parameter_min() const {
  switch (kind_) {
    case FamilyKind::LJHigh:
    case FamilyKind::LJLow:
      return 14.55;  // the alpha pair merges at T = 14.479; stay above the fold
    case FamilyKind::Cy:
      return const_cast<FamilyCurve*>(this)->birth_parameter() + 0.008;
    case FamilyKind::NewtonianEight:
      return 1.0;
    case FamilyKind::HomogeneousEight:
      return 0.85;
  }
  return 0.0;
}

double FamilyCurve::parameter_max() const {
  switch (kind_) {
    case FamilyKind::LJHigh:
    case FamilyKind::LJLow:
      return 19.0;
    case FamilyKind::Cy:
      return 17.8;
    case FamilyKind::NewtonianEight:
      return 40.0;
    case FamilyKind::HomogeneousEight:
      return 1.15;
  }
  return 0.0;
}

Orbit FamilyCurve::solve_step(const Orbit& from, double param) {
  Orbit seed = from;
  if (parameter_kind() == ParamValue::Kind::Period) {
    seed.loop.period = param;
  } else {
    seed.potential = Potential::homogeneous(param);
  }
  GaugeOptions g;
  g.choreography = true;
  g.tol = opt_.tol;
  g.allow_refine = false;
  const SolveReport rep = solve_orbit(seed, g);
  if (!rep.converged)
    throw std::runtime_error("family continuation failed at parameter " + std::to_string(param) +
                             ": " + rep.message);
  return rep.orbit;
}

void FamilyCurve::bootstrap(double param) {
  GaugeOptions g;
  g.choreography = true;
  g.tol = opt_.tol;
  g.allow_refine = false;
  switch (kind_) {
    case FamilyKind::LJHigh:
    case FamilyKind::LJLow: {
      const auto seed_kind =
          kind_ == FamilyKind::LJHigh ? SeedKind::FigureEightLJHigh : SeedKind::FigureEightLJLow;
      const SolveReport rep =
          solve_orbit(choreography_seed(seed_kind, 16.0, opt_.M, opt_.N), g);
      if (!rep.converged) throw std::runtime_error("LJ figure-eight bootstrap failed at T = 16");
      cache_.emplace(16.0, rep.orbit);
      break;
    }
    case FamilyKind::NewtonianEight: {
      const SolveReport rep =
          solve_orbit(choreography_seed(SeedKind::FigureEightNewtonian, param, opt_.M, opt_.N), g);
      if (!rep.converged)
        throw std::runtime_error("Newtonian eight bootstrap failed at T = " + std::to_string(param));
      cache_.emplace(param, rep.orbit);
      break;
    }
    case FamilyKind::HomogeneousEight: {
      const SolveReport rep =
          solve_orbit(choreography_seed(SeedKind::FigureEightNewtonian, kTwoPi, opt_.M, opt_.N), g);
      if (!rep.converged) throw std::runtime_error("homogeneous eight bootstrap failed at a = 1");
      cache_.emplace(1.0, rep.orbit);
      break;
    }
    case FamilyKind::Cy:
      bootstrap_cy();
      break;
  }
}

double FamilyCurve::cy_amplitude(const Orbit& o) const {
  // x-reflection (with time reversal) symmetry defect of the generating
  // curve; zero on the alpha_+ family, growing along the C_y branch.
  auto syms = detect_orbit_symmetries(o, 1e300);
  double amp = 1e300;
  for (const auto& s : syms)
    if (s.sigma_type == 1 || s.sigma_type == 2) amp = std::min(amp, s.defect);
  return amp;
}

double FamilyCurve::birth_parameter() {
  if (kind_ != FamilyKind::Cy)
    throw std::logic_error("birth_parameter is only defined for the C_y family");
  if (cy_birth_ == 0.0) bootstrap_cy();
  return cy_birth_;
}

void FamilyCurve::bootstrap_cy() {
  if (!cache_.empty()) return;
  parent_ = std::make_unique<FamilyCurve>(FamilyKind::LJHigh, opt_);
  // the choreography-even crossing on alpha_+ that creates the branch
  cy_birth_ = locate_crossing_parameter(parent_->provider(), 17.05, 17.20,
                                        TrackTarget::ChoreographicSingle);
  const double T0 = cy_birth_ + 0.018;
  const Orbit base = parent_->at(T0);
  const SpectrumReport spec = eigen_spectrum(base, 16);
  // choreography-even nontrivial mode nearest zero
  const EigenPair* mode = nullptr;
  for (const auto& p : spec.pairs) {
    if (p.tag != TrivialTag::Nontrivial) continue;
    if (choreography_overlap(p.fn) < 0.9) continue;
    if (!mode || std::abs(p.value) < std::abs(mode->value)) mode = &p;
  }
  if (!mode) throw std::runtime_error("no choreography-even mode found near the C_y birth point");

  GaugeOptions g;
  g.choreography = true;
  g.tol = opt_.tol;
  g.allow_refine = false;
  const double base_amp = cy_amplitude(base);
  for (double h : {0.2, 0.1, 0.4, 0.05}) {
    Orbit seed = base;
    seed.loop.coef += h * mode->fn.coef;  // choreography-even mode, so the seed stays choreographic
    const SolveReport rep = solve_orbit(seed, g);
    if (!rep.converged) continue;
    const double amp = cy_amplitude(rep.orbit);
    const double dS = action(rep.orbit) - action(base);
    if (amp > 20.0 * std::max(base_amp, 1e-12) && std::abs(dS) > 1e-11) {
      cache_.emplace(T0, rep.orbit);
      return;
    }
  }
  throw std::runtime_error("C_y bootstrap collapsed back to the alpha_+ family");
}

const Orbit& FamilyCurve::at(double param) {
  if (cache_.empty()) bootstrap(param);
  if (param < parameter_min() || param > parameter_max())
    throw std::domain_error("parameter " + std::to_string(param) + " outside the family domain [" +
                            std::to_string(parameter_min()) + ", " +
                            std::to_string(parameter_max()) + "]");
  const double eps = 1e-12 * std::max(1.0, std::abs(param));
  auto it = cache_.lower_bound(param - eps);
  if (it != cache_.end() && std::abs(it->first - param) <= eps) return it->second;

  // nearest cached start
  auto nearest = cache_.lower_bound(param);
  if (nearest == cache_.end()) --nearest;
  if (nearest != cache_.begin()) {
    auto prev = std::prev(nearest);
    if (std::abs(prev->first - param) < std::abs(nearest->first - param)) nearest = prev;
  }
  double cur = nearest->first;
  Orbit orbit = nearest->second;
  const bool cy = kind_ == FamilyKind::Cy;
  double step_cap = cy ? 0.02 : opt_.max_step;
  double prev_amp = cy ? cy_amplitude(orbit) : 0.0;
  int guard = 0;
  while (cur != param && ++guard < 4000) {
    const double remaining = param - cur;
    const double trial =
        std::abs(remaining) <= step_cap ? param : cur + std::clamp(remaining, -step_cap, step_cap);
    Orbit next = solve_step(orbit, trial);
    if (cy) {
      const double amp = cy_amplitude(next);
      if (amp < 0.4 * prev_amp) {
        // collapsed toward the symmetric family: retry with a shorter stride
        step_cap *= 0.5;
        if (step_cap < 1e-4)
          throw std::runtime_error("C_y continuation collapsed near parameter " +
                                   std::to_string(trial));
        continue;
      }
      prev_amp = amp;
      step_cap = std::min(step_cap * 1.3, 0.02);
    }
    cur = trial;
    orbit = next;
    cache_.emplace(cur, orbit);
  }
  return cache_.find(cur)->second;
}

double FamilyCurve::reference_action(double param) { return action(at(param)); }

OrbitProvider FamilyCurve::provider() {
  return [this](double p) -> Orbit { return at(p); };
}

}  // namespace eightfold
