// Reference solution families: the LJ figure-eight pair, the Newtonian and
// homogeneous-exponent eights, and the y-axis-symmetric choreography born
// from the high-action LJ eight.
#pragma once

#include <map>
#include <memory>

#include "eightfold/solver.hpp"
#include "eightfold/spectrum.hpp"

namespace eightfold {

enum class FamilyKind {
  LJHigh,            // alpha_+: LJ eight, higher action; parameter T
  LJLow,             // alpha_-: LJ eight, lower action; parameter T
  Cy,                // y-symmetric choreography from alpha_+ at its pitchfork; parameter T
  NewtonianEight,    // homogeneous a = 1 eight; parameter T
  HomogeneousEight,  // figure eight at T = 2 pi; parameter a
};

struct FamilyOptions {
  int M = 64;
  int N = 512;
  double tol = 1e-10;
  double max_step = 0.25;  // largest natural-continuation stride in the parameter
};

/// A lazily extended, cached curve of solved orbits over one parameter.
/// Queries step from the nearest cached solution. Not thread safe; use one
/// instance per thread.
class FamilyCurve {
 public:
  explicit FamilyCurve(FamilyKind kind, FamilyOptions opt = {});

  FamilyKind kind() const { return kind_; }
  ParamValue::Kind parameter_kind() const;
  const FamilyOptions& options() const { return opt_; }

  /// Lowest parameter this family supports (throws below it).
  double parameter_min() const;
  double parameter_max() const;

  const Orbit& at(double param);
  double reference_action(double param);
  OrbitProvider provider();

  /// C_y only: the located pitchfork parameter on the alpha_+ family.
  double birth_parameter();

 private:
  void bootstrap(double param);
  Orbit solve_step(const Orbit& from, double param);
  void bootstrap_cy();
  double cy_amplitude(const Orbit& o) const;

  FamilyKind kind_;
  FamilyOptions opt_;
  std::map<double, Orbit> cache_;
  std::unique_ptr<FamilyCurve> parent_;  // alpha_+ for the C_y bootstrap
  double cy_birth_ = 0.0;
};

}  // namespace eightfold
