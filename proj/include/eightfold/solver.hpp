// Newton solver for the Euler-Lagrange equations in coefficient space.
#pragma once

#include <string>

#include "eightfold/orbit.hpp"

namespace eightfold {

struct GaugeOptions {
  bool choreography = false;     // solve in the reduced single-curve space
  double tol = 1e-10;            // gradient norm target
  int max_iter = 60;
  double min_separation = 1e-3;  // collision guard on the grid
  bool allow_refine = true;      // double (M, N) when the tail-mass check fails
};

struct SolveReport {
  Orbit orbit;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Newton iteration on action_gradient = 0 with gauge constraints removing
/// the trivial kernel: centre of mass per axis and mode, one time-phase
/// anchor, one in-plane rotation anchor (Lagrange multipliers). Divergence
/// or collisions yield a non-converged report, not an exception. The solver
/// works in the plane; z coefficient rows must be zero and stay zero.
SolveReport solve_orbit(const Orbit& seed, const GaugeOptions& opt = {});

}  // namespace eightfold
