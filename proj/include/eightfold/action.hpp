// Action quadrature, its exact coefficient-space gradient and Hessian.
#pragma once

#include <vector>

#include "eightfold/orbit.hpp"

namespace eightfold {

/// Grid evaluation of an orbit: positions, velocities and potential data on
/// the uniform tau grid. Throws std::domain_error if bodies get closer than
/// min_separation anywhere on the grid.
struct GridEval {
  Eigen::MatrixXd q;        // 9 x N
  Eigen::MatrixXd qdot;     // 9 x N (d/dt)
  Eigen::VectorXd U;        // N
  Eigen::MatrixXd gradU;    // 9 x N
  std::vector<Mat9> hessU;  // N entries
};

GridEval grid_eval(const Orbit& o, bool with_hessian = true, double min_separation = 1e-6);

/// S = int_0^T L dt by the uniform rectangle rule (spectrally accurate).
double action(const Orbit& o);

/// Exact gradient of the discretized action with respect to all Fourier
/// coefficients; layout matches LoopSeries (9 blocks of 2M+1).
Eigen::VectorXd action_gradient(const Orbit& o);

/// Hessian of the discretized action restricted to the given coordinate rows
/// (0..8). The kinetic part is exact; the potential part is assembled through
/// the cosine/sine transforms of hess U, preserving symmetry by construction.
Eigen::MatrixXd action_hessian(const Orbit& o, const std::vector<int>& coords);

/// Total energy |qdot|^2/2 + U on the grid; constant for converged orbits.
Eigen::VectorXd energy_samples(const Orbit& o);

}  // namespace eightfold
