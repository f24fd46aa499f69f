// Hessian operator spectrum, trivial-mode classification, eigenvalue
// tracking across parameter families and bifurcation-point location.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eightfold/orbit.hpp"

namespace eightfold {

enum class TrivialTag { Translation, Rotation, TimeShift, Nontrivial };

struct EigenPair {
  double value = 0.0;
  LoopSeries fn;  // normalized so that int_0^T phi.phi dt = 1
  TrivialTag tag = TrivialTag::Nontrivial;
};

struct SpectrumReport {
  std::vector<EigenPair> pairs;  // ascending by eigenvalue

  int trivial_count() const;
  /// Indices of nontrivial eigenpairs grouped by eigenvalue coincidence.
  std::vector<std::vector<int>> degenerate_groups(double tol = 1e-6) const;
};

/// Matrix of H = -d^2/dt^2 - hess U on T-periodic loops in the L2-normalized
/// Fourier basis, all nine coordinates; exactly symmetric by assembly.
Eigen::MatrixXd assemble_hessian(const Orbit& o);

/// Low-lying eigenpairs (the `count` of smallest magnitude, count >= 10).
/// The seven symmetry modes (translations, rotations, time shift) are
/// deflated analytically before the eigensolve, which keeps the physical
/// near-zero eigenvalue clean even while it crosses zero, and are reported
/// with their Rayleigh-quotient eigenvalues and tags.
SpectrumReport eigen_spectrum(const Orbit& o, int count);

/// kappa = int_0^T [ phidot^2 + (phi d/dq)^2 (-U) ] dt with the same
/// quadrature as the action; reproduces the eigenvalue of an eigenfunction.
double kappa_check(const Orbit& o, const LoopSeries& phi);

// ---------------------------------------------------------------------------
// orbit symmetries

/// One symmetry of a periodic orbit: q is fixed by
///   (g q)_b(tau) = sigma * q_perm[b](eps tau + delta).
struct LoopSymmetry {
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Identity();
  bool reverse = false;   // eps = -1
  double shift = 0.0;     // delta, radians of scaled time
  std::array<int, 3> perm{0, 1, 2};
  double defect = 0.0;    // relative L2 mismatch of g q vs q
  int sigma_type = 0;     // 0: reflect-y, 1: reflect-x, 2: point
};

std::vector<LoopSymmetry> detect_orbit_symmetries(const Orbit& o, double tol = 1e-7);
LoopSeries apply_symmetry(const LoopSeries& phi, const LoopSymmetry& g);

enum class SymmetryTag { D3, C3 };

struct PhiSelection {
  LoopSeries phi1, phi2;
  SymmetryTag tag = SymmetryTag::D3;
  double score1 = 0.0, score2 = 0.0;  // overlap of phi_i with its symmetry image
  bool gauge_free = false;            // C3: any orthonormal basis is as good
};

/// Rotate the orthonormal basis of a doubly degenerate eigenspace so that
/// phi2 is the symmetry-even combination under a reflection of the orbit
/// (D3), or flag the basis as gauge-free (C3).
PhiSelection select_phi2(const Orbit& o, const LoopSeries& phi_a, const LoopSeries& phi_b);

// ---------------------------------------------------------------------------
// families, scans, crossings

struct ParamValue {
  enum class Kind { Period, Exponent };
  Kind kind = Kind::Period;
  double value = 0.0;
};

struct BifurcationPoint {
  ParamValue parameter;
  Orbit orbit;
  LoopSeries phi1, phi2;
  int degeneracy = 2;
  SymmetryTag symmetry = SymmetryTag::D3;
  double kappa = 0.0;  // residual eigenvalue at the located parameter
  bool gauge_free = false;
};

using OrbitProvider = std::function<Orbit(double)>;

enum class TrackTarget {
  DegeneratePair,       // doubly degenerate nontrivial planar pair
  ChoreographicSingle,  // simple eigenvalue with a choreography-even mode
};

struct ScanRow {
  double parameter = 0.0;
  double kappa = 0.0;
  int degeneracy = 1;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  void write_csv(std::ostream& os) const;  // header: parameter,kappa,degeneracy
};

/// Track one eigenvalue (by eigenfunction overlap) across a parameter range.
/// Throws std::runtime_error naming the step if overlap falls below 0.5.
ScanTable scan_eigenvalue(const OrbitProvider& family, double from, double to, int steps,
                          TrackTarget target = TrackTarget::DegeneratePair);

/// Same scan, but tracking the specific pair of a located bifurcation point;
/// evaluation spreads outward from the bifurcation parameter so the overlap
/// chain never breaks, and rows come back ordered by parameter.
ScanTable scan_tracked(const OrbitProvider& family, const BifurcationPoint& bp, double from,
                       double to, int steps);

/// Bisection/secant on the tracked eigenvalue until |kappa| < 1e-8. Exactly
/// one tracked mode may change sign across the bracket. For DegeneratePair
/// the returned point carries the ortho-normalized degenerate pair and its
/// D3/C3 tag.
BifurcationPoint locate_bifurcation(const OrbitProvider& family, double lo, double hi,
                                    ParamValue::Kind kind,
                                    TrackTarget target = TrackTarget::DegeneratePair);

/// Parameter of the zero crossing only (used for simple, d = 1 crossings).
double locate_crossing_parameter(const OrbitProvider& family, double lo, double hi,
                                 TrackTarget target);

/// |<v, Cv>| with C the choreography shift-permute operator; ~1 for
/// choreography-even loops, ~1/2 for members of a three-fold degenerate pair.
double choreography_overlap(const LoopSeries& phi);

/// Eigenvalue of the mode pair continued (by eigenfunction overlap) from the
/// given basis onto this orbit's spectrum; the mean of the matched pair.
double tracked_pair_eigenvalue(const Orbit& o, const LoopSeries& phi1, const LoopSeries& phi2);

}  // namespace eightfold
