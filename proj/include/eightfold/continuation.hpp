// Pseudo-arclength continuation of bifurcated branches, fold localization,
// relative-action curves and linear eigenvalue fits.
#pragma once

#include <iosfwd>
#include <optional>

#include "eightfold/family.hpp"
#include "eightfold/ls_reduction.hpp"

namespace eightfold {

/// Least-squares line kappa(parameter) = intercept + slope * parameter.
struct KappaFit {
  double intercept = 0.0;
  double slope = 0.0;
  double operator()(double p) const { return intercept + slope * p; }
};

KappaFit fit_kappa_linear(const ScanTable& scan);

enum class BranchSide { TowardQ, FoldSide };

struct BranchPoint {
  double parameter = 0.0;
  Orbit orbit;
  double S = 0.0;
  double S_ref = 0.0;      // unbifurcated family action at the same parameter
  double kappa_ref = 0.0;  // linear-fit eigenvalue of the reference family
};

struct Branch {
  ParamValue::Kind param_kind = ParamValue::Kind::Period;
  std::vector<BranchPoint> points;  // ordered along arclength
  std::optional<int> fold_index;
  std::vector<BranchSide> sides;

  void write_csv(std::ostream& os) const;
  // columns: parameter,kappa_ref,S,S_ref,dS,side,is_fold
};

struct BranchControls {
  double h0 = 0.0;                   // seed amplitude; 0 = 1e-2 x coefficient norm
  double ds0 = 0.02;
  double ds_min = 1e-7, ds_max = 0.12;
  bool fixed_step = false;           // disable step adaptation (fold refinement)
  int max_points = 400;
  double tol = 1e-10;
  double param_lo = -1e300, param_hi = 1e300;
  // stop once a parameter reversal was seen and the run has traveled
  // post_fold_factor * |bif_param - p_reversal| + |seed_param - p_reversal|
  // beyond the reversal parameter (0 disables the rule)
  double bif_param = 0.0;
  double post_fold_factor = 0.0;
  // stop when the linear-fit eigenvalue magnitude exceeds this (0 disables)
  double kappa_budget = 0.0;
};

/// Solve for a nearby nonsymmetric orbit from q + h (cos(theta) phi1 +
/// sin(theta) phi2) at the given parameter, rejecting convergence back to the
/// reference family (retries with adjusted h; ascending amplitudes when
/// prefer_small targets the inner sheet). Throws std::runtime_error on
/// persistent collapse.
struct SeedResult {
  SolveReport report;
  double distance = 0.0;  // L2 distance from the reference orbit
  double h_used = 0.0;
};
SeedResult branch_seed(FamilyCurve& family, const BifurcationPoint& bp, double parameter,
                       double theta, double h = 0.0, bool prefer_small = false);

/// One arclength direction from a converged start; direction = sign of the
/// initial parameter velocity (+1/-1, 0 = either). A run that lands exactly
/// on the reference family (snap-through at the bifurcation parameter) is
/// truncated there.
Branch continue_branch(const SolveReport& start, double start_param, FamilyCurve& family,
                       const KappaFit& kfit, int direction, const BranchControls& ctl);

/// Both directions stitched into one ordered branch with fold index and
/// side labels assigned.
Branch continue_branch_both(const SolveReport& start, double start_param, FamilyCurve& family,
                            const KappaFit& kfit, const BranchControls& toward_fold,
                            const BranchControls& away);

/// Detect the parameter turning point of a stitched branch and label the
/// sheets; the sheet whose |dS| dips lowest approaches the reference family.
void assign_fold_and_sides(Branch& b);

struct FoldInfo {
  double parameter = 0.0;  // fold parameter from the quadratic fit
  double kappa0 = 0.0;     // reference-family eigenvalue there
  double deltaS0 = 0.0;    // S - S_ref at the fold
  int index = -1;          // nearest branch point
};

/// Quadratic fit of parameter against arclength around the turning point;
/// kappa0 is evaluated by an eigensolve of the reference family at the fold
/// parameter, tracking the bifurcation pair. Throws if there is no turning
/// point.
FoldInfo locate_fold(const Branch& b, FamilyCurve& family, const BifurcationPoint& bp);

struct CurveRow {
  double parameter = 0.0;
  double kappa = 0.0;
  double dS_exact = 0.0;
  double dS_model = 0.0;
  BranchSide side = BranchSide::TowardQ;
  bool is_fold = false;
};

/// Exact branch data next to the quartic-model prediction, both against the
/// linear kappa(parameter) map.
std::vector<CurveRow> relative_action_curve(const Branch& b, const KappaFit& kfit, double A3,
                                            double A4);
void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows);

/// Fold of a choreography family itself (parameter reversal along the family,
/// e.g. where the two LJ eights merge). Returns the extremal parameter.
double choreography_family_fold(const Orbit& start, int direction, const BranchControls& ctl);

// ---------------------------------------------------------------------------
// end-to-end fold measurement

struct PipelineOptions {
  double seed_offset = 0.01;  // parameter offset magnitude for branch seeding
  double ds0 = 0.01;
  double ds_max = 0.05;
  double h = 0.0;
  int max_points = 300;
};

/// Everything the coefficient table needs for one family: the linear
/// eigenvalue fit, the branch through the fold, the short branch on the other
/// parameter side, the measured fold and the fitted quartic model.
struct FoldPipeline {
  KappaFit kfit;
  Branch fold_branch;
  Branch away_branch;  // may be empty if the far side could not be seeded
  FoldInfo fold;
  double A3_fit = 0.0, A4_fit = 0.0;
  std::vector<CurveRow> curve;  // merged rows from both branches
};

/// Seed the bifurcated branch on both parameter sides (shrinking the offset
/// on a side that turns out to lie past the fold), follow the fold side
/// through its turning point, refine and measure the fold, fit (A3, A4) and
/// assemble the exact-versus-model curve rows.
FoldPipeline run_fold_pipeline(FamilyCurve& family, const BifurcationPoint& bp,
                               const PipelineOptions& opt = {});

}  // namespace eightfold
