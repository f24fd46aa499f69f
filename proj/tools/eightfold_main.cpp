// Command-line front end: solve orbits, scan spectra, locate bifurcations,
// follow branches to their folds and emit figure data.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "eightfold/action.hpp"
#include "eightfold/config.hpp"
#include "eightfold/continuation.hpp"

using namespace eightfold;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

FamilyKind family_kind(const std::string& name) {
  if (name == "lj-high") return FamilyKind::LJHigh;
  if (name == "lj-low") return FamilyKind::LJLow;
  if (name == "cy") return FamilyKind::Cy;
  if (name == "newtonian-eight") return FamilyKind::NewtonianEight;
  if (name == "homogeneous-eight") return FamilyKind::HomogeneousEight;
  throw CLI::ValidationError("--family",
                             "unknown family '" + name +
                                 "' (expected lj-high, lj-low, cy, newtonian-eight or "
                                 "homogeneous-eight)");
}

FamilyOptions family_options(const RunConfig& cfg) {
  FamilyOptions o;
  o.M = cfg.modes;
  o.N = cfg.samples;
  o.tol = cfg.tol;
  return o;
}

double family_parameter(const RunConfig& cfg, FamilyKind kind) {
  return kind == FamilyKind::HomogeneousEight ? cfg.exponent : cfg.period;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void check_family_domain(const RunConfig& cfg, FamilyKind kind) {
  const double p = family_parameter(cfg, kind);
  double lo, hi;
  switch (kind) {  // static bounds; avoids bootstrapping just to reject
    case FamilyKind::LJHigh:
    case FamilyKind::LJLow:
      lo = 14.55;
      hi = 19.0;
      break;
    case FamilyKind::Cy:
      lo = 17.145;
      hi = 17.8;
      break;
    case FamilyKind::NewtonianEight:
      lo = 1.0;
      hi = 40.0;
      break;
    case FamilyKind::HomogeneousEight:
      lo = 0.85;
      hi = 1.15;
      break;
  }
  if (p < lo || p > hi)
    throw CLI::ValidationError("--period/--exponent",
                               "parameter " + std::to_string(p) + " outside the " + cfg.family +
                                   " family range [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]");
}

nlohmann::json bp_to_json(const BifurcationPoint& bp) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["parameter"] = {{"kind", bp.parameter.kind == ParamValue::Kind::Period ? "period" : "exponent"},
                    {"value", bp.parameter.value}};
  j["kappa"] = bp.kappa;
  j["degeneracy"] = bp.degeneracy;
  j["symmetry"] = bp.symmetry == SymmetryTag::D3 ? "D3" : "C3";
  j["gauge_free"] = bp.gauge_free;
  j["orbit"] = nlohmann::json::parse(orbit_to_json(bp.orbit));
  auto loop_rows = [](const LoopSeries& l) {
    nlohmann::json rows = nlohmann::json::array();
    for (int c = 0; c < 9; ++c) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 0; i < l.nb(); ++i) row.push_back(l.coef(c, i));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["phi1"] = loop_rows(bp.phi1);
  j["phi2"] = loop_rows(bp.phi2);
  return j;
}

BifurcationPoint bp_from_json(const nlohmann::json& j) {
  BifurcationPoint bp;
  bp.parameter.kind = j.at("parameter").at("kind").get<std::string>() == "period"
                          ? ParamValue::Kind::Period
                          : ParamValue::Kind::Exponent;
  bp.parameter.value = j.at("parameter").at("value").get<double>();
  bp.kappa = j.at("kappa").get<double>();
  bp.degeneracy = j.at("degeneracy").get<int>();
  bp.symmetry = j.at("symmetry").get<std::string>() == "D3" ? SymmetryTag::D3 : SymmetryTag::C3;
  bp.gauge_free = j.at("gauge_free").get<bool>();
  bp.orbit = orbit_from_json(j.at("orbit").dump());
  auto loop_from = [&](const char* key) {
    LoopSeries l(bp.orbit.period(), bp.orbit.modes());
    const auto& rows = j.at(key);
    for (int c = 0; c < 9; ++c)
      for (int i = 0; i < l.nb(); ++i) l.coef(c, i) = rows.at(c).at(i).get<double>();
    return l;
  };
  bp.phi1 = loop_from("phi1");
  bp.phi2 = loop_from("phi2");
  return bp;
}

BifurcationPoint load_bp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return bp_from_json(nlohmann::json::parse(ss.str()));
}

struct BranchSetup {
  double seed_offset;
  double ds0;
  double ds_max;
};

BranchSetup branch_setup(const RunConfig& cfg, FamilyKind kind) {
  BranchSetup s{0.01, 0.01, 0.05};
  switch (kind) {
    case FamilyKind::LJHigh: s = {+0.010, 0.004, 0.02}; break;
    case FamilyKind::LJLow: s = {+0.010, 0.010, 0.05}; break;
    case FamilyKind::Cy: s = {+0.010, 0.003, 0.015}; break;
    case FamilyKind::HomogeneousEight: s = {-0.010, 0.040, 0.20}; break;
    case FamilyKind::NewtonianEight: break;
  }
  if (cfg.seed_offset != 0.0) s.seed_offset = cfg.seed_offset;
  if (cfg.ds != 0.0) {
    s.ds0 = cfg.ds;
    s.ds_max = 5.0 * cfg.ds;
  }
  return s;
}

FoldPipeline run_branch_pipeline(const RunConfig& cfg, FamilyKind kind,
                                 const BifurcationPoint& bp) {
  FamilyCurve family(kind, family_options(cfg));
  const BranchSetup setup = branch_setup(cfg, kind);
  PipelineOptions popt;
  popt.seed_offset = std::abs(setup.seed_offset);
  popt.ds0 = setup.ds0;
  popt.ds_max = setup.ds_max;
  popt.h = cfg.h;
  return run_fold_pipeline(family, bp, popt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eightfold: periodic three-body choreographies, their Hessian spectra,\n"
               "three-fold bifurcations and branch folds"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its fields")
      ->check(CLI::ExistingFile);

  // shared overrides
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--modes", cfg.modes, "Fourier modes M");
    cmd->add_option("--samples", cfg.samples, "time grid size N");
    cmd->add_option("--tol", cfg.tol, "solver tolerance");
    cmd->add_option("--output-dir", cfg.output_dir, "directory for output files");
    cmd->add_option("--rng-seed", cfg.rng_seed, "seed for randomized checks");
  };

  auto* find = app.add_subcommand("find", "solve one family member and write the orbit file");
  find->add_option("--family", cfg.family, "family name")->required();
  find->add_option("--period", cfg.period, "orbit period T");
  find->add_option("--exponent", cfg.exponent, "homogeneous exponent a");
  add_common(find);

  auto* scan = app.add_subcommand("scan", "track the bifurcating eigenvalue across a range");
  scan->add_option("--family", cfg.family)->required();
  scan->add_option("--from", cfg.scan_from)->required();
  scan->add_option("--to", cfg.scan_to)->required();
  scan->add_option("--steps", cfg.scan_steps);
  add_common(scan);

  auto* locate = app.add_subcommand("locate", "find a three-fold bifurcation point in a bracket");
  locate->add_option("--family", cfg.family)->required();
  locate->add_option("--bracket", [&cfg](const std::vector<std::string>& vals) {
    if (vals.size() != 2) return false;
    cfg.bracket_lo = std::stod(vals[0]);
    cfg.bracket_hi = std::stod(vals[1]);
    return true;
  }, "bracket lo hi")->expected(2)->required();
  add_common(locate);

  std::string bp_path, branch_path;
  bool dump_orbits = false;
  auto* branch = app.add_subcommand("branch", "follow the bifurcated branch through its fold");
  branch->add_option("--bifurcation", bp_path, "bifurcation point file from `locate`")
      ->required()
      ->check(CLI::ExistingFile);
  branch->add_option("--family", cfg.family, "family of the reference solution")->required();
  branch->add_option("--seed-amplitude", cfg.h, "seed amplitude (0: auto)");
  branch->add_option("--ds", cfg.ds, "arclength step (0: family default)");
  branch->add_option("--seed-offset", cfg.seed_offset, "parameter offset of the first branch point");
  branch->add_flag("--dump-orbits", dump_orbits, "write every branch point as an orbit file");
  add_common(branch);

  auto* fold = app.add_subcommand("fold", "coefficient table from a measured fold");
  fold->add_option("--branch", branch_path, "fold summary file from `branch`")
      ->required()
      ->check(CLI::ExistingFile);
  fold->add_option("--bifurcation", bp_path, "bifurcation point file from `locate`")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(fold);

  auto* surface = app.add_subcommand("surface", "reduced-action surface grid and critical points");
  surface->add_option("--a3", cfg.a3)->required();
  surface->add_option("--a4", cfg.a4)->required();
  surface->add_option("--kappa", cfg.kappa, "absolute eigenvalue");
  surface->add_option("--kappa-rel", cfg.kappa_rel, "eigenvalue as a multiple of kappa0");
  surface->add_option("--extent", cfg.extent, "half-width of the grid (0: auto)");
  surface->add_option("--resolution", cfg.resolution);
  add_common(surface);

  // two-phase parse so --config loads before flag overrides
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (!config_path.empty()) {
    try {
      RunConfig file_cfg = RunConfig::load(config_path);
      // re-parse flags on top of the file values
      cfg = file_cfg;
      app.clear();
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }

  try {
    if (find->parsed()) {
      const FamilyKind kind = family_kind(cfg.family);
      check_family_domain(cfg, kind);
      FamilyCurve family(kind, family_options(cfg));
      const double p = family_parameter(cfg, kind);
      const Orbit& o = family.at(p);
      char name[128];
      std::snprintf(name, sizeof name, "orbit_%s_%.6g.json", cfg.family.c_str(), p);
      const std::string path = out_path(cfg, name);
      write_text_atomic(path, orbit_to_json(o) + "\n");
      const Eigen::VectorXd g = action_gradient(o);
      std::printf("family %s parameter %.10g\n", cfg.family.c_str(), p);
      std::printf("  period   %.10g\n", o.period());
      std::printf("  action   %.12g\n", action(o));
      std::printf("  residual %.3e\n", g.norm());
      std::printf("  orbit -> %s\n", path.c_str());
    } else if (scan->parsed()) {
      const FamilyKind kind = family_kind(cfg.family);
      FamilyCurve family(kind, family_options(cfg));
      const ScanTable table =
          scan_eigenvalue(family.provider(), cfg.scan_from, cfg.scan_to, cfg.scan_steps);
      std::ostringstream os;
      os << cfg.provenance();
      table.write_csv(os);
      char name[128];
      std::snprintf(name, sizeof name, "scan_%s.csv", cfg.family.c_str());
      const std::string path = out_path(cfg, name);
      write_text_atomic(path, os.str());
      const KappaFit f = fit_kappa_linear(table);
      std::printf("scan %s [%.6g, %.6g]: kappa(p) = %.6g %+.6g p\n", cfg.family.c_str(),
                  cfg.scan_from, cfg.scan_to, f.intercept, f.slope);
      std::printf("  table -> %s\n", path.c_str());
    } else if (locate->parsed()) {
      const FamilyKind kind = family_kind(cfg.family);
      FamilyCurve family(kind, family_options(cfg));
      const BifurcationPoint bp = locate_bifurcation(family.provider(), cfg.bracket_lo,
                                                     cfg.bracket_hi, family.parameter_kind());
      char name[128];
      std::snprintf(name, sizeof name, "bifurcation_%s.json", cfg.family.c_str());
      const std::string path = out_path(cfg, name);
      write_text_atomic(path, bp_to_json(bp).dump(2) + "\n");
      std::printf("bifurcation of %s at parameter %.10g\n", cfg.family.c_str(),
                  bp.parameter.value);
      std::printf("  kappa      %.3e\n", bp.kappa);
      std::printf("  degeneracy %d\n", bp.degeneracy);
      std::printf("  symmetry   %s%s\n", bp.symmetry == SymmetryTag::D3 ? "D3" : "C3",
                  bp.gauge_free ? " (gauge-free pair)" : "");
      std::printf("  point -> %s\n", path.c_str());
    } else if (branch->parsed()) {
      const FamilyKind kind = family_kind(cfg.family);
      const BifurcationPoint bp = load_bp(bp_path);
      const FoldPipeline run = run_branch_pipeline(cfg, kind, bp);
      std::ostringstream os;
      os << cfg.provenance();
      run.fold_branch.write_csv(os);
      const std::string bpath = out_path(cfg, "branch_" + cfg.family + ".csv");
      write_text_atomic(bpath, os.str());

      nlohmann::json jf{{"format_version", 1},
                        {"parameter_fold", run.fold.parameter},
                        {"kappa0", run.fold.kappa0},
                        {"deltaS0", run.fold.deltaS0},
                        {"kappa_intercept", run.kfit.intercept},
                        {"kappa_slope", run.kfit.slope}};
      const std::string fpath = out_path(cfg, "fold_" + cfg.family + ".json");
      write_text_atomic(fpath, jf.dump(2) + "\n");

      std::ostringstream cs;
      cs << cfg.provenance();
      write_curve_csv(cs, run.curve);
      const std::string cpath = out_path(cfg, "curve_" + cfg.family + ".csv");
      write_text_atomic(cpath, cs.str());

      if (dump_orbits) {
        const std::string dir = out_path(cfg, "branch_" + cfg.family + "_orbits");
        std::filesystem::create_directories(dir);
        int i = 0;
        for (const auto& pt : run.fold_branch.points) {
          char name[64];
          std::snprintf(name, sizeof name, "/point_%04d.json", i++);
          save_orbit(pt.orbit, dir + name);
        }
      }
      std::printf("branch of %s from parameter %.10g\n", cfg.family.c_str(), bp.parameter.value);
      std::printf("  fold parameter %.10g\n", run.fold.parameter);
      std::printf("  kappa0         %+.6e\n", run.fold.kappa0);
      std::printf("  deltaS0        %+.6e\n", run.fold.deltaS0);
      std::printf("  branch -> %s\n  fold -> %s\n  curve -> %s\n", bpath.c_str(), fpath.c_str(),
                  cpath.c_str());
    } else if (fold->parsed()) {
      const BifurcationPoint bp = load_bp(bp_path);
      std::ifstream f(branch_path);
      if (!f) throw std::runtime_error("cannot open " + branch_path);
      std::stringstream ss;
      ss << f.rdbuf();
      const nlohmann::json jf = nlohmann::json::parse(ss.str());
      const double kappa0 = jf.at("kappa0").get<double>();
      const double deltaS0 = jf.at("deltaS0").get<double>();
      const auto [A3f, A4f] = fit_A3A4(kappa0, deltaS0);
      const auto [A3_0, A3_1] = a3_integrals(bp);
      const double A3i = std::abs(a3_coefficient(A3_0, A3_1, bp.symmetry));
      const FoldPrediction pred = fold_prediction(A3f, A4f);

      std::ostringstream os;
      os << cfg.provenance();
      os << "kappa0,deltaS0,A3_fit,A3_integral,A4,r0\n";
      char row[256];
      std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", kappa0, deltaS0, A3f,
                    A3i, A4f, pred.r0);
      os << row;
      const std::string path = out_path(cfg, "fold_table.csv");
      write_text_atomic(path, os.str());
      std::printf("kappa0      %+.6e\n", kappa0);
      std::printf("deltaS0     %+.6e\n", deltaS0);
      std::printf("A3 (fit)    %.6g\n", A3f);
      std::printf("A3 (integral) %.6g  [raw A3_0 %+.6g, A3_1 %+.6g]\n", A3i, A3_0, A3_1);
      std::printf("A4          %.6g\n", A4f);
      std::printf("r0          %.6g\n", pred.r0);
      std::printf("table -> %s\n", path.c_str());
    } else if (surface->parsed()) {
      double kappa = cfg.kappa;
      if (cfg.kappa_rel != 0.0) {
        const FoldPrediction p = fold_prediction(cfg.a3, cfg.a4);
        kappa = cfg.kappa_rel * p.kappa0;
      }
      double extent = cfg.extent;
      if (extent <= 0.0) extent = 2.5 * std::abs(3.0 * cfg.a3 / cfg.a4);
      const SurfaceGrid g = surface_grid(cfg.a3, cfg.a4, kappa, extent, cfg.resolution);
      std::ostringstream os;
      os << cfg.provenance();
      g.write_csv(os);
      const std::string path = out_path(cfg, "surface.csv");
      write_text_atomic(path, os.str());
      std::printf("surface A3=%.6g A4=%.6g kappa=%.6g: %zu critical points\n", cfg.a3, cfg.a4,
                  kappa, g.critical_points.size());
      for (const auto& c : g.critical_points) {
        const char* kind = c.kind == SurfaceGrid::CriticalPoint::Kind::Center ? "center"
                           : c.kind == SurfaceGrid::CriticalPoint::Kind::Bifurcation
                               ? "bifurcation"
                               : "fold";
        std::printf("  %-12s r1=%+.8f r2=%+.8f\n", kind, c.r1, c.r2);
      }
      std::printf("grid -> %s\n", path.c_str());
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
