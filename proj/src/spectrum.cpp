#include "eightfold/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "eightfold/action.hpp"

namespace eightfold {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd basis_norms(double T, int M) {
  Eigen::VectorXd d(2 * M + 1);
  d(0) = std::sqrt(T);
  d.tail(2 * M).setConstant(std::sqrt(T / 2.0));
  return d;
}

/// LoopSeries coefficients -> components in the L2-normalized basis.
Eigen::VectorXd to_components(const LoopSeries& loop) {
  const int nb = loop.nb();
  const Eigen::VectorXd d = basis_norms(loop.period, loop.modes);
  Eigen::VectorXd v(9 * nb);
  for (int c = 0; c < 9; ++c)
    v.segment(c * nb, nb) = loop.coef.row(c).transpose().cwiseProduct(d);
  return v;
}

LoopSeries from_components(const Eigen::VectorXd& v, double T, int M) {
  LoopSeries loop(T, M);
  const int nb = loop.nb();
  const Eigen::VectorXd d = basis_norms(T, M);
  for (int c = 0; c < 9; ++c)
    loop.coef.row(c) = v.segment(c * nb, nb).cwiseQuotient(d).transpose();
  return loop;
}

struct Kernel {
  Eigen::MatrixXd K;  // D x 7, orthonormal
  std::array<TrivialTag, 7> tags;
};

Kernel kernel_vectors(const Orbit& o) {
  const int M = o.modes(), nb = o.loop.nb();
  const int D = 9 * nb;
  Kernel ker;
  ker.K.resize(D, 7);
  int col = 0;
  // constant translations
  for (int axis = 0; axis < 3; ++axis, ++col) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(D);
    for (int body = 0; body < 3; ++body) v((3 * body + axis) * nb + 0) = 1.0;
    ker.K.col(col) = v;
    ker.tags[col] = TrivialTag::Translation;
  }
  // infinitesimal rotations n x q
  const auto& c = o.loop.coef;
  auto push_rows = [&](const Eigen::MatrixXd& rows) {
    LoopSeries gen(o.period(), M);
    gen.coef = rows;
    ker.K.col(col) = to_components(gen);
    ker.tags[col] = TrivialTag::Rotation;
    ++col;
  };
  {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(9, nb);  // z x q = (-y, x, 0)
    for (int b = 0; b < 3; ++b) {
      rows.row(3 * b + 0) = -c.row(3 * b + 1);
      rows.row(3 * b + 1) = c.row(3 * b + 0);
    }
    push_rows(rows);
  }
  {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(9, nb);  // x x q = (0, -z, y)
    for (int b = 0; b < 3; ++b) {
      rows.row(3 * b + 1) = -c.row(3 * b + 2);
      rows.row(3 * b + 2) = c.row(3 * b + 1);
    }
    push_rows(rows);
  }
  {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(9, nb);  // y x q = (z, 0, -x)
    for (int b = 0; b < 3; ++b) {
      rows.row(3 * b + 0) = c.row(3 * b + 2);
      rows.row(3 * b + 2) = -c.row(3 * b + 0);
    }
    push_rows(rows);
  }
  // time shift
  ker.K.col(col) = to_components(o.loop.derivative());
  ker.tags[col] = TrivialTag::TimeShift;

  // modified Gram-Schmidt
  for (int j = 0; j < 7; ++j) {
    for (int i = 0; i < j; ++i) ker.K.col(j) -= ker.K.col(i).dot(ker.K.col(j)) * ker.K.col(i);
    const double n = ker.K.col(j).norm();
    if (n < 1e-12) throw std::runtime_error("degenerate symmetry kernel (is the orbit planar and nontrivial?)");
    ker.K.col(j) /= n;
  }
  return ker;
}

/// Shared eigen-decomposition with the symmetry kernel deflated upward.
struct Engine {
  Orbit orbit;
  Eigen::MatrixXd H;
  Kernel ker;
  Eigen::VectorXd values;   // nontrivial, sorted ascending, lowest |.| subset
  Eigen::MatrixXd vectors;  // matching columns (normalized-basis components)

  explicit Engine(const Orbit& o, int keep = 60) : orbit(o) {
    H = assemble_hessian(o);
    ker = kernel_vectors(o);
    const double om = kTwoPi / o.period();
    const double shift = 100.0 * (1.0 + o.modes() * om * o.modes() * om);
    Eigen::MatrixXd Hd = H + shift * (ker.K * ker.K.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hd);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed on the Hessian operator");
    const int D = static_cast<int>(Hd.rows());
    std::vector<int> idx(D);
    for (int i = 0; i < D; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()(a)) < std::abs(es.eigenvalues()(b));
    });
    values.resize(keep);
    vectors.resize(D, keep);
    int out = 0;
    for (int i = 0; i < D && out < keep; ++i) {
      const int j = idx[i];
      // skip the deflated kernel copies
      if ((ker.K.transpose() * es.eigenvectors().col(j)).norm() > 0.9) continue;
      values(out) = es.eigenvalues()(j);
      vectors.col(out) = es.eigenvectors().col(j);
      ++out;
    }
    values.conservativeResize(out);
    vectors.conservativeResize(Eigen::NoChange, out);
  }

  double z_mass(int col) const {
    const int nb = orbit.loop.nb();
    double z = 0.0;
    for (int b = 0; b < 3; ++b) z += vectors.col(col).segment((3 * b + 2) * nb, nb).squaredNorm();
    return z;
  }

  double choreo_overlap(int col) const {
    return choreography_overlap(from_components(vectors.col(col), orbit.period(), orbit.modes()));
  }

  std::vector<std::vector<int>> groups(double tol = 1e-6) const {
    std::vector<std::vector<int>> gs;
    std::vector<int> order(values.size());
    for (int i = 0; i < values.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values(a) < values(b); });
    for (size_t i = 0; i < order.size();) {
      std::vector<int> g{order[i]};
      size_t j = i + 1;
      while (j < order.size() && std::abs(values(order[j]) - values(order[j - 1])) < tol)
        g.push_back(order[j++]);
      gs.push_back(std::move(g));
      i = j;
    }
    return gs;
  }
};

}  // namespace

Eigen::MatrixXd assemble_hessian(const Orbit& o) {
  std::vector<int> coords(9);
  for (int i = 0; i < 9; ++i) coords[i] = i;
  Eigen::MatrixXd H = action_hessian(o, coords);
  const int nb = o.loop.nb();
  const Eigen::VectorXd d = basis_norms(o.period(), o.modes());
  Eigen::VectorXd dall(9 * nb);
  for (int c = 0; c < 9; ++c) dall.segment(c * nb, nb) = d;
  for (int i = 0; i < H.rows(); ++i)
    for (int j = 0; j < H.cols(); ++j) H(i, j) /= dall(i) * dall(j);
  return H;
}

int SpectrumReport::trivial_count() const {
  int n = 0;
  for (const auto& p : pairs)
    if (p.tag != TrivialTag::Nontrivial) ++n;
  return n;
}

std::vector<std::vector<int>> SpectrumReport::degenerate_groups(double tol) const {
  std::vector<std::vector<int>> gs;
  for (size_t i = 0; i < pairs.size();) {
    if (pairs[i].tag != TrivialTag::Nontrivial) {
      ++i;
      continue;
    }
    std::vector<int> g{static_cast<int>(i)};
    size_t j = i + 1;
    while (j < pairs.size() && pairs[j].tag == TrivialTag::Nontrivial &&
           std::abs(pairs[j].value - pairs[j - 1].value) < tol)
      g.push_back(static_cast<int>(j++));
    gs.push_back(std::move(g));
    i = j;
  }
  return gs;
}

SpectrumReport eigen_spectrum(const Orbit& o, int count) {
  if (count < 10) throw std::invalid_argument("eigen_spectrum needs count >= 10");
  Engine eng(o, count + 10);
  SpectrumReport rep;
  const double T = o.period(), om = kTwoPi / T;
  const double trivial_threshold = 1e-6 * std::max(1.0, om * om);

  for (int i = 0; i < 7; ++i) {
    EigenPair p;
    p.value = eng.ker.K.col(i).dot(eng.H * eng.ker.K.col(i));
    p.fn = from_components(eng.ker.K.col(i), T, o.modes());
    p.tag = eng.ker.tags[i];
    if (std::abs(p.value) > trivial_threshold)
      throw std::runtime_error("symmetry mode has a non-negligible eigenvalue; orbit not converged?");
    rep.pairs.push_back(std::move(p));
  }
  const int want = std::min<int>(count - 7, static_cast<int>(eng.values.size()));
  for (int i = 0; i < want; ++i) {
    EigenPair p;
    p.value = eng.values(i);
    p.fn = from_components(eng.vectors.col(i), T, o.modes());
    p.tag = TrivialTag::Nontrivial;
    rep.pairs.push_back(std::move(p));
  }
  std::sort(rep.pairs.begin(), rep.pairs.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
  return rep;
}

double kappa_check(const Orbit& o, const LoopSeries& phi) {
  const int N = o.samples;
  const Eigen::MatrixXd q = o.loop.sample_grid(N);
  const Eigen::MatrixXd f = phi.sample_grid(N);
  const Eigen::MatrixXd fdot = phi.sample_grid_deriv(N);
  const double w = o.period() / N;
  double acc = 0.0;
  Configuration c;
  for (int k = 0; k < N; ++k) {
    c.q = q.col(k);
    const Vec9 fk = f.col(k);
    const Vec9 dirs[2] = {fk, fk};
    acc += fdot.col(k).squaredNorm() + directional_derivative(o.potential, c, dirs, 2);
  }
  return w * acc;
}

// ---------------------------------------------------------------------------

double choreography_overlap(const LoopSeries& phi) {
  LoopSeries img = phi.time_shift(phi.period / 3.0).permute_bodies({2, 0, 1});
  const double nn = phi.l2_inner(phi);
  return nn > 0 ? std::abs(phi.l2_inner(img)) / nn : 0.0;
}

namespace {

/// Best time shift aligning candidate to target; returns relative L2 defect.
std::pair<double, double> best_shift(const LoopSeries& target, const LoopSeries& cand) {
  const int M = target.modes;
  const double T = target.period;
  // <target, cand(t + s)> = u0 + sum_n [u_n cos(n d) + v_n sin(n d)], d = omega s
  Eigen::VectorXd u(M + 1), v(M + 1);
  u(0) = target.coef.col(0).dot(cand.coef.col(0)) * T;
  v(0) = 0.0;
  for (int n = 1; n <= M; ++n) {
    const auto ta = target.coef.col(n), tb = target.coef.col(M + n);
    const auto ca = cand.coef.col(n), cb = cand.coef.col(M + n);
    u(n) = 0.5 * T * (ta.dot(ca) + tb.dot(cb));
    v(n) = 0.5 * T * (ta.dot(cb) - tb.dot(ca));
  }
  auto corr = [&](double d) {
    double s = u(0);
    for (int n = 1; n <= M; ++n) s += u(n) * std::cos(n * d) + v(n) * std::sin(n * d);
    return s;
  };
  const int grid = 8 * M;
  double best_d = 0.0, best_c = -1e300;
  for (int k = 0; k < grid; ++k) {
    const double d = kTwoPi * k / grid;
    const double cc = corr(d);
    if (cc > best_c) {
      best_c = cc;
      best_d = d;
    }
  }
  // golden-section refine around the best grid point
  double lo = best_d - kTwoPi / grid, hi = best_d + kTwoPi / grid;
  for (int it = 0; it < 60; ++it) {
    const double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
    if (corr(m1) < corr(m2))
      lo = m1;
    else
      hi = m2;
  }
  best_d = 0.5 * (lo + hi);
  const double nt = target.l2_inner(target), nc = cand.l2_inner(cand);
  const double d2 = std::max(0.0, nt + nc - 2.0 * corr(best_d));
  return {best_d, std::sqrt(d2 / std::max(nt, 1e-300))};
}

const std::array<Eigen::Matrix3d, 3> kSigmas = [] {
  std::array<Eigen::Matrix3d, 3> s;
  s[0] = Eigen::Vector3d(-1, 1, 1).asDiagonal();   // reflect across the y axis
  s[1] = Eigen::Vector3d(1, -1, 1).asDiagonal();   // reflect across the x axis
  s[2] = Eigen::Vector3d(-1, -1, 1).asDiagonal();  // point reflection in the plane
  return s;
}();

const std::array<std::array<int, 3>, 6> kPerms{{{0, 1, 2},
                                                {0, 2, 1},
                                                {1, 0, 2},
                                                {1, 2, 0},
                                                {2, 0, 1},
                                                {2, 1, 0}}};

}  // namespace

LoopSeries apply_symmetry(const LoopSeries& phi, const LoopSymmetry& g) {
  LoopSeries out = g.reverse ? phi.time_reverse() : phi;
  out = out.time_shift(g.shift / out.omega());
  out = out.permute_bodies(g.perm);
  return out.apply_spatial(g.sigma);
}

std::vector<LoopSymmetry> detect_orbit_symmetries(const Orbit& o, double tol) {
  std::vector<LoopSymmetry> found;
  const LoopSeries& q = o.loop;
  for (int si = 0; si < 3; ++si)
    for (bool rev : {false, true}) {
      LoopSymmetry best;
      best.defect = 1e300;
      for (const auto& perm : kPerms) {
        LoopSymmetry g;
        g.sigma = kSigmas[si];
        g.sigma_type = si;
        g.reverse = rev;
        g.perm = perm;
        g.shift = 0.0;
        // candidate without shift; then optimal shift by correlation
        LoopSeries cand = g.reverse ? q.time_reverse() : q;
        cand = cand.permute_bodies(perm).apply_spatial(g.sigma);
        auto [delta, defect] = best_shift(q, cand);
        g.shift = delta;
        g.defect = defect;
        if (g.defect < best.defect) best = g;
      }
      if (best.defect < tol) found.push_back(best);
    }
  return found;
}

PhiSelection select_phi2(const Orbit& o, const LoopSeries& phi_a, const LoopSeries& phi_b) {
  PhiSelection sel;
  // orthonormalize the incoming pair
  LoopSeries p1 = phi_a, p2 = phi_b;
  const double n1 = p1.l2_norm();
  p1.coef /= n1;
  p2.coef -= p1.l2_inner(p2) * p1.coef;
  p2.coef /= p2.l2_norm();

  const auto syms = detect_orbit_symmetries(o);
  int sigma_kinds = 0;
  for (int si = 0; si < 3; ++si)
    for (const auto& g : syms)
      if (g.sigma_type == si) {
        ++sigma_kinds;
        break;
      }
  sel.tag = sigma_kinds >= 2 ? SymmetryTag::D3 : SymmetryTag::C3;

  if (sel.tag == SymmetryTag::D3) {
    for (const auto& g : syms) {
      const LoopSeries g1 = apply_symmetry(p1, g), g2 = apply_symmetry(p2, g);
      Eigen::Matrix2d D;
      D << p1.l2_inner(g1), p1.l2_inner(g2), p2.l2_inner(g1), p2.l2_inner(g2);
      if (std::abs(D.determinant() + 1.0) > 0.2) continue;  // not reflection-like here
      const Eigen::Matrix2d S = 0.5 * (D + D.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
      const Eigen::Vector2d even = es.eigenvectors().col(1);  // eigenvalue ~ +1
      const Eigen::Vector2d odd = es.eigenvectors().col(0);
      LoopSeries f2 = p1;
      f2.coef = even(0) * p1.coef + even(1) * p2.coef;
      LoopSeries f1 = p1;
      f1.coef = odd(0) * p1.coef + odd(1) * p2.coef;
      sel.phi1 = f1;
      sel.phi2 = f2;
      sel.score1 = f1.l2_inner(apply_symmetry(f1, g));
      sel.score2 = f2.l2_inner(apply_symmetry(f2, g));
      sel.gauge_free = false;
      return sel;
    }
    // no reflection acts as one on the eigenspace; fall through as gauge-free
  }
  sel.phi1 = p1;
  sel.phi2 = p2;
  sel.gauge_free = true;
  if (!syms.empty()) {
    sel.score1 = p1.l2_inner(apply_symmetry(p1, syms.front()));
    sel.score2 = p2.l2_inner(apply_symmetry(p2, syms.front()));
  }
  return sel;
}

// ---------------------------------------------------------------------------
// tracking across a family

namespace {

struct Candidate {
  double kappa = 0.0;
  int degeneracy = 1;
  Eigen::MatrixXd basis;  // D x d
};

std::vector<Candidate> enumerate_candidates(const Engine& eng, TrackTarget target) {
  std::vector<Candidate> out;
  for (const auto& g : eng.groups()) {
    if (target == TrackTarget::DegeneratePair) {
      if (g.size() != 2) continue;
      if (eng.z_mass(g[0]) > 0.1 || eng.z_mass(g[1]) > 0.1) continue;
      if (eng.choreo_overlap(g[0]) > 0.9) continue;
      Candidate c;
      c.kappa = 0.5 * (eng.values(g[0]) + eng.values(g[1]));
      c.degeneracy = 2;
      c.basis.resize(eng.vectors.rows(), 2);
      c.basis.col(0) = eng.vectors.col(g[0]);
      c.basis.col(1) = eng.vectors.col(g[1]);
      out.push_back(std::move(c));
    } else {
      if (g.size() != 1) continue;
      if (eng.z_mass(g[0]) > 0.1) continue;
      if (eng.choreo_overlap(g[0]) < 0.9) continue;
      Candidate c;
      c.kappa = eng.values(g[0]);
      c.degeneracy = 1;
      c.basis = eng.vectors.col(g[0]);
      out.push_back(std::move(c));
    }
  }
  return out;
}

/// Re-identify a tracked mode in a freshly solved spectrum by subspace overlap.
Candidate track(const Engine& eng, const Candidate& prev, const std::string& where) {
  const int d = prev.degeneracy;
  std::vector<std::pair<double, int>> scored;
  for (int j = 0; j < eng.values.size(); ++j) {
    const double s = (prev.basis.transpose() * eng.vectors.col(j)).norm();
    scored.emplace_back(s, j);
  }
  std::sort(scored.begin(), scored.end(), std::greater<>());
  double mass = 0.0;
  Candidate next;
  next.degeneracy = d;
  next.basis.resize(eng.vectors.rows(), d);
  double ksum = 0.0;
  for (int m = 0; m < d; ++m) {
    mass += scored[m].first * scored[m].first;
    next.basis.col(m) = eng.vectors.col(scored[m].second);
    ksum += eng.values(scored[m].second);
  }
  next.kappa = ksum / d;
  if (mass / d < 0.25)  // mean squared projection per tracked direction
    throw std::runtime_error("lost eigenvalue tracking at " + where +
                             " (overlap " + std::to_string(std::sqrt(mass / d)) + " < 0.5)");
  return next;
}

Candidate initial_candidate(const Engine& eng, TrackTarget target, const std::string& where) {
  auto cands = enumerate_candidates(eng, target);
  if (cands.empty()) throw std::runtime_error("no trackable eigenvalue found at " + where);
  return *std::min_element(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::abs(a.kappa) < std::abs(b.kappa);
  });
}

}  // namespace

void ScanTable::write_csv(std::ostream& os) const {
  os << "parameter,kappa,degeneracy\n";
  char buf[80];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", r.parameter, r.kappa, r.degeneracy);
    os << buf;
  }
}

ScanTable scan_eigenvalue(const OrbitProvider& family, double from, double to, int steps,
                          TrackTarget target) {
  if (steps < 2) throw std::invalid_argument("scan needs at least 2 steps");
  ScanTable table;
  Candidate cur;
  for (int i = 0; i < steps; ++i) {
    const double p = from + (to - from) * i / (steps - 1);
    Engine eng(family(p));
    cur = (i == 0) ? initial_candidate(eng, target, "parameter " + std::to_string(p))
                   : track(eng, cur, "scan step " + std::to_string(i) + " (parameter " +
                                         std::to_string(p) + ")");
    table.rows.push_back({p, cur.kappa, cur.degeneracy});
  }
  return table;
}

ScanTable scan_tracked(const OrbitProvider& family, const BifurcationPoint& bp, double from,
                       double to, int steps) {
  if (steps < 2) throw std::invalid_argument("scan needs at least 2 steps");
  std::vector<int> order(steps);
  for (int i = 0; i < steps; ++i) order[i] = i;
  auto param_of = [&](int i) { return from + (to - from) * i / (steps - 1); };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(param_of(a) - bp.parameter.value) < std::abs(param_of(b) - bp.parameter.value);
  });

  Candidate anchor;
  anchor.degeneracy = 2;
  anchor.basis.resize(9 * bp.orbit.loop.nb(), 2);
  anchor.basis.col(0) = to_components(bp.phi1);
  anchor.basis.col(1) = to_components(bp.phi2);
  std::map<double, Candidate> seen;
  std::vector<ScanRow> rows(steps);
  for (int idx : order) {
    const double p = param_of(idx);
    Engine eng(family(p));
    const Candidate* ref = &anchor;
    double best = std::abs(p - bp.parameter.value);
    for (const auto& [pp, cand] : seen)
      if (std::abs(pp - p) < best) {
        best = std::abs(pp - p);
        ref = &cand;
      }
    const Candidate cur = track(eng, *ref, "scan parameter " + std::to_string(p));
    rows[idx] = {p, cur.kappa, cur.degeneracy};
    seen[p] = cur;
  }
  ScanTable table;
  table.rows = std::move(rows);
  return table;
}

namespace {

struct CrossingTracker {
  // evaluated parameters with tracked candidates, kept sorted
  std::map<double, Candidate> seen;

  Candidate eval(const OrbitProvider& family, double p, const Candidate* seed_from = nullptr) {
    Engine eng(family(p));
    const Candidate* ref = seed_from;
    if (!ref && !seen.empty()) {
      auto it = seen.lower_bound(p);
      if (it == seen.end()) --it;
      if (it != seen.begin()) {
        auto prev = std::prev(it);
        if (std::abs(prev->first - p) < std::abs(it->first - p)) it = prev;
      }
      ref = &it->second;
    }
    Candidate c = ref ? track(eng, *ref, "parameter " + std::to_string(p))
                      : initial_candidate(eng, TrackTarget::DegeneratePair, std::to_string(p));
    seen[p] = c;
    return c;
  }
};

}  // namespace

double locate_crossing_parameter(const OrbitProvider& family, double lo, double hi,
                                 TrackTarget target) {
  // march across the bracket tracking every candidate of the requested type
  const int march = 5;
  std::vector<double> params(march);
  for (int i = 0; i < march; ++i) params[i] = lo + (hi - lo) * i / (march - 1);

  Engine eng0(family(params[0]));
  auto cands = enumerate_candidates(eng0, target);
  if (cands.empty()) throw std::runtime_error("no trackable eigenvalue at the bracket start");
  std::vector<std::vector<Candidate>> paths(cands.size());
  for (size_t c = 0; c < cands.size(); ++c) paths[c].push_back(cands[c]);
  for (int i = 1; i < march; ++i) {
    Engine eng(family(params[i]));
    for (size_t c = 0; c < cands.size(); ++c)
      paths[c].push_back(track(eng, paths[c].back(), "parameter " + std::to_string(params[i])));
  }
  int chosen = -1;
  for (size_t c = 0; c < cands.size(); ++c) {
    if (paths[c].front().kappa * paths[c].back().kappa < 0.0) {
      if (chosen >= 0)
        throw std::runtime_error("multiple tracked eigenvalues change sign in the bracket; narrow it");
      chosen = static_cast<int>(c);
    }
  }
  if (chosen < 0) throw std::runtime_error("no tracked eigenvalue changes sign in the bracket");

  // bracket between adjacent march points with the sign change
  CrossingTracker tr;
  double a = params[0], b = params[march - 1];
  double fa = paths[chosen].front().kappa, fb = paths[chosen].back().kappa;
  for (int i = 1; i < march; ++i) {
    tr.seen[params[i - 1]] = paths[chosen][i - 1];
    if (paths[chosen][i - 1].kappa * paths[chosen][i].kappa <= 0.0) {
      a = params[i - 1];
      fa = paths[chosen][i - 1].kappa;
      b = params[i];
      fb = paths[chosen][i].kappa;
      tr.seen[params[i]] = paths[chosen][i];
      break;
    }
  }

  // secant with bisection safeguard
  for (int it = 0; it < 60; ++it) {
    double p = (std::abs(fb - fa) > 1e-300) ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
    if (!(p > std::min(a, b) && p < std::max(a, b))) p = 0.5 * (a + b);
    const Candidate c = tr.eval(family, p);
    if (std::abs(c.kappa) < 1e-8 || std::abs(b - a) < 1e-13 * std::max(1.0, std::abs(a))) return p;
    if (fa * c.kappa <= 0.0) {
      b = p;
      fb = c.kappa;
    } else {
      a = p;
      fa = c.kappa;
    }
  }
  throw std::runtime_error("crossing search did not converge");
}

double tracked_pair_eigenvalue(const Orbit& o, const LoopSeries& phi1, const LoopSeries& phi2) {
  Engine eng(o);
  Candidate prev;
  prev.degeneracy = 2;
  prev.basis.resize(eng.vectors.rows(), 2);
  prev.basis.col(0) = to_components(phi1);
  prev.basis.col(1) = to_components(phi2);
  prev.basis.col(0).normalize();
  prev.basis.col(1) -= prev.basis.col(0).dot(prev.basis.col(1)) * prev.basis.col(0);
  prev.basis.col(1).normalize();
  return track(eng, prev, "tracked pair").kappa;
}

BifurcationPoint locate_bifurcation(const OrbitProvider& family, double lo, double hi,
                                    ParamValue::Kind kind, TrackTarget target) {
  const double p_star = locate_crossing_parameter(family, lo, hi, target);
  const Orbit orbit = family(p_star);
  Engine eng(orbit);
  // the degenerate pair nearest zero at the root
  auto cands = enumerate_candidates(eng, target);
  if (cands.empty()) throw std::runtime_error("no degenerate pair at the located crossing");
  const Candidate best = *std::min_element(
      cands.begin(), cands.end(),
      [](const Candidate& a, const Candidate& b) { return std::abs(a.kappa) < std::abs(b.kappa); });

  BifurcationPoint bp;
  bp.parameter = {kind, p_star};
  bp.orbit = orbit;
  bp.kappa = best.kappa;
  bp.degeneracy = best.degeneracy;
  if (target == TrackTarget::DegeneratePair) {
    const LoopSeries fa = from_components(best.basis.col(0), orbit.period(), orbit.modes());
    const LoopSeries fb = from_components(best.basis.col(1), orbit.period(), orbit.modes());
    PhiSelection sel = select_phi2(orbit, fa, fb);
    bp.phi1 = sel.phi1;
    bp.phi2 = sel.phi2;
    bp.symmetry = sel.tag;
    bp.gauge_free = sel.gauge_free;
  } else {
    bp.phi1 = from_components(best.basis.col(0), orbit.period(), orbit.modes());
    bp.phi2 = bp.phi1;
  }
  return bp;
}

}  // namespace eightfold
