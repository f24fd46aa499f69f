#include "eightfold/orbit.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace eightfold {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

LoopSeries curve_as_loop(const Curve& c) {
  LoopSeries l(c.period, c.modes);
  l.coef.topRows(3) = c.coef;
  return l;
}
}  // namespace

Orbit orbit_from_curve(const Potential& p, const Curve& c, int N) {
  LoopSeries base = curve_as_loop(c);
  LoopSeries loop(c.period, c.modes);
  for (int b = 0; b < 3; ++b) {
    const LoopSeries shifted = base.time_shift(b * c.period / 3.0);
    loop.coef.middleRows(3 * b, 3) = shifted.coef.topRows(3);
  }
  return Orbit(p, loop, N);
}

Curve curve_of_body(const Orbit& o, int body) {
  Curve c(o.period(), o.modes());
  c.coef = o.loop.coef.middleRows(3 * body, 3);
  return c;
}

double choreography_defect(const Orbit& o) {
  const LoopSeries shifted = o.loop.time_shift(o.period() / 3.0);
  double worst = 0.0;
  for (int b = 0; b < 3; ++b) {
    // q_{b+1}(t) = q_b(t + T/3)
    LoopSeries diff(o.period(), o.modes());
    diff.coef.topRows(3) = o.loop.coef.middleRows(3 * ((b + 1) % 3), 3) - shifted.coef.middleRows(3 * b, 3);
    worst = std::max(worst, diff.l2_norm());
  }
  return worst;
}

Orbit choreography_seed(SeedKind kind, double T, int M, int N) {
  if (!(T > 0.0)) throw std::domain_error("seed period must be positive");
  double A = 1.0, B = 0.3;
  Potential pot = Potential::homogeneous(1.0);
  switch (kind) {
    case SeedKind::FigureEightNewtonian:
      A = 1.05 * std::pow(T / kTwoPi, 2.0 / 3.0);
      B = 0.33 * A;
      pot = Potential::homogeneous(1.0);
      break;
    case SeedKind::FigureEightLJHigh:
      A = 2.2 * std::pow(T / 16.0, 0.25);
      B = 0.30 * A;
      pot = Potential::lennard_jones();
      break;
    case SeedKind::FigureEightLJLow:
      A = 2.9 * std::pow(T / 16.0, 0.25);
      B = 0.30 * A;
      pot = Potential::lennard_jones();
      break;
  }
  // x = A sin(tau), y = B sin(2 tau): an eight with lobes along x whose three
  // T/3-shifted copies sum to zero in every mode.
  Curve c(T, M);
  c.coef(0, M + 1) = A;
  c.coef(1, M + 2) = B;
  return orbit_from_curve(pot, c, N);
}

Orbit resample(const Orbit& o, int M2, int N2) {
  if (N2 < 4 * M2 + 4) throw std::invalid_argument("resample requires N >= 4M + 4");
  return Orbit(o.potential, o.loop.resample(M2), N2);
}

namespace {

nlohmann::json potential_to_json(const Potential& p) {
  nlohmann::json j;
  switch (p.kind) {
    case PotentialKind::LennardJones: j["kind"] = "lennard-jones"; break;
    case PotentialKind::Homogeneous: j["kind"] = "homogeneous"; j["a"] = p.exponent_a; break;
    case PotentialKind::ZeroTest: j["kind"] = "zero-test"; break;
  }
  return j;
}

Potential potential_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lennard-jones") return Potential::lennard_jones();
  if (kind == "homogeneous") return Potential::homogeneous(j.at("a").get<double>());
  if (kind == "zero-test") return Potential::zero_test();
  throw std::invalid_argument("unknown potential kind: " + kind);
}

}  // namespace

std::string orbit_to_json(const Orbit& o) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["potential"] = potential_to_json(o.potential);
  j["period"] = o.period();
  j["modes"] = o.modes();
  j["samples"] = o.samples;
  nlohmann::json rows = nlohmann::json::array();
  for (int c = 0; c < 9; ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < o.loop.nb(); ++i) row.push_back(o.loop.coef(c, i));
    rows.push_back(std::move(row));
  }
  j["coefficients"] = std::move(rows);
  return j.dump(2);
}

Orbit orbit_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format_version").get<int>() != 1)
    throw std::invalid_argument("unsupported orbit format version");
  const Potential p = potential_from_json(j.at("potential"));
  const double T = j.at("period").get<double>();
  const int M = j.at("modes").get<int>();
  const int N = j.at("samples").get<int>();
  LoopSeries loop(T, M);
  const auto& rows = j.at("coefficients");
  if (rows.size() != 9) throw std::invalid_argument("orbit file must carry 9 coordinate rows");
  for (int c = 0; c < 9; ++c) {
    const auto& row = rows.at(c);
    if (static_cast<int>(row.size()) != loop.nb())
      throw std::invalid_argument("coefficient row length mismatch");
    for (int i = 0; i < loop.nb(); ++i) loop.coef(c, i) = row.at(i).get<double>();
  }
  return Orbit(p, loop, N);
}

void save_orbit(const Orbit& o, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("cannot open " + tmp + " for writing");
    f << orbit_to_json(o) << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

Orbit load_orbit(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return orbit_from_json(ss.str());
}

}  // namespace eightfold
