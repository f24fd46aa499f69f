#include "eightfold/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace eightfold {

const char* kVersion = "0.1.0";

namespace {

nlohmann::json to_json_obj(const RunConfig& c) {
  return nlohmann::json{
      {"modes", c.modes},
      {"samples", c.samples},
      {"tol", c.tol},
      {"max_iter", c.max_iter},
      {"family", c.family},
      {"period", c.period},
      {"exponent", c.exponent},
      {"scan_from", c.scan_from},
      {"scan_to", c.scan_to},
      {"scan_steps", c.scan_steps},
      {"bracket_lo", c.bracket_lo},
      {"bracket_hi", c.bracket_hi},
      {"h", c.h},
      {"ds", c.ds},
      {"seed_offset", c.seed_offset},
      {"a3", c.a3},
      {"a4", c.a4},
      {"kappa", c.kappa},
      {"kappa_rel", c.kappa_rel},
      {"extent", c.extent},
      {"resolution", c.resolution},
      {"output_dir", c.output_dir},
      {"rng_seed", c.rng_seed},
  };
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string RunConfig::to_json() const { return to_json_obj(*this).dump(2); }

RunConfig RunConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunConfig c;
  maybe(j, "modes", c.modes);
  maybe(j, "samples", c.samples);
  maybe(j, "tol", c.tol);
  maybe(j, "max_iter", c.max_iter);
  maybe(j, "family", c.family);
  maybe(j, "period", c.period);
  maybe(j, "exponent", c.exponent);
  maybe(j, "scan_from", c.scan_from);
  maybe(j, "scan_to", c.scan_to);
  maybe(j, "scan_steps", c.scan_steps);
  maybe(j, "bracket_lo", c.bracket_lo);
  maybe(j, "bracket_hi", c.bracket_hi);
  maybe(j, "h", c.h);
  maybe(j, "ds", c.ds);
  maybe(j, "seed_offset", c.seed_offset);
  maybe(j, "a3", c.a3);
  maybe(j, "a4", c.a4);
  maybe(j, "kappa", c.kappa);
  maybe(j, "kappa_rel", c.kappa_rel);
  maybe(j, "extent", c.extent);
  maybe(j, "resolution", c.resolution);
  maybe(j, "output_dir", c.output_dir);
  maybe(j, "rng_seed", c.rng_seed);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

std::uint64_t RunConfig::hash() const {
  RunConfig canon = *this;
  canon.output_dir.clear();  // where files land must not change what they say
  const std::string s = canon.to_json();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::provenance() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "# eightfold %s config=%016llx\n", kVersion,
                static_cast<unsigned long long>(hash()));
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + tmp + " for writing");
    f << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace eightfold
