#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../core.hpp"
#include "../exact_family.hpp"
#include "../geometry.hpp"

namespace bornlab::harness {

/// Everything one run needs. Keys are read from the experiment's section, then from [common].
struct ExperimentConfig {
  std::string experiment;
  double T = 1.0, delta = 0.9, T_bar = 0.9;
  int nt = 64, nx = 64;
  double k = 1.0;
  std::vector<double> epsilons{1e-3, 1e-2};
  std::uint64_t seed = 20240611;
  std::string out_dir = "out";
  double tol = 1e-9;
  int samples = 1000, families = 10, backgrounds = 20;
  std::vector<int> resolutions;
  double t_stop = 0.95;
  int n = 2048;
  int jobs = 1;

  ConeDomain domain() const { return {T, delta, T_bar}; }
  SpaceTimeGrid grid() const { return {domain(), nt, nx}; }
  SelfSimilarParams params() const { return {k, T}; }

  std::map<std::string, std::string> echo() const {
    std::map<std::string, std::string> m;
    auto num = [](double v) {
      std::ostringstream os;
      os.precision(17);
      os << v;
      return os.str();
    };
    m["experiment"] = experiment;
    m["T"] = num(T), m["delta"] = num(delta), m["T_bar"] = num(T_bar);
    m["nt"] = std::to_string(nt), m["nx"] = std::to_string(nx), m["n"] = std::to_string(n);
    m["k"] = num(k), m["seed"] = std::to_string(seed), m["tol"] = num(tol);
    m["samples"] = std::to_string(samples), m["families"] = std::to_string(families);
    m["backgrounds"] = std::to_string(backgrounds), m["t_stop"] = num(t_stop);
    std::string e, r;
    for (double v : epsilons) e += (e.empty() ? "" : " ") + num(v);
    for (int v : resolutions) r += (r.empty() ? "" : " ") + std::to_string(v);
    m["epsilons"] = e, m["resolutions"] = r;
    return m;
  }
};

namespace detail {
template <class V>
std::vector<V> parse_list(const std::string& s) {
  std::vector<V> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    for (char& c : tok)
      if (c == ',') c = ' ';
    std::istringstream ts(tok);
    V v;
    while (ts >> v) out.push_back(v);
  }
  return out;
}
}  // namespace detail

/// Per-experiment defaults applied before any config key.
inline ExperimentConfig experiment_defaults(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "nash") c.epsilons = {1e-4};
  if (experiment == "stability") c.n = 512;
  if (experiment == "linsolve") c.resolutions = {16, 32, 64, 128};
  if (experiment == "coeffs") c.resolutions = {32, 64, 128};
  if (experiment == "blowup") c.resolutions = {256, 512, 1024, 2048};
  return c;
}

/// Parses flat key = value INI text. Unknown keys are ignored; k = 0 is rejected.
inline ExperimentConfig parse_config(const std::string& text, const std::string& experiment) {
  boost::property_tree::ptree pt;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  ExperimentConfig c = experiment_defaults(experiment);
  auto get = [&](const std::string& key) -> boost::optional<std::string> {
    if (auto v = pt.get_optional<std::string>(boost::property_tree::ptree::path_type(experiment + "/" + key, '/')))
      return v;
    return pt.get_optional<std::string>(boost::property_tree::ptree::path_type("common/" + key, '/'));
  };
  auto rd = [&](const std::string& key, auto& field) {
    if (auto v = get(key)) {
      std::istringstream vs(*v);
      if (!(vs >> field)) throw PreconditionError("config: bad value for " + key);
    }
  };
  rd("T", c.T), rd("delta", c.delta), rd("T_bar", c.T_bar);
  rd("nt", c.nt), rd("nx", c.nx), rd("k", c.k), rd("seed", c.seed);
  rd("tol", c.tol), rd("samples", c.samples), rd("families", c.families), rd("backgrounds", c.backgrounds);
  rd("t_stop", c.t_stop), rd("n", c.n);
  if (auto v = get("out")) c.out_dir = *v;
  if (auto v = get("epsilons")) c.epsilons = detail::parse_list<double>(*v);
  if (auto v = get("resolutions")) c.resolutions = detail::parse_list<int>(*v);
  require(c.k != 0.0, "config: k must be nonzero");
  require(c.tol >= 0, "config: tol must be nonnegative");
  (void)c.domain();
  return c;
}

inline ExperimentConfig default_config(const std::string& experiment) { return parse_config("", experiment); }

}  // namespace bornlab::harness
