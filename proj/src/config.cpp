#include "stickycir/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stickycir/errors.hpp"

namespace stickycir {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {
    "lambda",  "beta",        "delta",   "mu",         "alpha",     "potentials",
    "algorithms", "n_steps",  "n_chains", "warmup",    "master_seed", "grid_n",
    "output_dir", "x0",       "hist_bins", "hist_upper", "ula_boundary"};

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

double finite_number(const json& v, const std::string& key) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    bad(key + " must be a finite number, got \"" + s + "\"");
  }
  if (!v.is_number()) {
    bad(key + " must be a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    bad(key + " must be finite");
  }
  return x;
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    bad(key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> number_list(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) {
      out.push_back(finite_number(e, key));
    }
  } else {
    out.push_back(finite_number(v, key));
  }
  return out;
}

std::vector<std::string> string_list(const json& v, const std::string& key) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
    return out;
  }
  if (!v.is_array()) {
    bad(key + " must be a string or a list of strings");
  }
  for (const auto& e : v) {
    if (!e.is_string()) {
      bad(key + " entries must be strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (mu.empty() || alpha.empty() || potentials.empty() || algorithms.empty()) {
    bad("empty grid: mu, alpha, potentials and algorithms must be non-empty");
  }
  for (double m : mu) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      bad("mu values must be positive and finite");
    }
  }
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      bad("alpha values must be positive and finite");
    }
  }
  try {
    params(mu.front(), alpha.front()).validate();
  } catch (const DomainError& e) {
    bad(e.what());
  }
  for (const auto& p : potentials) {
    parse_potential_tag(p);
  }
  for (const auto& a : algorithms) {
    parse_algorithm(a);
  }
  parse_ula_boundary(ula_boundary);
  if (n_chains < 2) {
    bad("n_chains must be at least 2 (standard errors are across chains)");
  }
  if (warmup > n_steps) {
    bad("warmup must not exceed n_steps");
  }
  if (grid_n < 1000) {
    bad("grid_n must be at least 1000");
  }
  if (!(x0 >= 0.0) || !std::isfinite(x0)) {
    bad("x0 must be finite and >= 0");
  }
  if (hist_bins == 0 || !(hist_upper > 0.0)) {
    bad("hist_bins and hist_upper must be positive");
  }
  if (output_dir.empty()) {
    bad("output_dir must not be empty");
  }
}

void ExperimentConfig::validate_grid() const {
  validate();
  bool any_nonzero = false;
  for (const auto& p : potentials) {
    any_nonzero = any_nonzero || parse_potential_tag(p) != PotentialTag::Zero;
  }
  for (const auto& a : algorithms) {
    if (parse_algorithm(a) == Algorithm::Exact && any_nonzero) {
      bad("the exact sampler only supports the zero potential");
    }
  }
}

ModelParams ExperimentConfig::params(double mu_value, double alpha_value) const {
  ModelParams p;
  p.lambda = lambda;
  p.beta = beta;
  p.delta = delta;
  p.mu = mu_value;
  p.alpha = alpha_value;
  return p;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    bad("top level must be an object");
  }
  for (const auto& [key, _] : doc.items()) {
    if (!kKeys.count(key)) {
      bad("unknown key \"" + key + "\"");
    }
  }
  if (!doc.contains("master_seed")) {
    bad("master_seed is required");
  }
  ExperimentConfig c;
  try {
    if (doc.contains("lambda")) c.lambda = finite_number(doc["lambda"], "lambda");
    if (doc.contains("beta")) c.beta = finite_number(doc["beta"], "beta");
    if (doc.contains("delta")) c.delta = finite_number(doc["delta"], "delta");
    if (doc.contains("mu")) c.mu = number_list(doc["mu"], "mu");
    if (doc.contains("alpha")) c.alpha = number_list(doc["alpha"], "alpha");
    if (doc.contains("potentials")) c.potentials = string_list(doc["potentials"], "potentials");
    if (doc.contains("algorithms")) c.algorithms = string_list(doc["algorithms"], "algorithms");
    if (doc.contains("n_steps")) c.n_steps = count(doc["n_steps"], "n_steps");
    if (doc.contains("n_chains")) c.n_chains = count(doc["n_chains"], "n_chains");
    if (doc.contains("warmup")) c.warmup = count(doc["warmup"], "warmup");
    const auto& seed = doc["master_seed"];
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                      seed.get<long long>() < 0)) {
      bad("master_seed must be a non-negative integer");
    }
    c.master_seed = seed.get<std::uint64_t>();
    if (doc.contains("grid_n")) c.grid_n = count(doc["grid_n"], "grid_n");
    if (doc.contains("output_dir")) {
      if (!doc["output_dir"].is_string()) bad("output_dir must be a string");
      c.output_dir = doc["output_dir"].get<std::string>();
    }
    if (doc.contains("x0")) c.x0 = finite_number(doc["x0"], "x0");
    if (doc.contains("hist_bins")) c.hist_bins = count(doc["hist_bins"], "hist_bins");
    if (doc.contains("hist_upper")) c.hist_upper = finite_number(doc["hist_upper"], "hist_upper");
    if (doc.contains("ula_boundary")) {
      if (!doc["ula_boundary"].is_string()) bad("ula_boundary must be a string");
      c.ula_boundary = doc["ula_boundary"].get<std::string>();
    }
  } catch (const json::exception& e) {
    bad(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    bad("cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json doc;
  doc["lambda"] = c.lambda;
  doc["beta"] = c.beta;
  doc["delta"] = c.delta;
  doc["mu"] = c.mu;
  doc["alpha"] = c.alpha;
  doc["potentials"] = c.potentials;
  doc["algorithms"] = c.algorithms;
  doc["n_steps"] = c.n_steps;
  doc["n_chains"] = c.n_chains;
  doc["warmup"] = c.warmup;
  doc["master_seed"] = c.master_seed;
  doc["grid_n"] = c.grid_n;
  doc["output_dir"] = c.output_dir;
  doc["x0"] = c.x0;
  doc["hist_bins"] = c.hist_bins;
  doc["hist_upper"] = c.hist_upper;
  doc["ula_boundary"] = c.ula_boundary;
  return doc.dump(2) + "\n";
}

}  // namespace stickycir
