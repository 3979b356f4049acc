#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stickycir/model.hpp"
#include "stickycir/samplers.hpp"

namespace stickycir {

// One JSON document describing a run or a grid of runs. Every
// (potential, mu, alpha, algorithm) combination is one cell.
struct ExperimentConfig {
  double lambda = 1.0;
  double beta = 2.0;
  double delta = 1.5;
  std::vector<double> mu{1.0};
  std::vector<double> alpha{5.0};
  std::vector<std::string> potentials{"zero"};
  std::vector<std::string> algorithms{"exact"};
  std::size_t n_steps = 10000;
  std::size_t n_chains = 4;
  std::size_t warmup = 0;
  std::uint64_t master_seed = 0;
  std::size_t grid_n = 4000;
  std::string output_dir = "out";
  double x0 = 1.0;
  std::size_t hist_bins = 60;
  double hist_upper = 4.0;
  std::string ula_boundary = "effective";

  // Throws ConfigError on the first violated constraint.
  void validate() const;
  // validate() plus checks that only matter when every cell is run.
  void validate_grid() const;
  ModelParams params(double mu_value, double alpha_value) const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates. master_seed is required; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
// Pretty-printed JSON with every field.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace stickycir
