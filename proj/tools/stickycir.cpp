#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "stickycir/errors.hpp"
#include "stickycir/harness.hpp"

using namespace stickycir;

int main(int argc, char** argv) {
  CLI::App app{"Sticky CIR samplers: invariant law, exact resolvent sampler, MH and ULA chains"};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions options;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "master seed (overrides master_seed)");
    sub->add_option("--threads", options.threads, "worker threads, 0 for all cores");
  };

  auto* invariant = app.add_subcommand("invariant", "write theory.csv and density.csv");
  add_common(invariant);
  auto* exact = app.add_subcommand("sample-exact", "run the exact resolvent chain (zero potential)");
  auto* mcmc = app.add_subcommand("sample-mcmc", "run the Metropolis-Hastings chain");
  auto* ula = app.add_subcommand("sample-ula", "run the unadjusted chain");
  for (auto* sub : {exact, mcmc, ula}) {
    add_common(sub);
    sub->add_flag("--no-trace", options.no_trace, "do not write samples.csv");
  }
  auto* experiment = app.add_subcommand("experiment", "run every cell of the config grid");
  add_common(experiment);
  experiment->add_flag("--parallel-cells", options.parallel_cells, "run one cell per thread");
  experiment->add_flag("--no-trace", options.no_trace, "accepted for symmetry; experiment never writes samples.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  if (!out_dir.empty()) options.out_dir = out_dir;
  for (auto* sub : {invariant, exact, mcmc, ula, experiment}) {
    if (sub->parsed() && sub->count("--seed")) options.seed = seed;
  }

  try {
    if (invariant->parsed()) return cmd_invariant(config, options);
    if (exact->parsed()) return cmd_sample(config, Algorithm::Exact, options);
    if (mcmc->parsed()) return cmd_sample(config, Algorithm::Mcmc, options);
    if (ula->parsed()) return cmd_sample(config, Algorithm::Ula, options);
    return cmd_experiment(config, options);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}
