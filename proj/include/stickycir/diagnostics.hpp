#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stickycir/model.hpp"
#include "stickycir/samplers.hpp"

namespace stickycir {

using Draws = std::span<const double>;

// Draws after warmup: states[warmup+1 .. n_steps] of each chain, so a chain
// of n_steps steps contributes n_steps - warmup draws.
std::vector<Draws> post_warmup(std::span<const ChainRecord> chains, std::size_t warmup);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation across chains / sqrt(chains)
};

// Fraction of draws equal to 0, per chain, averaged across chains.
// Throws InsufficientDataError for fewer than 2 chains or an empty chain.
Estimate boundary_fraction(std::span<const Draws> chains);
Estimate boundary_fraction(std::span<const ChainRecord> chains, std::size_t warmup);

// Rank-normalized split-chain bulk ESS. Operates on the interior draws
// (u > 0) of each chain, concatenated across boundary visits and trimmed to
// the shortest chain. Capped at the number of draws used. Throws
// InsufficientDataError with fewer than 8 interior draws per chain or zero
// variance.
double ess_bulk(std::span<const Draws> chains);
double ess_bulk(std::span<const ChainRecord> chains, std::size_t warmup);
// The same estimator on arbitrary real-valued chains (no interior filter).
double ess_bulk_values(std::span<const Draws> chains);

// accepted/proposed per move type, indexed by MoveType. Empty for exact and
// ULA chains and for move types that were never proposed.
using AcceptanceRates = std::array<std::optional<double>, 3>;
AcceptanceRates acceptance_table(const ChainRecord& record);
// Pooled over chains.
AcceptanceRates acceptance_table(std::span<const ChainRecord> chains);

struct Histogram {
  double upper = 0.0;
  double width = 0.0;
  std::vector<double> density;  // per bin (lo, hi], unconditional
  double boundary_mass = 0.0;   // pooled fraction of draws at 0
  double overflow_mass = 0.0;   // pooled fraction of draws above upper

  double lower_edge(std::size_t i) const { return width * static_cast<double>(i); }
  // sum of density * width
  double interior_mass() const;
};

// Pooled histogram of the interior draws on (0, upper]; densities are
// normalized by the total draw count, so interior_mass() + overflow_mass
// = 1 - boundary_mass.
Histogram histogram_density(std::span<const Draws> chains, std::size_t n_bins = 60, double upper = 4.0);
Histogram histogram_density(std::span<const ChainRecord> chains, std::size_t warmup,
                            std::size_t n_bins = 60, double upper = 4.0);

// Kolmogorov-Smirnov distance between the empirical law of samples and cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Asymptotic one-sample critical value sqrt(-ln(level/2)/2)/sqrt(n).
double ks_critical_value(std::size_t n, double level = 0.01);

// Every lag-th element.
std::vector<double> thin(Draws draws, std::size_t lag);

// Weighted least-squares fit y = C x through the origin, weights 1/se^2.
struct OriginFit {
  double slope = 0.0;
  std::vector<double> residuals;      // y - C x
  std::vector<double> standardized;  // residual / se
};
OriginFit fit_through_origin(std::span<const double> x, std::span<const double> y,
                             std::span<const double> se);

// One (potential, mu, alpha, algorithm) cell.
struct ExperimentRow {
  std::string potential;
  double mu = 0.0;
  double alpha = 0.0;
  Algorithm algorithm = Algorithm::Exact;
  double boundary_frac = 0.0;
  double boundary_se = 0.0;
  double theory_atom = 0.0;
  double bias = 0.0;  // boundary_frac - theory_atom
  double ess_bulk = 0.0;  // NaN when the chains have too few interior draws
  AcceptanceRates acceptance{};
  std::size_t n_steps = 0;
  std::size_t n_chains = 0;
  std::size_t warmup = 0;
  double wall_time = 0.0;  // summed sampling-loop seconds over chains

  double ess_per_sec() const;
};

ExperimentRow summarize(std::string potential, const ModelParams& params, Algorithm algorithm,
                        std::span<const ChainRecord> chains, std::size_t n_steps, std::size_t warmup,
                        double theory_atom);

}  // namespace stickycir
