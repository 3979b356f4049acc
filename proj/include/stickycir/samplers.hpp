#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "stickycir/model.hpp"
#include "stickycir/resolvent.hpp"
#include "stickycir/rng.hpp"

namespace stickycir {

enum class Algorithm { Exact, Mcmc, Ula };

std::string_view to_string(Algorithm algorithm);
// "exact", "mcmc" or "ula"; throws ConfigError otherwise.
Algorithm parse_algorithm(std::string_view name);

enum class MoveType { IntToInt = 0, IntTo0 = 1, ZeroToInt = 2 };

std::string_view to_string(MoveType type);

struct MoveCounter {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

// One chain. states[0] is the initial state; a value of exactly 0 is the atom.
// Moves 0 -> 0 are not counted. Exact and ULA chains count every move as
// accepted.
struct ChainRecord {
  Algorithm algorithm = Algorithm::Exact;
  std::vector<double> states;
  std::array<MoveCounter, 3> counts{};
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds spent in the sampling loop

  const MoveCounter& counter(MoveType type) const { return counts[static_cast<int>(type)]; }
  MoveCounter& counter(MoveType type) { return counts[static_cast<int>(type)]; }
};

// Clamped Euler step phi_h(x) = max(x - G'(x) h, 0), with phi_h(0) = 0.
class EulerMap {
 public:
  EulerMap(double h, Potential potential);

  double operator()(double x) const;
  double step() const { return h_; }
  const Potential& potential() const { return potential_; }

 private:
  double h_;
  Potential potential_;
};

struct Move {
  MoveType type;
  double x;  // current state (0 for ZeroToInt)
  double y;  // proposed state (0 for IntTo0)
};

// Log Metropolis-Hastings ratio for one proposed move; the proposal kernel is
// the zero-potential sticky resolvent started at phi_h of the current state.
// Throws DomainError when (x, y) does not fit the move type.
double mh_log_rho(const ResolventTable& table, const Potential& potential, double h, const Move& move);

// Exact zero-potential chain: states[k+1] ~ sample_transition(states[k]).
ChainRecord run_exact(const ResolventTable& table, std::size_t n_steps, double x0, Rng& rng);

// Metropolis-Hastings chain targeting the Gibbs-tilted invariant law. The
// step is h = 1/alpha of the table.
ChainRecord run_mcmc(const ResolventTable& table, const Potential& potential, std::size_t n_steps,
                     double x0, Rng& rng);

// Stickiness of the ULA proposal table. Effective: mu_eff = mu exp(beta G(0)).
// Plain: mu itself, the G = 0 kernel the MH sampler also proposes from.
enum class UlaBoundary { Effective, Plain };

std::string_view to_string(UlaBoundary mode);
// "effective" or "plain"; throws ConfigError otherwise.
UlaBoundary parse_ula_boundary(std::string_view name);

ModelParams ula_params(const ModelParams& params, const Potential& potential,
                       UlaBoundary mode = UlaBoundary::Effective);

// Unadjusted chain: s = phi_h(states[k]), states[k+1] ~ sample_transition(s)
// on the ULA proposal table. The first overload takes that table directly.
ChainRecord run_ula(const ResolventTable& effective_table, const Potential& potential,
                    std::size_t n_steps, double x0, Rng& rng);
ChainRecord run_ula(const ModelParams& params, const Potential& potential, std::size_t n_steps,
                    double x0, Rng& rng, std::size_t N = 4000,
                    TableCache& cache = default_table_cache(),
                    UlaBoundary mode = UlaBoundary::Effective);

}  // namespace stickycir
