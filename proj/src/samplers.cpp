#include "stickycir/samplers.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "stickycir/errors.hpp"

namespace stickycir {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_start(const ResolventTable& table, double x0) {
  if (!(x0 >= 0.0) || !(x0 <= table.y_max())) {
    throw DomainError("initial state must lie in [0, y_max], got " + std::to_string(x0));
  }
}

void count_move(ChainRecord& rec, double x, double y) {
  if (x > 0.0) {
    auto& c = rec.counter(y > 0.0 ? MoveType::IntToInt : MoveType::IntTo0);
    ++c.proposed;
    ++c.accepted;
  } else if (y > 0.0) {
    auto& c = rec.counter(MoveType::ZeroToInt);
    ++c.proposed;
    ++c.accepted;
  }
}

// Keeps kernel start points on the grid.
double onto_grid(const ResolventTable& table, double s) {
  if (s > table.y_max()) {
    detail::warn("Euler step left the resolvent grid; clamped to y_max");
    return table.y_max();
  }
  return s;
}

// Per-state quantities reused across MH steps.
struct State {
  KummerPoint at;     // Kummer values at x
  KummerPoint shift;  // Kummer values at phi_h(x)
  double G = 0.0;
};

class MhKernel {
 public:
  MhKernel(const ResolventTable& table, const Potential& potential, double h)
      : table_(table),
        potential_(potential),
        phi_(h, potential),
        beta_(table.params().beta),
        G0_(potential.value(0.0)),
        log_alpha_(std::log(table.params().alpha)),
        // log p_leave - log mu - log Z_nu
        boundary_const_(std::log(table.p_leave()) - std::log(table.params().mu) -
                        std::log(table.z_nu())) {}

  State state(double x) const {
    State s;
    s.at = table_.point(x);
    s.shift = x > 0.0 ? table_.point(onto_grid(table_, phi_(x))) : s.at;
    s.G = potential_.value(x);
    return s;
  }

  double ell_plus(const KummerPoint& s, const KummerPoint& v) const {
    return log_alpha_ + table_.log_gsticky(s, v);
  }

  double log_rho_int(const State& x, const State& y) const {
    return beta_ * (x.G - y.G) + ell_plus(y.shift, x.at) - ell_plus(x.shift, y.at);
  }

  double log_rho_to0(const State& x) const {
    return beta_ * (x.G - G0_) + boundary_const_ + std::log(x.at.U) - table_.log_w0(x.shift);
  }

  const ResolventTable& table() const { return table_; }

 private:
  const ResolventTable& table_;
  const Potential& potential_;
  EulerMap phi_;
  double beta_;
  double G0_;
  double log_alpha_;
  double boundary_const_;
};

bool accept(double log_rho, Rng& rng) { return std::log(rng.uniform_open()) < log_rho; }

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Exact: return "exact";
    case Algorithm::Mcmc: return "mcmc";
    case Algorithm::Ula: return "ula";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::Exact, Algorithm::Mcmc, Algorithm::Ula}) {
    if (name == to_string(a)) {
      return a;
    }
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected exact, mcmc or ula)");
}

std::string_view to_string(MoveType type) {
  switch (type) {
    case MoveType::IntToInt: return "int_to_int";
    case MoveType::IntTo0: return "int_to_0";
    case MoveType::ZeroToInt: return "0_to_int";
  }
  return "unknown";
}

EulerMap::EulerMap(double h, Potential potential) : h_(h), potential_(std::move(potential)) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("EulerMap: step must be positive");
  }
}

double EulerMap::operator()(double x) const {
  if (x <= 0.0) {
    return 0.0;
  }
  const double s = x - potential_.slope(x) * h_;
  return s > 0.0 ? s : 0.0;
}

double mh_log_rho(const ResolventTable& table, const Potential& potential, double h, const Move& move) {
  const MhKernel kernel(table, potential, h);
  switch (move.type) {
    case MoveType::IntToInt:
      if (!(move.x > 0.0) || !(move.y > 0.0)) {
        throw DomainError("mh_log_rho: interior move needs x > 0 and y > 0");
      }
      return kernel.log_rho_int(kernel.state(move.x), kernel.state(move.y));
    case MoveType::IntTo0:
      if (!(move.x > 0.0) || move.y != 0.0) {
        throw DomainError("mh_log_rho: move to 0 needs x > 0 and y = 0");
      }
      return kernel.log_rho_to0(kernel.state(move.x));
    case MoveType::ZeroToInt:
      if (move.x != 0.0 || !(move.y > 0.0)) {
        throw DomainError("mh_log_rho: move from 0 needs x = 0 and y > 0");
      }
      return -kernel.log_rho_to0(kernel.state(move.y));
  }
  throw DomainError("mh_log_rho: unknown move type");
}

ChainRecord run_exact(const ResolventTable& table, std::size_t n_steps, double x0, Rng& rng) {
  check_start(table, x0);
  ChainRecord rec;
  rec.algorithm = Algorithm::Exact;
  rec.seed = rng.seed();
  rec.states.reserve(n_steps + 1);
  rec.states.push_back(x0);
  const auto start = Clock::now();
  double x = x0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double y = table.sample_transition(x, rng);
    count_move(rec, x, y);
    rec.states.push_back(y);
    x = y;
  }
  rec.wall_time = seconds_since(start);
  return rec;
}

ChainRecord run_mcmc(const ResolventTable& table, const Potential& potential, std::size_t n_steps,
                     double x0, Rng& rng) {
  check_start(table, x0);
  if (!std::isfinite(potential.value(0.0))) {
    throw DomainError("run_mcmc: G(0) must be finite");
  }
  const MhKernel kernel(table, potential, table.params().step());
  ChainRecord rec;
  rec.algorithm = Algorithm::Mcmc;
  rec.seed = rng.seed();
  rec.states.reserve(n_steps + 1);
  rec.states.push_back(x0);
  const auto start = Clock::now();

  State cur = kernel.state(x0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double x = cur.at.x;
    if (x > 0.0) {
      const double y = table.sample_from(cur.shift, rng);
      if (y == 0.0) {
        auto& c = rec.counter(MoveType::IntTo0);
        ++c.proposed;
        if (accept(kernel.log_rho_to0(cur), rng)) {
          ++c.accepted;
          cur = kernel.state(0.0);
        }
      } else {
        auto& c = rec.counter(MoveType::IntToInt);
        ++c.proposed;
        State next = kernel.state(y);
        if (accept(kernel.log_rho_int(cur, next), rng)) {
          ++c.accepted;
          cur = next;
        }
      }
    } else {
      const double y = table.sample_from_boundary(rng);
      if (y > 0.0) {
        auto& c = rec.counter(MoveType::ZeroToInt);
        ++c.proposed;
        State next = kernel.state(y);
        if (accept(-kernel.log_rho_to0(next), rng)) {
          ++c.accepted;
          cur = next;
        }
      }
    }
    rec.states.push_back(cur.at.x);
  }
  rec.wall_time = seconds_since(start);
  return rec;
}

std::string_view to_string(UlaBoundary mode) {
  return mode == UlaBoundary::Effective ? "effective" : "plain";
}

UlaBoundary parse_ula_boundary(std::string_view name) {
  for (auto m : {UlaBoundary::Effective, UlaBoundary::Plain}) {
    if (name == to_string(m)) {
      return m;
    }
  }
  throw ConfigError("unknown ula_boundary '" + std::string(name) + "' (expected effective or plain)");
}

ModelParams ula_params(const ModelParams& params, const Potential& potential, UlaBoundary mode) {
  ModelParams p = params;
  if (mode == UlaBoundary::Effective) {
    p.mu = params.mu * std::exp(params.beta * potential.value(0.0));
  }
  return p;
}

ChainRecord run_ula(const ResolventTable& effective_table, const Potential& potential,
                    std::size_t n_steps, double x0, Rng& rng) {
  check_start(effective_table, x0);
  const EulerMap phi(effective_table.params().step(), potential);
  ChainRecord rec;
  rec.algorithm = Algorithm::Ula;
  rec.seed = rng.seed();
  rec.states.reserve(n_steps + 1);
  rec.states.push_back(x0);
  const auto start = Clock::now();
  double x = x0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double s = onto_grid(effective_table, phi(x));
    const double y = effective_table.sample_transition(s, rng);
    count_move(rec, x, y);
    rec.states.push_back(y);
    x = y;
  }
  rec.wall_time = seconds_since(start);
  return rec;
}

ChainRecord run_ula(const ModelParams& params, const Potential& potential, std::size_t n_steps,
                    double x0, Rng& rng, std::size_t N, TableCache& cache, UlaBoundary mode) {
  const ResolventTable table = cache.get(ula_params(params, potential, mode), N);
  return run_ula(table, potential, n_steps, x0, rng);
}

}  // namespace stickycir
