#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "stickycir/model.hpp"
#include "stickycir/rng.hpp"
#include "stickycir/specfun.hpp"

namespace stickycir {

// Grid truncation: y_max solves lambda beta y^2 / 2 = z_max.
struct YMaxPolicy {
  double z_max = 40.0;
};

struct TransitionWeights {
  double w0 = 0.0;   // jump to the atom
  double wlt = 0.0;  // land in (0, x)
  double wgt = 0.0;  // land in (x, y_max]
  double sum() const { return w0 + wlt + wgt; }
};

// Exact Kummer values at a state x (z = lambda beta x^2 / 2).
struct KummerPoint {
  double x = 0.0;
  double M = 1.0;
  double U = 0.0;
};

// Precomputed resolvent of the zero-potential sticky CIR process at rate
// alpha: Kummer values and cumulative integrals of U(a,b,z_y) m'(y) on a
// uniform grid of [0, y_max], plus the boundary constants. The grid depends
// on (alpha, lambda, beta, delta) only and is shared between tables that
// differ in mu. Immutable after construction; safe to share across threads.
class ResolventTable {
 public:
  const ModelParams& params() const { return params_; }
  std::size_t cells() const { return grid_->cells; }
  double y_max() const { return grid_->y_max; }
  double spacing() const { return grid_->dy; }

  double U0() const { return grid_->U0; }
  double abs_wronskian() const { return grid_->abs_w; }
  double c_mu() const { return c_mu_; }
  double p_leave() const { return p_leave_; }
  double z_nu() const { return grid_->abs_w / params_.alpha; }

  std::span<const double> nodes() const { return grid_->y; }
  std::span<const double> M_nodes() const { return grid_->M; }
  std::span<const double> U_nodes() const { return grid_->U; }
  std::span<const double> mprime_nodes() const { return grid_->mprime; }
  std::span<const double> IltU() const { return grid_->ilt_u; }
  std::span<const double> Igt() const { return grid_->igt; }
  std::span<const double> IltM() const { return grid_->ilt_m; }

  // alpha * IltU_N / |W|; equals 1 up to quadrature error.
  double u_integral_ratio() const;
  // max_j |(alpha/|W|)(M_j Igt_j + U_j IltM_j) - 1|.
  double max_identity_residual() const;
  bool cumulative_monotone() const;

  KummerPoint point(double x) const;
  double f0_sticky(const KummerPoint& p) const;

  // Mixture weights at 0 < x <= y_max; DomainError otherwise.
  TransitionWeights transition_weights(double x) const;
  TransitionWeights transition_weights(const KummerPoint& p) const;

  // One draw of the state after an Exp(alpha) time from x >= 0. States above
  // y_max are clamped to y_max with a warning.
  double sample_transition(double x, Rng& rng) const;
  // Same, with the Kummer values at the start point already evaluated.
  double sample_from(const KummerPoint& p, Rng& rng) const;
  // Start at the atom: stay with probability 1 - p_leave, else exit.
  double sample_from_boundary(Rng& rng) const;
  // Exit law: rejection sampler with Gamma(b,1) proposals in z.
  double sample_exit(Rng& rng) const;

  // log of the sticky resolvent f0_sticky(min) U(max) / |W|.
  double log_gsticky(double s, double v) const;
  double log_gsticky(const KummerPoint& s, const KummerPoint& v) const;
  // log w0(s); log(1 - p_leave) at s = 0.
  double log_w0(const KummerPoint& s) const;

  // Same grid, new stickiness.
  ResolventTable with_mu(double mu) const;

  // CSV dump of (y, M, U, IltU, Igt) at 17 significant digits, preceded by
  // a '#' line carrying the parameters.
  void write_csv(std::ostream& os) const;

 private:
  struct Grid {
    ModelParams base;  // mu ignored
    std::size_t cells = 0;
    double y_max = 0.0;
    double dy = 0.0;
    double U0 = 0.0;
    double abs_w = 0.0;
    specfun::Kummer kummer{1.0, 0.5};
    std::vector<double> y, M, U, mprime, ilt_u, igt, ilt_m;
  };

  struct Mixture {
    TransitionWeights w;
    double ilt = 0.0;  // I_<(x)
    double igt = 0.0;  // I_>(x)
    std::size_t k = 0; // last node with y_k <= x
  };

  ResolventTable(std::shared_ptr<const Grid> grid, const ModelParams& params);

  Mixture mixture(const KummerPoint& p) const;
  double sample_below(const KummerPoint& p, const Mixture& mix, Rng& rng) const;
  double sample_above(const KummerPoint& p, const Mixture& mix, Rng& rng) const;
  double ilt_node(std::size_t j) const;

  std::shared_ptr<const Grid> grid_;
  ModelParams params_;
  double c_mu_ = 0.0;
  double p_leave_ = 0.0;

  friend ResolventTable build_table(const ModelParams&, std::size_t, YMaxPolicy);
  friend ResolventTable read_table_csv(std::istream&);
};

// Builds the grid with N cells (N >= 1000). Throws GridResolutionError if
// alpha IltU_N / |W| misses 1 by more than 1e-4.
ResolventTable build_table(const ModelParams& params, std::size_t N = 4000, YMaxPolicy policy = {});

// Reads a table written by write_csv; the grid is rebuilt from the stored
// parameters and checked against the stored values.
ResolventTable read_table_csv(std::istream& is);

// Tables keyed by (alpha, lambda, beta, delta, N); mu only changes scalars.
class TableCache {
 public:
  ResolventTable get(const ModelParams& params, std::size_t N = 4000);
  std::size_t grids() const;

 private:
  using Key = std::tuple<double, double, double, double, std::size_t>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const ResolventTable>> tables_;
};

TableCache& default_table_cache();

}  // namespace stickycir
