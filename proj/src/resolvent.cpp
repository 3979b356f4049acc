#include "stickycir/resolvent.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "stickycir/errors.hpp"
#include "stickycir/quadrature.hpp"

namespace stickycir {

namespace {

constexpr std::size_t kMinCells = 1000;
constexpr double kBuildTolerance = 1e-4;
constexpr int kMaxExitRejections = 10000;
constexpr std::size_t kGaussPartialCells = 64;

std::atomic<int> clamp_warnings{0};

// int_{y0}^{y1} g(y) y^(delta-1) dy with g linear between g0 and g1.
// Moments of y^(delta-1) are exact; only g is interpolated.
double product_trapezium(double y0, double y1, double g0, double g1, double delta) {
  const double w = y1 - y0;
  if (!(w > 0.0)) {
    return 0.0;
  }
  const double d = delta - 1.0;
  if (y0 > 0.0 && w < 1e-3 * y1) {
    return 0.5 * w * (g0 * std::pow(y0, d) + g1 * std::pow(y1, d));
  }
  const double p = delta;
  const double q = delta + 1.0;
  const double m0 = (std::pow(y1, p) - std::pow(y0, p)) / p;
  const double m1 = (std::pow(y1, q) - std::pow(y0, q)) / q;
  const double right = std::max(0.0, y1 * m0 - m1);  // int (y1 - y) y^d
  const double left = std::max(0.0, m1 - y0 * m0);   // int (y - y0) y^d
  return (g0 * right + g1 * left) / w;
}

template <class F>
double gauss3(const F& f, double lo, double hi) {
  static const double r = std::sqrt(0.6);
  const double half = 0.5 * (hi - lo);
  const double mid = lo + half;
  return half * (5.0 * f(mid - r * half) + 8.0 * f(mid) + 5.0 * f(mid + r * half)) / 9.0;
}

void warn_clamp(double x, double y_max) {
  if (clamp_warnings.fetch_add(1) < 5) {
    detail::warn("state " + std::to_string(x) + " exceeds the resolvent grid; clamped to y_max=" +
                 std::to_string(y_max));
  }
}

}  // namespace

ResolventTable::ResolventTable(std::shared_ptr<const Grid> grid, const ModelParams& params)
    : grid_(std::move(grid)), params_(params) {
  params_.validate();
  const double denom = params_.mu * grid_->abs_w + params_.alpha * grid_->U0;
  c_mu_ = -params_.alpha / denom;
  p_leave_ = params_.mu * grid_->abs_w / denom;
}

ResolventTable build_table(const ModelParams& params, std::size_t N, YMaxPolicy policy) {
  params.validate();
  if (N < kMinCells) {
    throw DomainError("build_table: N must be at least 1000, got " + std::to_string(N));
  }
  if (!(policy.z_max > 0.0) || !std::isfinite(policy.z_max)) {
    throw DomainError("build_table: z_max must be positive");
  }
  auto g = std::make_shared<ResolventTable::Grid>();
  g->base = params;
  g->cells = N;
  const double lb = params.lambda * params.beta;
  const double a = params.kummer_a();
  const double b = params.kummer_b();
  if (a > 12.0) {
    detail::warn("build_table: a = alpha/(2 lambda) = " + std::to_string(a) +
                 " lies outside the verified Kummer accuracy box a <= 12");
  }
  g->kummer = specfun::Kummer(a, b);
  g->y_max = std::sqrt(2.0 * policy.z_max / lb);
  g->dy = g->y_max / static_cast<double>(N);
  g->U0 = g->kummer.U0();
  g->abs_w = lb * std::exp(specfun::log_gamma(b) - specfun::log_gamma(a) - b * std::log(0.5 * lb));

  const std::size_t n = N + 1;
  g->y.resize(n);
  g->M.resize(n);
  g->U.resize(n);
  g->mprime.resize(n);
  g->ilt_u.assign(n, 0.0);
  g->igt.assign(n, 0.0);
  g->ilt_m.resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    const double y = j == N ? g->y_max : static_cast<double>(j) * g->dy;
    const double z = params.z_of(y);
    g->y[j] = y;
    if (j == 0) {
      g->M[j] = 1.0;
      g->U[j] = g->U0;
      g->mprime[j] = 0.0;
    } else {
      const auto v = g->kummer.MU(z);
      g->M[j] = v.M;
      g->U[j] = v.U;
      g->mprime[j] = params.beta * std::pow(y, params.delta - 1.0) * std::exp(-z);
    }
  }

  // 3-point Gauss-Legendre per cell; the first cell carries the y^(delta-1)
  // cusp and is integrated adaptively.
  auto integrand = [&](double y) {
    if (!(y > 0.0)) {
      return 0.0;
    }
    const double z = params.z_of(y);
    return params.beta * std::pow(y, params.delta - 1.0) * std::exp(-z) * g->kummer.U(z);
  };
  std::vector<double> cell(N);
  for (const auto& panel : quadrature::adaptive_gl15(integrand, {0.0, g->dy}, 1e-14)) {
    cell[0] += panel.mass;
  }
  for (std::size_t j = 1; j < N; ++j) {
    cell[j] = gauss3(integrand, g->y[j], g->y[j + 1]);
  }
  for (std::size_t j = 0; j < N; ++j) {
    g->ilt_u[j + 1] = g->ilt_u[j] + cell[j];
  }
  for (std::size_t j = N; j-- > 0;) {
    g->igt[j] = g->igt[j + 1] + cell[j];
  }
  const double z_nu = g->abs_w / params.alpha;
  for (std::size_t j = 0; j < n; ++j) {
    g->ilt_m[j] = (z_nu - g->M[j] * g->igt[j]) / g->U[j];
  }

  ResolventTable table(std::move(g), params);
  const double ratio = table.u_integral_ratio();
  if (!(std::abs(ratio - 1.0) <= kBuildTolerance)) {
    std::ostringstream os;
    os << "build_table: alpha*IltU_N/|W| = " << ratio << " at N=" << N << ", y_max=" << table.y_max()
       << "; refine the grid";
    throw GridResolutionError(os.str());
  }
  return table;
}

double ResolventTable::u_integral_ratio() const {
  return params_.alpha * grid_->ilt_u.back() / grid_->abs_w;
}

double ResolventTable::max_identity_residual() const {
  const double scale = params_.alpha / grid_->abs_w;
  double worst = 0.0;
  for (std::size_t j = 0; j < grid_->y.size(); ++j) {
    const double r = scale * (grid_->M[j] * grid_->igt[j] + grid_->U[j] * grid_->ilt_m[j]) - 1.0;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

bool ResolventTable::cumulative_monotone() const {
  for (std::size_t j = 1; j < grid_->y.size(); ++j) {
    if (grid_->ilt_u[j] < grid_->ilt_u[j - 1] || grid_->igt[j] > grid_->igt[j - 1]) {
      return false;
    }
  }
  return true;
}

KummerPoint ResolventTable::point(double x) const {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError("ResolventTable::point: state must be finite and >= 0");
  }
  if (x == 0.0) {
    return {0.0, 1.0, grid_->U0};
  }
  const auto v = grid_->kummer.MU(params_.z_of(x));
  return {x, v.M, v.U};
}

double ResolventTable::f0_sticky(const KummerPoint& p) const {
  return p.x == 0.0 ? p_leave_ : p.M + c_mu_ * p.U;
}

double ResolventTable::ilt_node(std::size_t j) const {
  if (j == 0) {
    return 0.0;
  }
  return grid_->ilt_m[j] + c_mu_ * grid_->ilt_u[j];
}

ResolventTable::Mixture ResolventTable::mixture(const KummerPoint& p) const {
  const Grid& g = *grid_;
  if (!(p.x > 0.0) || p.x > g.y_max) {
    throw DomainError("transition_weights: need 0 < x <= y_max (x=" + std::to_string(p.x) + ")");
  }
  Mixture mix;
  std::size_t k = static_cast<std::size_t>(p.x / g.dy);
  k = std::min(k, g.cells);
  while (k > 0 && g.y[k] > p.x) {
    --k;
  }
  mix.k = k;

  // Partial cell [y_k, x]. Near the origin U carries a z^(1-b) cusp, so the
  // first cells use Gauss points; further out the product rule with the
  // exact U at x is accurate.
  double part;
  if (k < kGaussPartialCells) {
    auto integrand = [&](double y) {
      const double z = params_.z_of(y);
      return params_.beta * std::pow(y, params_.delta - 1.0) * std::exp(-z) * g.kummer.U(z);
    };
    part = gauss3(integrand, g.y[k], p.x);
  } else {
    const double smooth_x = params_.beta * p.U * std::exp(-params_.z_of(p.x));
    const double smooth_k = params_.beta * g.U[k] * std::exp(-params_.z_of(g.y[k]));
    part = product_trapezium(g.y[k], p.x, smooth_k, smooth_x, params_.delta);
  }
  const double ilt_u = g.ilt_u[k] + part;
  const double igt = std::max(0.0, g.igt[k] - part);
  const double z_nu = g.abs_w / params_.alpha;
  const double ilt_m = (z_nu - p.M * igt) / p.U;

  mix.igt = igt;
  mix.ilt = std::max(0.0, ilt_m + c_mu_ * ilt_u);
  const double scale = params_.alpha / g.abs_w;
  mix.w.w0 = -c_mu_ * p.U;
  mix.w.wlt = scale * p.U * mix.ilt;
  mix.w.wgt = scale * std::max(0.0, p.M + c_mu_ * p.U) * igt;
  return mix;
}

TransitionWeights ResolventTable::transition_weights(const KummerPoint& p) const {
  return mixture(p).w;
}

TransitionWeights ResolventTable::transition_weights(double x) const {
  if (!(x > 0.0) || x > grid_->y_max) {
    throw DomainError("transition_weights: need 0 < x <= y_max (x=" + std::to_string(x) + ")");
  }
  return mixture(point(x)).w;
}

double ResolventTable::sample_transition(double x, Rng& rng) const {
  if (!(x >= 0.0) || std::isnan(x)) {
    throw DomainError("sample_transition: state must be >= 0");
  }
  if (x > grid_->y_max) {
    warn_clamp(x, grid_->y_max);
    x = grid_->y_max;
  }
  if (x == 0.0) {
    return sample_from_boundary(rng);
  }
  return sample_from(point(x), rng);
}

double ResolventTable::sample_from(const KummerPoint& p, Rng& rng) const {
  if (p.x == 0.0) {
    return sample_from_boundary(rng);
  }
  const Mixture mix = mixture(p);
  const double v = rng.uniform() * mix.w.sum();
  if (v < mix.w.w0) {
    return 0.0;
  }
  if (v < mix.w.w0 + mix.w.wlt) {
    return sample_below(p, mix, rng);
  }
  return sample_above(p, mix, rng);
}

double ResolventTable::sample_below(const KummerPoint& p, const Mixture& mix, Rng& rng) const {
  const Grid& g = *grid_;
  const double target = rng.uniform_open() * mix.ilt;
  // Largest node j <= k with I_<(y_j) <= target.
  std::size_t lo = 0;
  std::size_t hi = mix.k;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (ilt_node(mid) <= target) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const double y0 = g.y[lo];
  const double f0 = ilt_node(lo);
  const double y1 = lo == mix.k ? p.x : g.y[lo + 1];
  const double f1 = lo == mix.k ? mix.ilt : ilt_node(lo + 1);
  double frac = f1 > f0 ? (target - f0) / (f1 - f0) : 0.5;
  frac = std::clamp(frac, 0.0, 1.0);
  double y = y0 + frac * (y1 - y0);
  if (!(y > 0.0)) {
    y = 0.5 * y1;
  }
  return std::min(y, p.x);
}

double ResolventTable::sample_above(const KummerPoint& p, const Mixture& mix, Rng& rng) const {
  const Grid& g = *grid_;
  if (mix.k >= g.cells || !(mix.igt > 0.0)) {
    return p.x;
  }
  const double target = (1.0 - rng.uniform_open()) * mix.igt;
  // Smallest node j in (k, N] with Igt_j <= target.
  std::size_t lo = mix.k + 1;
  std::size_t hi = g.cells;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (g.igt[mid] <= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const double y1 = g.y[lo];
  const double f1 = g.igt[lo];
  const double y0 = lo == mix.k + 1 ? p.x : g.y[lo - 1];
  const double f0 = lo == mix.k + 1 ? mix.igt : g.igt[lo - 1];
  double frac = f0 > f1 ? (f0 - target) / (f0 - f1) : 0.5;
  frac = std::clamp(frac, 0.0, 1.0);
  return std::max(p.x, y0 + frac * (y1 - y0));
}

double ResolventTable::sample_from_boundary(Rng& rng) const {
  if (rng.uniform() < p_leave_) {
    return sample_exit(rng);
  }
  return 0.0;
}

double ResolventTable::sample_exit(Rng& rng) const {
  const double b = params_.kummer_b();
  const double lb = params_.lambda * params_.beta;
  for (int attempt = 0; attempt < kMaxExitRejections; ++attempt) {
    const double w = rng.gamma(b);
    const double u = rng.uniform();
    if (u * grid_->U0 < grid_->kummer.U(w)) {
      const double y = std::sqrt(2.0 * w / lb);
      if (y > 0.0) {
        return y;
      }
    }
  }
  throw SamplerStallError("sample_exit: 10000 consecutive rejections");
}

double ResolventTable::log_gsticky(const KummerPoint& s, const KummerPoint& v) const {
  const KummerPoint& lo = s.x <= v.x ? s : v;
  const KummerPoint& hi = s.x <= v.x ? v : s;
  return std::log(f0_sticky(lo)) + std::log(hi.U) - std::log(grid_->abs_w);
}

double ResolventTable::log_gsticky(double s, double v) const {
  if (s > grid_->y_max || v > grid_->y_max) {
    throw DomainError("log_gsticky: arguments must not exceed y_max");
  }
  return log_gsticky(point(s), point(v));
}

double ResolventTable::log_w0(const KummerPoint& s) const {
  if (s.x == 0.0) {
    return std::log1p(-p_leave_);
  }
  return std::log(-c_mu_ * s.U);
}

ResolventTable ResolventTable::with_mu(double mu) const {
  ModelParams p = params_;
  p.mu = mu;
  return ResolventTable(grid_, p);
}

void ResolventTable::write_csv(std::ostream& os) const {
  const Grid& g = *grid_;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# lambda=%.17g beta=%.17g delta=%.17g mu=%.17g alpha=%.17g N=%zu y_max=%.17g\n",
                params_.lambda, params_.beta, params_.delta, params_.mu, params_.alpha, g.cells,
                g.y_max);
  os << buf << "y,M,U,IltU,Igt\n";
  for (std::size_t j = 0; j < g.y.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.y[j], g.M[j], g.U[j],
                  g.ilt_u[j], g.igt[j]);
    os << buf;
  }
}

ResolventTable read_table_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("#", 0) != 0) {
    throw ConfigError("read_table_csv: missing parameter line");
  }
  ModelParams p;
  std::size_t N = 0;
  double y_max = 0.0;
  if (std::sscanf(line.c_str(), "# lambda=%lf beta=%lf delta=%lf mu=%lf alpha=%lf N=%zu y_max=%lf",
                  &p.lambda, &p.beta, &p.delta, &p.mu, &p.alpha, &N, &y_max) != 7) {
    throw ConfigError("read_table_csv: malformed parameter line");
  }
  if (!std::getline(is, line) || line != "y,M,U,IltU,Igt") {
    throw ConfigError("read_table_csv: missing header");
  }
  YMaxPolicy policy;
  policy.z_max = p.z_of(y_max);
  ResolventTable table = build_table(p, N, policy);
  const ResolventTable::Grid& g = *table.grid_;
  std::size_t j = 0;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    double v[5];
    if (j >= g.y.size() ||
        std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4]) != 5) {
      throw ConfigError("read_table_csv: malformed row " + std::to_string(j));
    }
    const double expect[5] = {g.y[j], g.M[j], g.U[j], g.ilt_u[j], g.igt[j]};
    for (int c = 0; c < 5; ++c) {
      const double tol = 1e-12 * std::max(1.0, std::abs(expect[c]));
      if (!(std::abs(v[c] - expect[c]) <= tol)) {
        throw NumericError("read_table_csv: stored value disagrees with rebuilt grid at row " +
                           std::to_string(j));
      }
    }
    ++j;
  }
  if (j != g.y.size()) {
    throw ConfigError("read_table_csv: expected " + std::to_string(g.y.size()) + " rows");
  }
  return table;
}

ResolventTable TableCache::get(const ModelParams& params, std::size_t N) {
  params.validate();
  const Key key{params.alpha, params.lambda, params.beta, params.delta, N};
  std::shared_ptr<const ResolventTable> base;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tables_.find(key);
    if (it != tables_.end()) {
      base = it->second;
    }
  }
  if (!base) {
    auto built = std::make_shared<const ResolventTable>(build_table(params, N));
    std::lock_guard<std::mutex> lock(mutex_);
    base = tables_.emplace(key, std::move(built)).first->second;
  }
  return base->with_mu(params.mu);
}

std::size_t TableCache::grids() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return tables_.size();
}

TableCache& default_table_cache() {
  static TableCache cache;
  return cache;
}

}  // namespace stickycir
