#include "stickycir/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

#include "stickycir/errors.hpp"

namespace stickycir {

namespace {

constexpr std::size_t kMinInteriorDraws = 8;

// Inverse standard normal CDF.
double probit(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

// Replaces every value by the normal quantile of its fractional rank
// (r - 3/8)/(S + 1/4), ties averaged.
std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains) {
  std::size_t total = 0;
  for (const auto& c : chains) {
    total += c.size();
  }
  std::vector<std::pair<double, std::size_t>> pooled;
  pooled.reserve(total);
  for (std::size_t j = 0; j < chains.size(); ++j) {
    for (double v : chains[j]) {
      pooled.emplace_back(v, j);
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return pooled[l].first < pooled[r].first; });
  std::vector<double> rank(total);
  for (std::size_t i = 0; i < total;) {
    std::size_t k = i;
    while (k + 1 < total && pooled[order[k + 1]].first == pooled[order[i]].first) {
      ++k;
    }
    const double avg = 0.5 * static_cast<double>(i + k) + 1.0;
    for (std::size_t t = i; t <= k; ++t) {
      rank[order[t]] = avg;
    }
    i = k + 1;
  }
  std::vector<std::vector<double>> out(chains.size());
  std::size_t idx = 0;
  for (std::size_t j = 0; j < chains.size(); ++j) {
    out[j].reserve(chains[j].size());
    for (std::size_t t = 0; t < chains[j].size(); ++t, ++idx) {
      out[j].push_back(probit((rank[idx] - 0.375) / (static_cast<double>(total) + 0.25)));
    }
  }
  return out;
}

// Split each chain in half (dropping the middle draw of odd lengths).
std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

// Multi-chain ESS with Geyer's initial monotone sequence; chains of equal
// length. Autocovariances are summed lag by lag until the truncation point.
double ess_equal_length(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<double> means(m);
  std::vector<std::vector<double>> centered(m);
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = std::accumulate(chains[j].begin(), chains[j].end(), 0.0) / static_cast<double>(n);
    centered[j].resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      centered[j][t] = chains[j][t] - means[j];
    }
  }
  auto mean_acov = [&](std::size_t lag) {
    double s = 0.0;
    for (const auto& c : centered) {
      double a = 0.0;
      for (std::size_t t = 0; t + lag < n; ++t) {
        a += c[t] * c[t + lag];
      }
      s += a / static_cast<double>(n);
    }
    return s / static_cast<double>(m);
  };

  const double nn = static_cast<double>(n);
  const double acov0 = mean_acov(0);
  const double W = acov0 * nn / (nn - 1.0);
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double B_over_n = 0.0;
  if (m > 1) {
    for (double mu : means) {
      B_over_n += (mu - grand) * (mu - grand);
    }
    B_over_n /= static_cast<double>(m - 1);
  }
  const double var_plus = W * (nn - 1.0) / nn + B_over_n;
  if (!(var_plus > 0.0) || !std::isfinite(var_plus)) {
    throw InsufficientDataError("ess_bulk: chains have zero variance");
  }
  auto rho = [&](std::size_t lag) { return 1.0 - (W - mean_acov(lag)) / var_plus; };

  // Pair sums P_k = rho_{2k} + rho_{2k+1}, kept while positive, then made
  // monotone non-increasing.
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  double rho_even = 1.0;
  for (std::size_t t = 1; t + 1 < n; t += 2) {
    const double rho_odd = rho(t);
    double pair = rho_even + rho_odd;
    if (!(pair > 0.0)) {
      break;
    }
    pair = std::min(pair, prev_pair);
    sum += pair;
    prev_pair = pair;
    rho_even = rho(t + 1);
  }
  if (sum == 0.0) {
    sum = std::max(rho_even, 1e-12);
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(static_cast<double>(m) * nn));
  return static_cast<double>(m) * nn / tau;
}

double ess_core(const std::vector<std::vector<double>>& chains) {
  std::size_t total = 0;
  for (const auto& c : chains) {
    total += c.size();
  }
  const double ess = ess_equal_length(split_chains(rank_normalize(chains)));
  return std::min(ess, static_cast<double>(total));
}

std::vector<std::vector<double>> trimmed(std::span<const Draws> chains, bool interior_only) {
  if (chains.empty()) {
    throw InsufficientDataError("ess_bulk: no chains");
  }
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    std::vector<double> v;
    v.reserve(c.size());
    for (double x : c) {
      if (!interior_only || x > 0.0) {
        v.push_back(x);
      }
    }
    out.push_back(std::move(v));
  }
  std::size_t len = out.front().size();
  for (const auto& v : out) {
    len = std::min(len, v.size());
  }
  if (len < kMinInteriorDraws) {
    throw InsufficientDataError("ess_bulk: fewer than 8 draws in some chain");
  }
  for (auto& v : out) {
    v.resize(len);
  }
  return out;
}

}  // namespace

std::vector<Draws> post_warmup(std::span<const ChainRecord> chains, std::size_t warmup) {
  std::vector<Draws> out;
  out.reserve(chains.size());
  for (const auto& c : chains) {
    const std::size_t skip = std::min(c.states.size(), warmup + 1);
    out.emplace_back(c.states.data() + skip, c.states.size() - skip);
  }
  return out;
}

Estimate boundary_fraction(std::span<const Draws> chains) {
  if (chains.size() < 2) {
    throw InsufficientDataError("boundary_fraction: standard error needs at least 2 chains");
  }
  std::vector<double> fracs;
  for (const auto& c : chains) {
    if (c.empty()) {
      throw InsufficientDataError("boundary_fraction: empty chain after warmup");
    }
    const auto zeros = std::count(c.begin(), c.end(), 0.0);
    fracs.push_back(static_cast<double>(zeros) / static_cast<double>(c.size()));
  }
  // Summation in sorted order makes the result independent of chain order.
  std::sort(fracs.begin(), fracs.end());
  const double k = static_cast<double>(fracs.size());
  const double mean = std::accumulate(fracs.begin(), fracs.end(), 0.0) / k;
  double ss = 0.0;
  for (double f : fracs) {
    ss += (f - mean) * (f - mean);
  }
  return {mean, std::sqrt(ss / (k - 1.0) / k)};
}

Estimate boundary_fraction(std::span<const ChainRecord> chains, std::size_t warmup) {
  const auto d = post_warmup(chains, warmup);
  return boundary_fraction(d);
}

double ess_bulk(std::span<const Draws> chains) { return ess_core(trimmed(chains, true)); }

double ess_bulk(std::span<const ChainRecord> chains, std::size_t warmup) {
  const auto d = post_warmup(chains, warmup);
  return ess_bulk(d);
}

double ess_bulk_values(std::span<const Draws> chains) { return ess_core(trimmed(chains, false)); }

AcceptanceRates acceptance_table(const ChainRecord& record) {
  return acceptance_table(std::span<const ChainRecord>(&record, 1));
}

AcceptanceRates acceptance_table(std::span<const ChainRecord> chains) {
  AcceptanceRates out{};
  for (int t = 0; t < 3; ++t) {
    std::uint64_t proposed = 0, accepted = 0;
    bool mcmc = !chains.empty();
    for (const auto& c : chains) {
      mcmc = mcmc && c.algorithm == Algorithm::Mcmc;
      proposed += c.counts[t].proposed;
      accepted += c.counts[t].accepted;
    }
    if (mcmc && proposed > 0) {
      out[t] = static_cast<double>(accepted) / static_cast<double>(proposed);
    }
  }
  return out;
}

double Histogram::interior_mass() const {
  double s = 0.0;
  for (double d : density) {
    s += d * width;
  }
  return s;
}

Histogram histogram_density(std::span<const Draws> chains, std::size_t n_bins, double upper) {
  if (n_bins == 0 || !(upper > 0.0)) {
    throw DomainError("histogram_density: need n_bins > 0 and upper > 0");
  }
  Histogram h;
  h.upper = upper;
  h.width = upper / static_cast<double>(n_bins);
  std::vector<std::size_t> counts(n_bins, 0);
  std::size_t total = 0, zeros = 0, over = 0;
  for (const auto& c : chains) {
    for (double x : c) {
      ++total;
      if (x == 0.0) {
        ++zeros;
      } else if (x > upper) {
        ++over;
      } else {
        auto i = static_cast<std::size_t>(std::ceil(x / h.width));
        i = std::clamp<std::size_t>(i, 1, n_bins) - 1;
        ++counts[i];
      }
    }
  }
  h.density.assign(n_bins, 0.0);
  if (total == 0) {
    return h;
  }
  const double n = static_cast<double>(total);
  for (std::size_t i = 0; i < n_bins; ++i) {
    h.density[i] = static_cast<double>(counts[i]) / (n * h.width);
  }
  h.boundary_mass = static_cast<double>(zeros) / n;
  h.overflow_mass = static_cast<double>(over) / n;
  return h;
}

Histogram histogram_density(std::span<const ChainRecord> chains, std::size_t warmup,
                            std::size_t n_bins, double upper) {
  const auto d = post_warmup(chains, warmup);
  return histogram_density(d, n_bins, upper);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) {
    throw InsufficientDataError("ks_statistic: no samples");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_critical_value(std::size_t n, double level) {
  return std::sqrt(-std::log(0.5 * level) / 2.0) / std::sqrt(static_cast<double>(n));
}

std::vector<double> thin(Draws draws, std::size_t lag) {
  if (lag == 0) {
    throw DomainError("thin: lag must be positive");
  }
  std::vector<double> out;
  out.reserve(draws.size() / lag + 1);
  for (std::size_t i = 0; i < draws.size(); i += lag) {
    out.push_back(draws[i]);
  }
  return out;
}

OriginFit fit_through_origin(std::span<const double> x, std::span<const double> y,
                             std::span<const double> se) {
  if (x.size() != y.size() || x.size() != se.size() || x.empty()) {
    throw DomainError("fit_through_origin: inputs must be non-empty and of equal length");
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(se[i] > 0.0)) {
      throw DomainError("fit_through_origin: standard errors must be positive");
    }
    const double w = 1.0 / (se[i] * se[i]);
    sxy += w * x[i] * y[i];
    sxx += w * x[i] * x[i];
  }
  OriginFit fit;
  fit.slope = sxy / sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.slope * x[i];
    fit.residuals.push_back(r);
    fit.standardized.push_back(r / se[i]);
  }
  return fit;
}

double ExperimentRow::ess_per_sec() const {
  return wall_time > 0.0 ? ess_bulk / wall_time : std::numeric_limits<double>::quiet_NaN();
}

ExperimentRow summarize(std::string potential, const ModelParams& params, Algorithm algorithm,
                        std::span<const ChainRecord> chains, std::size_t n_steps, std::size_t warmup,
                        double theory_atom) {
  ExperimentRow row;
  row.potential = std::move(potential);
  row.mu = params.mu;
  row.alpha = params.alpha;
  row.algorithm = algorithm;
  row.n_steps = n_steps;
  row.n_chains = chains.size();
  row.warmup = warmup;
  row.theory_atom = theory_atom;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.boundary_frac = row.boundary_se = row.bias = row.ess_bulk = nan;
  row.acceptance = acceptance_table(chains);
  for (const auto& c : chains) {
    row.wall_time += c.wall_time;
  }
  if (n_steps <= warmup) {
    return row;  // nothing to summarize
  }
  const auto est = boundary_fraction(chains, warmup);
  row.boundary_frac = est.mean;
  row.boundary_se = est.se;
  row.bias = est.mean - theory_atom;
  try {
    row.ess_bulk = ess_bulk(chains, warmup);
  } catch (const InsufficientDataError& e) {
    detail::warn(std::string(e.what()) + "; ess reported as NaN");
    row.ess_bulk = nan;
  }
  return row;
}

}  // namespace stickycir
