#include "stickycir/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "stickycir/errors.hpp"

namespace stickycir::quadrature {

namespace {

GaussLegendre15 make_rule() {
  constexpr int n = 15;
  GaussLegendre15 rule{};
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

void refine(const std::function<double(double)>& f, double lo, double hi, double whole,
            double tol_density, int depth, int max_depth, std::vector<Panel>& out) {
  const double mid = 0.5 * (lo + hi);
  const double left = gl15(f, lo, mid);
  const double right = gl15(f, mid, hi);
  if (!std::isfinite(left) || !std::isfinite(right)) {
    throw IntegrabilityError("quadrature: non-finite integrand on [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
  }
  if (std::abs(left + right - whole) <= tol_density * (hi - lo)) {
    out.push_back({lo, mid, left});
    out.push_back({mid, hi, right});
    return;
  }
  if (depth >= max_depth) {
    throw IntegrabilityError("quadrature: tolerance not reached near " + std::to_string(lo));
  }
  refine(f, lo, mid, left, tol_density, depth + 1, max_depth, out);
  refine(f, mid, hi, right, tol_density, depth + 1, max_depth, out);
}

}  // namespace

const GaussLegendre15& gauss_legendre15() {
  static const GaussLegendre15 rule = make_rule();
  return rule;
}

double gl15(const std::function<double(double)>& f, double lo, double hi) {
  const auto& rule = gauss_legendre15();
  const double half = 0.5 * (hi - lo);
  const double centre = 0.5 * (hi + lo);
  double sum = 0.0;
  for (int i = 0; i < 15; ++i) {
    sum += rule.weights[i] * f(centre + half * rule.nodes[i]);
  }
  return half * sum;
}

std::vector<Panel> adaptive_gl15(const std::function<double(double)>& f,
                                 const std::vector<double>& breakpoints, double abs_tol,
                                 int max_depth) {
  std::vector<Panel> out;
  if (breakpoints.size() < 2) {
    return out;
  }
  const double span = breakpoints.back() - breakpoints.front();
  const double tol_density = abs_tol / span;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double lo = breakpoints[i];
    const double hi = breakpoints[i + 1];
    const double whole = gl15(f, lo, hi);
    if (!std::isfinite(whole)) {
      throw IntegrabilityError("quadrature: non-finite integrand on [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "]");
    }
    refine(f, lo, hi, whole, tol_density, 0, max_depth, out);
  }
  return out;
}

}  // namespace stickycir::quadrature
