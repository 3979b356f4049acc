#pragma once

#include <array>
#include <functional>
#include <vector>

namespace stickycir::quadrature {

// 15-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre15 {
  std::array<double, 15> nodes;
  std::array<double, 15> weights;
};

const GaussLegendre15& gauss_legendre15();

// Integral of f over [lo, hi] with one 15-point panel.
double gl15(const std::function<double(double)>& f, double lo, double hi);

struct Panel {
  double lo;
  double hi;
  double mass;
};

// Adaptive composite Gauss-Legendre with interval bisection. Starts from the
// given breakpoints and bisects each panel until the one-panel and two-panel
// estimates agree to the panel's share of abs_tol. Returns accepted panels
// in increasing order. Throws IntegrabilityError on non-finite values or
// when max_depth bisections do not reach the tolerance.
std::vector<Panel> adaptive_gl15(const std::function<double(double)>& f,
                                 const std::vector<double>& breakpoints, double abs_tol,
                                 int max_depth = 40);

}  // namespace stickycir::quadrature
