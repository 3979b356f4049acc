#include "stickycir/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "stickycir/errors.hpp"

namespace stickycir::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos approximation, g = 7, nine coefficients.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

std::string describe(double a, double b, double z) {
  std::ostringstream os;
  os.precision(17);
  os << "(a=" << a << ", b=" << b << ", z=" << z << ")";
  return os.str();
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Beyond this cancellation ratio the connection formula is abandoned.
constexpr double kMaxCancellation = 1e5;
constexpr double kConnectionMaxZ = 30.0;
constexpr double kAsymptoticMinZ = 15.0;
// Trapezoid step in the log variable of the integral representation.
constexpr double kLogStep = 0.2;

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " +
                      std::to_string(x));
  }
  if (x < 0.5) {
    // Reflection; sin(pi x) > 0 on (0, 0.5).
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  }
  const double xm1 = x - 1.0;
  double series = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    series += kLanczos[i] / (xm1 + static_cast<double>(i));
  }
  const double t = xm1 + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (xm1 + 0.5) * std::log(t) - t + std::log(series);
}

double gamma(double x) {
  if (!std::isfinite(x) || is_nonpositive_integer(x)) {
    throw DomainError("gamma: pole or non-finite argument " + std::to_string(x));
  }
  if (x > 0.0) {
    return std::exp(log_gamma(x));
  }
  return kPi / (std::sin(kPi * x) * std::exp(log_gamma(1.0 - x)));
}

KummerArgs::KummerArgs(double a_, double b_, double z_) : a(a_), b(b_), z(z_) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("KummerArgs: a must be positive " + describe(a, b, z));
  }
  if (!(b > 0.0 && b < 1.0)) {
    throw DomainError("KummerArgs: b must lie in (0,1) " + describe(a, b, z));
  }
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw DomainError("KummerArgs: z must be non-negative " + describe(a, b, z));
  }
}

namespace detail {

double hyp1f1_series(double a, double b, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 500; ++n) {
    term *= (a + n) / (b + n) * z / (n + 1);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) {
      return sum;
    }
  }
  throw NumericError("hyp1f1: series did not converge in 500 terms " + describe(a, b, z));
}

}  // namespace detail

namespace {

// 1/Gamma(x), zero at the poles.
double reciprocal_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) {
    return 0.0;
  }
  return 1.0 / gamma(x);
}

}  // namespace

Kummer::Kummer(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b) || b <= 0.0 ||
      b == std::floor(b)) {
    throw DomainError("Kummer: need a > 0 and non-integer b > 0 " + describe(a, b, 0.0));
  }
  conn_first_ = gamma(1.0 - b) * reciprocal_gamma(a + 1.0 - b);
  conn_second_ = gamma(b - 1.0) / gamma(a);
  u0_ = b < 1.0 ? conn_first_ : std::numeric_limits<double>::infinity();
  log_gamma_a_ = log_gamma(a);
}

double Kummer::M(double z) const { return detail::hyp1f1_series(a_, b_, z); }

double Kummer::U(double z) const {
  return U_with_M(z, std::numeric_limits<double>::quiet_NaN());
}

Kummer::Values Kummer::MU(double z) const {
  const double m = M(z);
  return {m, U_with_M(z, m)};
}

double Kummer::U_with_M(double z, double m) const {
  if (z == 0.0) {
    return u0_;
  }
  double out = 0.0;
  if (z > kAsymptoticMinZ && U_asymptotic(z, out)) {
    return out;
  }
  if (z <= kConnectionMaxZ) {
    if (std::isnan(m)) {
      m = M(z);
    }
    // U = Gamma(1-b)/Gamma(a+1-b) M(a,b,z)
    //   + Gamma(b-1)/Gamma(a) z^(1-b) M(a-b+1, 2-b, z)
    const double first = conn_first_ * m;
    const double second = conn_second_ * std::pow(z, 1.0 - b_) *
                          detail::hyp1f1_series(a_ - b_ + 1.0, 2.0 - b_, z);
    const double u = first + second;
    if (u > 0.0 && std::abs(first) + std::abs(second) <= kMaxCancellation * u) {
      return u;
    }
  }
  if (z <= kAsymptoticMinZ && U_asymptotic(z, out)) {
    return out;
  }
  return U_integral(z);
}

// Poincare series z^-a sum (a)_n (a-b+1)_n / n! (-z)^-n, truncated at its
// smallest term. Succeeds only if that term is below double precision.
bool Kummer::U_asymptotic(double z, double& out) const {
  const double c = a_ - b_ + 1.0;
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 200; ++n) {
    const double next = -term * (a_ + n) * (c + n) / ((n + 1) * z);
    if (std::abs(next) >= std::abs(term)) {
      return false;
    }
    sum += next;
    term = next;
    if (std::abs(term) < 1e-16 * std::abs(sum)) {
      out = std::pow(z, -a_) * sum;
      return true;
    }
  }
  return false;
}

// U = 1/Gamma(a) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt with t = e^v.
// The integrand is log-concave in v and analytic in a strip, so the plain
// trapezoid rule on the real line converges geometrically in 1/step.
double Kummer::U_integral(double z) const {
  const double expo = b_ - a_ - 1.0;
  auto log_integrand = [&](double v) {
    const double t = std::exp(v);
    return a_ * v - z * t + expo * std::log1p(t);
  };
  const double c1 = z + 1.0 - b_;
  const double t_mode = 2.0 * a_ / (c1 + std::sqrt(c1 * c1 + 4.0 * z * a_));
  const double v_mode = std::log(t_mode);
  const double peak = log_integrand(v_mode);

  double sum = 1.0;
  for (const double dir : {-1.0, 1.0}) {
    for (int k = 1;; ++k) {
      if (k > 50000) {
        throw NumericError("hyperu: integral representation did not converge " +
                           describe(a_, b_, z));
      }
      const double term = std::exp(log_integrand(v_mode + dir * k * kLogStep) - peak);
      sum += term;
      if (term < 1e-18 * sum) {
        break;
      }
    }
  }
  return std::exp(peak - log_gamma_a_) * kLogStep * sum;
}

double hyp1f1(const KummerArgs& args) { return detail::hyp1f1_series(args.a, args.b, args.z); }

double hyperu(const KummerArgs& args) { return Kummer(args.a, args.b).U(args.z); }

double hyp1f1_dz(const KummerArgs& args) {
  return args.a / args.b * detail::hyp1f1_series(args.a + 1.0, args.b + 1.0, args.z);
}

double hyperu_dz(const KummerArgs& args) {
  if (args.z == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  return -args.a * Kummer(args.a + 1.0, args.b + 1.0).U(args.z);
}

}  // namespace stickycir::specfun
