#pragma once

// Gamma function and Kummer's confluent hypergeometric functions M(a,b,z)
// and U(a,b,z) for real a > 0, non-integer b and z >= 0.
//
// Accuracy box (checked against an extended-precision fixture):
//   a in (0, 12], b in (0.5, 1), z in [0, 60]
//   M and dM/dz: relative error <= 1e-10; U and dU/dz: <= 1e-8.

namespace stickycir::specfun {

double log_gamma(double x);

// Gamma(x) for any real x that is not a non-positive integer.
double gamma(double x);

struct KummerArgs {
  double a;
  double b;
  double z;

  // Rejects a <= 0, b outside (0,1), z < 0 or non-finite input.
  KummerArgs(double a, double b, double z);
};

double hyp1f1(const KummerArgs& args);
double hyperu(const KummerArgs& args);
double hyp1f1_dz(const KummerArgs& args);
// -infinity at z = 0 (U has a z^(1-b) branch at the origin).
double hyperu_dz(const KummerArgs& args);

// Evaluator for fixed (a, b) that caches the gamma-function constants.
// Accepts any a > 0 and non-integer b, so it also serves the shifted
// parameters (a+1, b+1) of the derivatives.
class Kummer {
 public:
  Kummer(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }

  double M(double z) const;
  double U(double z) const;

  struct Values {
    double M;
    double U;
  };
  // Both functions at one point; shares the M series with U where possible.
  Values MU(double z) const;

  // U(a, b, 0) = Gamma(1-b)/Gamma(1+a-b); +infinity when b > 1.
  double U0() const { return u0_; }

 private:
  double U_with_M(double z, double m) const;
  bool U_asymptotic(double z, double& out) const;
  double U_integral(double z) const;

  double a_;
  double b_;
  double u0_;
  double conn_first_;   // Gamma(1-b)/Gamma(a+1-b)
  double conn_second_;  // Gamma(b-1)/Gamma(a)
  double log_gamma_a_;
};

namespace detail {
// Taylor series of 1F1 with positive terms; throws NumericError after 500 terms.
double hyp1f1_series(double a, double b, double z);
}  // namespace detail

}  // namespace stickycir::specfun
