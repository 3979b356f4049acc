#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixture_io.hpp"
#include "stickycir/errors.hpp"
#include "stickycir/specfun.hpp"

using namespace stickycir;
using namespace stickycir::specfun;
using testing_support::rel_err;

TEST_CASE("log_gamma reference values") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rel_err(log_gamma(0.5), 0.5 * std::log(std::numbers::pi)) < 1e-13);
  CHECK(rel_err(log_gamma(0.75), 0.203280951431295371481433) < 1e-12);
  CHECK(rel_err(specfun::gamma(0.75), 1.225416702465177645129098) < 1e-12);
}

TEST_CASE("log_gamma tracks lgamma on [0.1, 50]") {
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = 0.1 + (50.0 - 0.1) * i / 2000.0;
    const double want = std::lgamma(x);
    // Relative error is meaningless next to the zeros at 1 and 2.
    const double err = std::abs(log_gamma(x) - want) / std::max(1.0, std::abs(want));
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gamma at negative non-integers uses reflection") {
  CHECK(rel_err(specfun::gamma(-0.25), std::tgamma(-0.25)) < 1e-12);
  CHECK(rel_err(specfun::gamma(-1.5), std::tgamma(-1.5)) < 1e-12);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(-1.0), DomainError);
  CHECK_THROWS_AS(specfun::gamma(-2.0), DomainError);
  CHECK_THROWS_AS(KummerArgs(0.0, 0.75, 1.0), DomainError);
  CHECK_THROWS_AS(KummerArgs(1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(KummerArgs(1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(KummerArgs(1.0, 0.75, -1e-3), DomainError);
  CHECK_THROWS_AS(KummerArgs(1.0, 0.75, NAN), DomainError);
}

TEST_CASE("M at the origin and on the diagonal") {
  for (double a : {0.3, 2.5, 12.0}) {
    CHECK(hyp1f1({a, 0.75, 0.0}) == 1.0);
    CHECK(rel_err(hyp1f1_dz({a, 0.75, 0.0}), a / 0.75) < 1e-14);
  }
  for (double z : {0.0, 0.5, 3.0, 20.0, 60.0}) {
    CHECK(rel_err(hyp1f1({0.9, 0.9, z}), std::exp(z)) < 1e-12);
  }
}

TEST_CASE("U closed form for b = a + 1") {
  // Outside the b-box; exercised through the evaluator class only.
  for (double a : {0.25, 0.6}) {
    const Kummer k(a, a + 1.0);
    for (double z : {0.5, 2.0, 10.0, 35.0}) {
      CHECK(rel_err(k.U(z), std::pow(z, -a)) < 1e-8);
    }
  }
}

TEST_CASE("spot values") {
  CHECK(rel_err(hyp1f1({2.5, 0.75, 1.0}), 10.38202936615245258206) < 1e-12);
  CHECK(rel_err(hyperu({2.5, 0.75, 1.0}), 0.07924799186631665397865527) < 1e-10);
  CHECK(rel_err(hyperu_dz({2.5, 0.75, 1.0}), -0.0937945949899568276290172) < 1e-10);
  CHECK(rel_err(hyperu_dz({2.5, 0.75, 1.0}), -2.5 * Kummer(3.5, 1.75).U(1.0)) < 1e-12);
  const KummerArgs w{2.5, 0.75, 2.0};
  const double wr = hyp1f1(w) * hyperu_dz(w) - hyp1f1_dz(w) * hyperu(w);
  CHECK(rel_err(wr, -4.05008429927819354967889) < 1e-10);
  CHECK(rel_err(wr, -(specfun::gamma(0.75) / specfun::gamma(2.5)) * std::pow(2.0, -0.75) * std::exp(2.0)) < 1e-10);
  CHECK(std::isinf(hyperu_dz({2.5, 0.75, 0.0})));
}

TEST_CASE("oracle fixture comparison") {
  const auto rows = testing_support::load_kummer_oracle(testing_support::fixture("kummer_oracle.txt"));
  REQUIRE(rows.size() == 2000);
  double worst_m = 0.0, worst_u = 0.0, worst_dm = 0.0, worst_du = 0.0;
  for (const auto& r : rows) {
    const KummerArgs args{r.a, r.b, r.z};
    worst_m = std::max(worst_m, rel_err(hyp1f1(args), r.M));
    worst_u = std::max(worst_u, rel_err(hyperu(args), r.U));
    worst_dm = std::max(worst_dm, rel_err(hyp1f1_dz(args), r.dM));
    worst_du = std::max(worst_du, rel_err(hyperu_dz(args), r.dU));
  }
  MESSAGE("worst relative errors M=" << worst_m << " U=" << worst_u << " dM=" << worst_dm
                                     << " dU=" << worst_du);
  CHECK(worst_m <= 1e-10);
  CHECK(worst_dm <= 1e-10);
  CHECK(worst_u <= 1e-8);
  CHECK(worst_du <= 1e-8);
}

TEST_CASE("Wronskian identity on the fixture grid") {
  const auto rows = testing_support::load_kummer_oracle(testing_support::fixture("kummer_oracle.txt"));
  double worst = 0.0;
  for (const auto& r : rows) {
    const KummerArgs args{r.a, r.b, r.z};
    const double wr = hyp1f1(args) * hyperu_dz(args) - hyp1f1_dz(args) * hyperu(args);
    const double want = -std::exp(log_gamma(r.b) - log_gamma(r.a) - r.b * std::log(r.z) + r.z);
    worst = std::max(worst, rel_err(wr, want));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("U at the origin") {
  for (double a : {0.3, 1.0, 2.5, 5.0, 10.0, 12.0}) {
    for (double b : {0.55, 0.75, 0.95}) {
      const double want = std::tgamma(1.0 - b) / std::tgamma(1.0 + a - b);
      CHECK(rel_err(hyperu({a, b, 0.0}), want) <= 1e-10);
      CHECK(rel_err(Kummer(a, b).U0(), want) <= 1e-10);
    }
  }
}

TEST_CASE("monotonicity: U strictly decreasing, M increasing from 1") {
  for (double a : {0.3, 1.0, 2.5, 6.0, 12.0}) {
    for (double b : {0.55, 0.75, 0.95}) {
      const Kummer k(a, b);
      double prev_u = k.U(0.0);
      double prev_m = 1.0;
      for (int i = 1; i <= 600; ++i) {
        const double z = 0.1 * i;
        const auto v = k.MU(z);
        CHECK_MESSAGE(v.U < prev_u, "a=" << a << " b=" << b << " z=" << z);
        CHECK(v.U > 0.0);
        CHECK(v.M >= prev_m);
        prev_u = v.U;
        prev_m = v.M;
      }
    }
  }
}
