#include <cmath>
#include <numeric>

#include "doctest.h"
#include "stickycir/errors.hpp"
#include "stickycir/samplers.hpp"

using namespace stickycir;

namespace {

ModelParams base(double mu = 1.0, double alpha = 5.0) {
  ModelParams p;
  p.mu = mu;
  p.alpha = alpha;
  return p;
}

const ResolventTable& table5() {
  static const ResolventTable t = build_table(base());
  return t;
}

double zero_fraction(const std::vector<double>& s, std::size_t skip) {
  std::size_t zeros = 0;
  for (std::size_t i = skip; i < s.size(); ++i) {
    zeros += s[i] == 0.0;
  }
  return double(zeros) / double(s.size() - skip);
}

}  // namespace

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("exact") == Algorithm::Exact);
  CHECK(parse_algorithm("mcmc") == Algorithm::Mcmc);
  CHECK(parse_algorithm("ula") == Algorithm::Ula);
  CHECK(to_string(Algorithm::Ula) == "ula");
  CHECK_THROWS_AS(parse_algorithm("hmc"), ConfigError);
}

TEST_CASE("clamped Euler map") {
  const EulerMap quad(0.2, Potential::quadratic());
  CHECK(quad(0.0) == 0.0);
  CHECK(quad(1.0) == doctest::Approx(0.8));
  const EulerMap lin(0.5, Potential::linear2u());
  CHECK(lin(0.8) == 0.0);  // routed to the boundary
  CHECK(lin(1.5) == doctest::Approx(0.5));
  const EulerMap shifted(0.2, Potential::shifted_quadratic());
  CHECK(shifted(0.5) == doctest::Approx(0.6));
  const EulerMap flat(0.2, Potential::zero());
  CHECK(flat(1.2345) == 1.2345);
  CHECK_THROWS_AS(EulerMap(0.0, Potential::zero()), DomainError);
}

TEST_CASE("log rho spot values") {
  const auto& t = table5();
  const auto G = Potential::shifted_quadratic();
  CHECK(std::abs(mh_log_rho(t, G, 0.2, {MoveType::IntToInt, 0.8, 1.2}) - (-0.048886915258715107017)) <
        1e-9);
  CHECK(std::abs(mh_log_rho(t, G, 0.2, {MoveType::IntTo0, 0.8, 0.0}) - (-0.85875092328042909209)) <
        1e-9);
  CHECK(std::abs(mh_log_rho(t, G, 0.2, {MoveType::ZeroToInt, 0.0, 1.2}) - 1.0489718099610456412) <
        1e-9);
  const auto t2 = build_table(base(1.0, 2.0));
  CHECK(std::abs(mh_log_rho(t2, Potential::linear2u(), 0.5, {MoveType::IntTo0, 0.8, 0.0}) -
                 1.4494495776137806663) < 1e-9);
}

TEST_CASE("log rho antisymmetry between the boundary branches") {
  const auto& t = table5();
  for (auto tag : {PotentialTag::Quadratic, PotentialTag::ShiftedQuadratic, PotentialTag::Cubic,
                   PotentialTag::Linear2u}) {
    const auto G = Potential::from_tag(tag);
    for (double y : {0.05, 0.4, 1.0, 2.5}) {
      CHECK(mh_log_rho(t, G, 0.2, {MoveType::ZeroToInt, 0.0, y}) ==
            -mh_log_rho(t, G, 0.2, {MoveType::IntTo0, y, 0.0}));
    }
  }
}

TEST_CASE("log rho rejects inconsistent moves") {
  const auto& t = table5();
  const auto G = Potential::quadratic();
  CHECK_THROWS_AS(mh_log_rho(t, G, 0.2, {MoveType::IntToInt, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(mh_log_rho(t, G, 0.2, {MoveType::IntTo0, 1.0, 0.5}), DomainError);
  CHECK_THROWS_AS(mh_log_rho(t, G, 0.2, {MoveType::ZeroToInt, 0.3, 1.0}), DomainError);
}

TEST_CASE("zero potential: log rho vanishes") {
  const auto& t = table5();
  const auto G = Potential::zero();
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double x = 0.01 + 4.0 * rng.uniform();
    const double y = 0.01 + 4.0 * rng.uniform();
    worst = std::max(worst, std::abs(mh_log_rho(t, G, 0.2, {MoveType::IntToInt, x, y})));
    worst = std::max(worst, std::abs(mh_log_rho(t, G, 0.2, {MoveType::IntTo0, x, 0.0})));
    worst = std::max(worst, std::abs(mh_log_rho(t, G, 0.2, {MoveType::ZeroToInt, 0.0, y})));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("exact chain basics") {
  const auto& t = table5();
  Rng rng(3);
  const auto empty = run_exact(t, 0, 0.7, rng);
  CHECK(empty.states == std::vector<double>{0.7});
  CHECK(empty.algorithm == Algorithm::Exact);

  Rng a(42), b(42);
  const auto r1 = run_exact(t, 5000, 1.0, a);
  const auto r2 = run_exact(t, 5000, 1.0, b);
  CHECK(r1.states == r2.states);
  CHECK(r1.seed == 42);
  CHECK(r1.states.size() == 5001);
  for (const auto& c : r1.counts) {
    CHECK(c.accepted == c.proposed);
  }
  for (double s : r1.states) {
    CHECK(s >= 0.0);
  }
  CHECK_THROWS_AS(run_exact(t, 10, -1.0, rng), DomainError);
  CHECK_THROWS_AS(run_exact(t, 10, t.y_max() + 1.0, rng), DomainError);
}

TEST_CASE("exact chains spend the invariant fraction of time at 0") {
  const auto& t = table5();
  const double atom = 0.44935404631962294983;
  std::vector<double> fracs;
  for (std::uint64_t c = 0; c < 4; ++c) {
    Rng rng(derive_seed(2024, {c}));
    fracs.push_back(zero_fraction(run_exact(t, 50000, 1.0, rng).states, 1000));
  }
  const double mean = std::accumulate(fracs.begin(), fracs.end(), 0.0) / 4.0;
  double var = 0.0;
  for (double f : fracs) {
    var += (f - mean) * (f - mean);
  }
  const double se = std::sqrt(var / 3.0 / 4.0);
  CHECK(std::abs(mean - atom) <= 3.0 * se + 1e-3);
}

TEST_CASE("MH with zero potential accepts everything") {
  const auto& t = table5();
  Rng rng(8);
  const auto rec = run_mcmc(t, Potential::zero(), 10000, 0.5, rng);
  std::uint64_t proposed = 0;
  for (const auto& c : rec.counts) {
    CHECK(c.accepted == c.proposed);
    proposed += c.proposed;
  }
  CHECK(proposed > 5000);
}

TEST_CASE("MH counters and rejections") {
  const auto& t = table5();
  Rng rng(9);
  const auto rec = run_mcmc(t, Potential::linear2u(), 20000, 1.0, rng);
  CHECK(rec.algorithm == Algorithm::Mcmc);
  std::uint64_t accepted = 0;
  for (const auto& c : rec.counts) {
    CHECK(c.accepted <= c.proposed);
    CHECK(c.proposed > 0);
    accepted += c.accepted;
  }
  std::uint64_t changes = 0;
  for (std::size_t k = 1; k < rec.states.size(); ++k) {
    changes += rec.states[k] != rec.states[k - 1];
  }
  CHECK(changes <= accepted);
  CHECK(rec.counter(MoveType::IntToInt).accepted < rec.counter(MoveType::IntToInt).proposed);

  Rng a(77), b(77);
  CHECK(run_mcmc(t, Potential::cubic(), 3000, 0.0, a).states ==
        run_mcmc(t, Potential::cubic(), 3000, 0.0, b).states);
}

TEST_CASE("ULA reduces to the exact chain at zero potential") {
  const auto& t = table5();
  Rng a(123), b(123);
  const auto exact = run_exact(t, 20000, 0.3, a);
  const auto ula = run_ula(base(), Potential::zero(), 20000, 0.3, b);
  CHECK(ula.algorithm == Algorithm::Ula);
  CHECK(exact.states == ula.states);
}

TEST_CASE("ULA effective stickiness") {
  const auto p = ula_params(base(2.0), Potential::shifted_quadratic());
  CHECK(p.mu == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-15));
  CHECK(ula_params(base(2.0), Potential::quadratic()).mu == 2.0);
  Rng rng(4);
  const auto rec = run_ula(base(), Potential::shifted_quadratic(), 2000, 1.0, rng);
  for (const auto& c : rec.counts) {
    CHECK(c.accepted == c.proposed);
  }
}

TEST_CASE("ULA plain stickiness keeps mu") {
  const auto pot = Potential::shifted_quadratic();
  CHECK(ula_params(base(2.0), pot, UlaBoundary::Plain).mu == 2.0);
  CHECK(parse_ula_boundary("plain") == UlaBoundary::Plain);
  CHECK(parse_ula_boundary("effective") == UlaBoundary::Effective);
  CHECK_THROWS_AS(parse_ula_boundary("other"), ConfigError);
  // A constant shift of G leaves the plain chain untouched.
  const auto shifted = Potential::custom([](double u) { return 0.5 * u * u + 3.0; },
                                         [](double u) { return u; }, 10.0, "shifted");
  Rng a(8), b(8);
  const auto x = run_ula(base(), Potential::quadratic(), 3000, 1.0, a, 4000, default_table_cache(),
                         UlaBoundary::Plain);
  const auto y = run_ula(base(), shifted, 3000, 1.0, b, 4000, default_table_cache(), UlaBoundary::Plain);
  CHECK(x.states == y.states);
}
