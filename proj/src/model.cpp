#include "stickycir/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stickycir/errors.hpp"
#include "stickycir/specfun.hpp"

namespace stickycir {

namespace {

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

constexpr double kTailExponent = 32.0;
constexpr double kQuadratureTol = 1e-10;
constexpr double kFirstPanel = 1e-3;
constexpr int kUniformPanels = 32;

}  // namespace

void ModelParams::validate() const {
  std::ostringstream os;
  if (!positive_finite(lambda)) os << " lambda=" << lambda;
  if (!positive_finite(beta)) os << " beta=" << beta;
  if (!(delta > 1.0 && delta < 2.0)) os << " delta=" << delta << " (need 1<delta<2)";
  if (!positive_finite(mu)) os << " mu=" << mu;
  if (!positive_finite(alpha)) os << " alpha=" << alpha;
  const std::string bad = os.str();
  if (!bad.empty()) {
    throw DomainError("invalid model parameters:" + bad);
  }
}

std::string_view to_string(PotentialTag tag) {
  switch (tag) {
    case PotentialTag::Zero: return "zero";
    case PotentialTag::Quadratic: return "quadratic";
    case PotentialTag::ShiftedQuadratic: return "shifted_quadratic";
    case PotentialTag::Cubic: return "cubic";
    case PotentialTag::Linear2u: return "linear2u";
    case PotentialTag::Custom: return "custom";
  }
  return "unknown";
}

PotentialTag parse_potential_tag(std::string_view name) {
  for (auto tag : {PotentialTag::Zero, PotentialTag::Quadratic, PotentialTag::ShiftedQuadratic,
                   PotentialTag::Cubic, PotentialTag::Linear2u}) {
    if (name == to_string(tag)) {
      return tag;
    }
  }
  throw ConfigError("unknown potential '" + std::string(name) +
                    "' (expected zero, quadratic, shifted_quadratic, cubic or linear2u)");
}

Potential::Potential(PotentialTag tag, std::string name, Fn value, Fn slope,
                     std::optional<double> y_cut)
    : tag_(tag),
      name_(std::move(name)),
      value_(std::move(value)),
      slope_(std::move(slope)),
      y_cut_(y_cut) {}

Potential Potential::zero() {
  return {PotentialTag::Zero, "zero", [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Potential Potential::quadratic() {
  return {PotentialTag::Quadratic, "quadratic", [](double u) { return 0.5 * u * u; },
          [](double u) { return u; }};
}

Potential Potential::shifted_quadratic() {
  return {PotentialTag::ShiftedQuadratic, "shifted_quadratic",
          [](double u) { return 0.5 * (u - 1.0) * (u - 1.0); }, [](double u) { return u - 1.0; }};
}

Potential Potential::cubic() {
  return {PotentialTag::Cubic, "cubic", [](double u) { return u * u * u / 3.0; },
          [](double u) { return u * u; }};
}

Potential Potential::linear2u() {
  return {PotentialTag::Linear2u, "linear2u", [](double u) { return 2.0 * u; },
          [](double) { return 2.0; }};
}

Potential Potential::from_tag(PotentialTag tag) {
  switch (tag) {
    case PotentialTag::Zero: return zero();
    case PotentialTag::Quadratic: return quadratic();
    case PotentialTag::ShiftedQuadratic: return shifted_quadratic();
    case PotentialTag::Cubic: return cubic();
    case PotentialTag::Linear2u: return linear2u();
    case PotentialTag::Custom: break;
  }
  throw DomainError("Potential::from_tag: custom potentials need explicit functions");
}

Potential Potential::custom(Fn value, Fn slope, double y_cut, std::string name) {
  if (!positive_finite(y_cut)) {
    throw DomainError("custom potential needs a positive finite y_cut");
  }
  Potential p{PotentialTag::Custom, std::move(name), std::move(value), std::move(slope), y_cut};
  const double mismatch = derivative_mismatch(p);
  if (!(mismatch <= 1e-6)) {
    throw DomainError("custom potential: slope does not match value (relative error " +
                      std::to_string(mismatch) + ")");
  }
  return p;
}

double derivative_mismatch(const Potential& potential) {
  constexpr double step = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double u = 0.1 + (4.0 - 0.1) * i / 15.0;
    const double fd = (potential.value(u + step) - potential.value(u - step)) / (2.0 * step);
    const double exact = potential.slope(u);
    worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
  }
  return worst;
}

double speed_density(const ModelParams& params, const Potential& potential, double y) {
  if (!(y > 0.0)) {
    throw DomainError("speed_density: y must be positive");
  }
  return params.beta * std::pow(y, params.delta - 1.0) *
         std::exp(-params.z_of(y) - params.beta * potential.value(y));
}

double scale_density(const ModelParams& params, const Potential& potential, double y) {
  if (!(y > 0.0)) {
    throw DomainError("scale_density: y must be positive");
  }
  return std::pow(y, 1.0 - params.delta) *
         std::exp(params.z_of(y) + params.beta * potential.value(y));
}

double interior_cutoff(const ModelParams& params, const Potential& potential) {
  if (potential.y_cut()) {
    return *potential.y_cut();
  }
  // lambda beta y^2 / 2 = 32 + beta max(0, -G(y)), by fixed-point iteration.
  double y = std::sqrt(2.0 * kTailExponent / (params.lambda * params.beta));
  for (int it = 0; it < 50; ++it) {
    const double lift = params.beta * std::max(0.0, -potential.value(y));
    const double next = std::sqrt(2.0 * (kTailExponent + lift) / (params.lambda * params.beta));
    if (std::abs(next - y) < 1e-12 * y) {
      return next;
    }
    y = next;
  }
  return y;
}

double zero_potential_interior_mass(const ModelParams& params) {
  const double lb = params.lambda * params.beta;
  return std::pow(2.0 / lb, (params.delta - 2.0) / 2.0) * specfun::gamma(params.delta / 2.0) /
         params.lambda;
}

InvariantMeasure::InvariantMeasure(ModelParams params, Potential potential)
    : params_(params), potential_(std::move(potential)) {}

double InvariantMeasure::interior_density(double y) const {
  if (!(y > 0.0)) {
    return 0.0;
  }
  return speed_density(params_, potential_, y) / normalizer_;
}

double InvariantMeasure::unnormalized_cumulative(double y) const {
  if (y <= 0.0) {
    return 0.0;
  }
  if (y >= y_cut_) {
    return interior_integral_;
  }
  auto it = std::upper_bound(panels_.begin(), panels_.end(), y,
                             [](double v, const quadrature::Panel& p) { return v < p.lo; });
  const std::size_t i = static_cast<std::size_t>(std::distance(panels_.begin(), it)) - 1;
  auto f = [this](double v) { return v > 0.0 ? speed_density(params_, potential_, v) : 0.0; };
  return cumulative_[i] + quadrature::gl15(f, panels_[i].lo, y);
}

double InvariantMeasure::interior_cdf(double y) const {
  if (std::isinf(y) && y > 0.0) {
    return 1.0;
  }
  return std::clamp(unnormalized_cumulative(y) / interior_integral_, 0.0, 1.0);
}

double InvariantMeasure::interior_mass(double lo, double hi) const {
  return (unnormalized_cumulative(hi) - unnormalized_cumulative(lo)) / normalizer_;
}

InvariantMeasure invariant_measure(const ModelParams& params, const Potential& potential) {
  params.validate();
  InvariantMeasure m(params, potential);
  m.y_cut_ = interior_cutoff(params, potential);

  std::vector<double> breaks{0.0, std::min(kFirstPanel, 0.5 * m.y_cut_)};
  for (int i = 1; i <= kUniformPanels; ++i) {
    breaks.push_back(breaks[1] + (m.y_cut_ - breaks[1]) * i / kUniformPanels);
  }
  auto f = [&](double v) { return v > 0.0 ? speed_density(params, potential, v) : 0.0; };
  m.panels_ = quadrature::adaptive_gl15(f, breaks, kQuadratureTol);

  double total = 0.0;
  m.cumulative_.reserve(m.panels_.size());
  for (const auto& p : m.panels_) {
    m.cumulative_.push_back(total);
    total += p.mass;
  }
  m.interior_integral_ = total;

  const double atom = std::exp(-params.beta * potential.value(0.0)) / params.mu;
  if (!std::isfinite(atom) || !std::isfinite(total)) {
    throw IntegrabilityError("invariant_measure: exp(-beta G) is not integrable");
  }
  // The truncated tail must be negligible relative to the total mass.
  const double edge = f(m.y_cut_) * m.y_cut_;
  if (!(edge <= 1e-10 * (atom + total))) {
    throw IntegrabilityError("invariant_measure: density not negligible at y_cut=" +
                             std::to_string(m.y_cut_) + "; potential may be unbounded below");
  }
  m.normalizer_ = atom + total;
  m.atom_mass_ = atom / m.normalizer_;
  return m;
}

double interior_cdf(const InvariantMeasure& measure, double y) { return measure.interior_cdf(y); }

}  // namespace stickycir
