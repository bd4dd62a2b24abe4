#include "deeprm/comparison_models.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "deeprm/error.hpp"

namespace deeprm {
namespace {

constexpr std::array<Outcome, 2> kBinaryOutcomes = {-1, 1};
constexpr std::array<Outcome, 3> kTernaryOutcomes = {-1, 0, 1};

// Beyond this the logistic is 1 to within double rounding.
constexpr double kLogisticSaturation = 36.0;
// Below this log Phi switches to the continued-fraction tail.
constexpr double kNormalTailCutoff = -8.0;

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// sigma'(x) = sigma(x) sigma(-x).
double sigmoid_slope(double x) { return sigmoid(x) * sigmoid(-x); }

// Mills ratio Phi(-z) / phi(z) for z > 0, by backward evaluation of
// 1 / (z + 1/(z + 2/(z + 3/(z + ...)))).
double mills_ratio(double z) {
  double f = z;
  for (int k = 80; k >= 1; --k) f = z + k / f;
  return 1.0 / f;
}

// phi(u) / Phi(u), the derivative of log Phi.
double normal_hazard(double u) {
  if (u < kNormalTailCutoff) return 1.0 / mills_ratio(-u);
  return normal_pdf(u) / normal_cdf(u);
}

void check_outcome(const ComparisonModel& model, Outcome y) {
  if (!model.admits(y))
    throw DomainError("outcome " + std::to_string(y) + " not in the outcome space of " +
                      std::string(to_string(model.kind)));
}

struct DavidsonMasses {
  double win, loss, tie, log_norm;
};

DavidsonMasses davidson_masses(double nu, double u) {
  double a = 0.5 * u, b = -0.5 * u, c = std::log(nu);
  double m = std::max({a, b, c});
  double lz = m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
  return {std::exp(a - lz), std::exp(b - lz), std::exp(c - lz), lz};
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::BT: return "bt";
    case ModelKind::Thurstonian: return "thurstonian";
    case ModelKind::RaoKupper: return "rao-kupper";
    case ModelKind::Davidson: return "davidson";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bt" || lower == "bradley-terry") return ModelKind::BT;
  if (lower == "thurstonian" || lower == "probit") return ModelKind::Thurstonian;
  if (lower == "rao-kupper" || lower == "raokupper") return ModelKind::RaoKupper;
  if (lower == "davidson") return ModelKind::Davidson;
  throw ConfigError("unknown comparison model '" + std::string(name) + "'");
}

ComparisonModel ComparisonModel::rao_kupper(double theta) {
  ComparisonModel m{ModelKind::RaoKupper, theta};
  m.validate();
  return m;
}

ComparisonModel ComparisonModel::davidson(double nu) {
  ComparisonModel m{ModelKind::Davidson, nu};
  m.validate();
  return m;
}

ComparisonModel ComparisonModel::make(ModelKind kind) {
  switch (kind) {
    case ModelKind::BT: return bradley_terry();
    case ModelKind::Thurstonian: return thurstonian();
    case ModelKind::RaoKupper: return rao_kupper(1.5);
    case ModelKind::Davidson: return davidson(1.0);
  }
  throw ConfigError("unknown comparison model");
}

bool ComparisonModel::admits(Outcome y) const {
  if (y == 1 || y == -1) return true;
  return y == 0 && outcome_space() == OutcomeSpace::Ternary;
}

std::span<const Outcome> ComparisonModel::outcomes() const {
  if (is_binary()) return kBinaryOutcomes;
  return kTernaryOutcomes;
}

void ComparisonModel::validate() const {
  if (kind == ModelKind::RaoKupper && !(tie_param > 1.0))
    throw DomainError("Rao-Kupper threshold must exceed 1");
  if (kind == ModelKind::Davidson && !(tie_param > 0.0))
    throw DomainError("Davidson tie weight must be positive");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) { return -softplus(-x); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2)); }

double log_normal_cdf(double x) {
  if (x < kNormalTailCutoff) {
    double z = -x;
    return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(mills_ratio(z));
  }
  if (x > 0.0) return std::log1p(-normal_cdf(-x));
  return std::log(normal_cdf(x));
}

double log_density(const ComparisonModel& model, Outcome y, double u) {
  check_outcome(model, y);
  switch (model.kind) {
    case ModelKind::BT:
      return log_sigmoid(y * u);
    case ModelKind::Thurstonian:
      return log_normal_cdf(y * u);
    case ModelKind::RaoKupper: {
      double lt = std::log(model.tie_param);
      if (y == 1) return log_sigmoid(u - lt);
      if (y == -1) return log_sigmoid(-u - lt);
      return std::log(model.tie_param * model.tie_param - 1.0) + u - lt - softplus(u - lt) -
             softplus(u + lt);
    }
    case ModelKind::Davidson: {
      auto m = davidson_masses(model.tie_param, u);
      if (y == 1) return 0.5 * u - m.log_norm;
      if (y == -1) return -0.5 * u - m.log_norm;
      return std::log(model.tie_param) - m.log_norm;
    }
  }
  throw ConfigError("unknown comparison model");
}

double density(const ComparisonModel& model, Outcome y, double u) {
  check_outcome(model, y);
  switch (model.kind) {
    case ModelKind::BT:
      return sigmoid(y * u);
    case ModelKind::Thurstonian:
      return normal_cdf(y * u);
    case ModelKind::RaoKupper: {
      double lt = std::log(model.tie_param);
      double win = sigmoid(u - lt), loss = sigmoid(-u - lt);
      if (y == 1) return win;
      if (y == -1) return loss;
      return std::exp(log_density(model, 0, u));
    }
    case ModelKind::Davidson: {
      auto m = davidson_masses(model.tie_param, u);
      return y == 1 ? m.win : (y == -1 ? m.loss : m.tie);
    }
  }
  throw ConfigError("unknown comparison model");
}

double dlog_density_du(const ComparisonModel& model, Outcome y, double u) {
  check_outcome(model, y);
  switch (model.kind) {
    case ModelKind::BT:
      return y * sigmoid(-y * u);
    case ModelKind::Thurstonian:
      return y * normal_hazard(y * u);
    case ModelKind::RaoKupper: {
      double lt = std::log(model.tie_param);
      if (y == 1) return sigmoid(lt - u);
      if (y == -1) return -sigmoid(u + lt);
      return 1.0 - sigmoid(u - lt) - sigmoid(u + lt);
    }
    case ModelKind::Davidson: {
      auto m = davidson_masses(model.tie_param, u);
      double drift = 0.5 * (m.win - m.loss);
      return 0.5 * y - drift;
    }
  }
  throw ConfigError("unknown comparison model");
}

double d2log_density_du2(const ComparisonModel& model, Outcome y, double u) {
  check_outcome(model, y);
  switch (model.kind) {
    case ModelKind::BT:
      return -sigmoid_slope(u);
    case ModelKind::Thurstonian: {
      // For v = y u: d2/dv2 log Phi(v) = -h (v + h) with h = phi(v)/Phi(v).
      double v = y * u;
      double h = normal_hazard(v);
      return -h * (v + h);
    }
    case ModelKind::RaoKupper: {
      double lt = std::log(model.tie_param);
      if (y == 1) return -sigmoid_slope(u - lt);
      if (y == -1) return -sigmoid_slope(u + lt);
      return -sigmoid_slope(u - lt) - sigmoid_slope(u + lt);
    }
    case ModelKind::Davidson: {
      // Same for every outcome: minus the variance of y/2 under g(., u).
      auto m = davidson_masses(model.tie_param, u);
      double diff = m.win - m.loss;
      return -0.25 * ((m.win + m.loss) - diff * diff);
    }
  }
  throw ConfigError("unknown comparison model");
}

double win_probability(const ComparisonModel& model, double u) { return density(model, 1, u); }

double tie_probability(const ComparisonModel& model, double u) {
  return model.is_binary() ? 0.0 : density(model, 0, u);
}

Outcome sample_outcome(const ComparisonModel& model, double u, Rng& rng) {
  double draw = uniform01(rng);
  if (model.kind == ModelKind::BT) {
    if (u >= kLogisticSaturation) return 1;
    if (u <= -kLogisticSaturation) return -1;
  }
  double win = win_probability(model, u);
  if (draw < win) return 1;
  if (draw < win + tie_probability(model, u)) return 0;
  return -1;
}

KappaConstants kappa_constants(const ComparisonModel& model, double c_rstar) {
  if (!(c_rstar > 0.0)) throw DomainError("kappa_constants requires c_rstar > 0");
  KappaConstants k;
  k.c_rstar = c_rstar;
  switch (model.kind) {
    case ModelKind::BT:
      // All extremes sit at |u| = c: |log g| and |d log g| peak at the losing
      // end, |d2 log g| = sigma(u) sigma(-u) bottoms out at the boundary.
      k.kappa0 = softplus(c_rstar);
      k.kappa1 = sigmoid(c_rstar);
      k.kappa2 = sigmoid_slope(c_rstar);
      return k;
    case ModelKind::Thurstonian:
      // The hazard phi/Phi is decreasing and so is h (v + h).
      k.kappa0 = -log_normal_cdf(-c_rstar);
      k.kappa1 = normal_hazard(-c_rstar);
      {
        double h = normal_hazard(c_rstar);
        k.kappa2 = h * (c_rstar + h);
      }
      return k;
    case ModelKind::RaoKupper:
    case ModelKind::Davidson:
      break;
  }
  constexpr double kStep = 1e-4;
  const long steps = static_cast<long>(std::ceil(2.0 * c_rstar / kStep));
  k.kappa2 = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= steps; ++i) {
    double u = (i == steps) ? c_rstar : -c_rstar + static_cast<double>(i) * kStep;
    for (Outcome y : model.outcomes()) {
      k.kappa0 = std::max(k.kappa0, std::abs(log_density(model, y, u)));
      k.kappa1 = std::max(k.kappa1, std::abs(dlog_density_du(model, y, u)));
      k.kappa2 = std::min(k.kappa2, std::abs(d2log_density_du2(model, y, u)));
    }
  }
  return k;
}

}  // namespace deeprm
