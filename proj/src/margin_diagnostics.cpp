#include "deeprm/margin_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "deeprm/error.hpp"

namespace deeprm {
namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("regression abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

void check_rate_params(double alpha, double beta, std::size_t d) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (d == 0) throw DomainError("dimension must be positive");
}

}  // namespace

std::vector<double> linear_grid(double t_min, double t_max, std::size_t points) {
  if (points < 2 || !(t_max > t_min)) throw DomainError("grid needs t_min < t_max and 2+ points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

std::vector<double> log_grid(double t_min, double t_max, std::size_t points) {
  if (!(t_min > 0.0)) throw DomainError("log grid needs t_min > 0");
  auto grid = linear_grid(std::log(t_min), std::log(t_max), points);
  for (double& t : grid) t = std::exp(t);
  grid.front() = t_min;
  grid.back() = t_max;
  return grid;
}

std::vector<double> margin_values(const GroundTruthReward& gt, const ComparisonModel& model,
                                  const StateMatrix& states, MarginKind kind) {
  if (states.empty()) throw DomainError("state sample is empty");
  std::vector<double> values(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto decision = greedy_policy(true_rewards(gt, states.row(i)));
    values[i] = kind == MarginKind::RewardGap
                    ? decision.runner_up_gap
                    : win_probability(model, decision.runner_up_gap) - 0.5;
  }
  return values;
}

MarginCurve margin_cdf(const GroundTruthReward& gt, const ComparisonModel& model,
                       const StateMatrix& states, const std::vector<double>& t_grid,
                       MarginKind kind) {
  if (t_grid.empty()) throw DomainError("t grid is empty");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw DomainError("t grid must be increasing");
  auto values = margin_values(gt, model, states, kind);
  std::sort(values.begin(), values.end());
  MarginCurve curve;
  curve.t_grid = t_grid;
  curve.kind = kind;
  curve.n_states = values.size();
  curve.cdf_values.reserve(t_grid.size());
  for (double t : t_grid) {
    auto below = std::upper_bound(values.begin(), values.end(), t) - values.begin();
    curve.cdf_values.push_back(static_cast<double>(below) / static_cast<double>(values.size()));
  }
  return curve;
}

MarginFit fit_margin_exponent(const MarginCurve& curve,
                              std::optional<std::pair<double, double>> range) {
  if (curve.t_grid.size() != curve.cdf_values.size())
    throw DomainError("margin curve grid and values differ in length");
  if (!range) {
    if (curve.kind == MarginKind::ProbabilityGap)
      range = std::pair{0.01, 0.2};
    else if (!curve.t_grid.empty())
      range = std::pair{curve.t_grid.front(), curve.t_grid.back()};
    else
      range = std::pair{0.0, 0.0};
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
    const double t = curve.t_grid[i], f = curve.cdf_values[i];
    if (t < range->first || t > range->second) continue;
    if (!(t > 0.0) || !(f > 0.0 && f < 1.0)) continue;
    lx.push_back(std::log(t));
    ly.push_back(std::log(f));
  }
  if (lx.size() < 5) {
    std::ostringstream msg;
    msg << "margin fit needs at least 5 points with 0 < cdf < 1 in [" << range->first << ", "
        << range->second << "], found " << lx.size() << "; curve:";
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
      msg << " (" << curve.t_grid[i] << ", " << curve.cdf_values[i] << ")";
    throw DomainError(msg.str());
  }
  auto line = least_squares(lx, ly);
  MarginFit fit;
  fit.slope = line.slope;
  fit.alpha_hat = line.slope / (1.0 + line.slope);
  fit.c_hat = std::exp(line.intercept);
  fit.fit_range = *range;
  fit.r_squared = line.r_squared;
  fit.points_used = lx.size();
  return fit;
}

GapInequalityReport verify_gap_inequalities(const ComparisonModel& model,
                                            const std::vector<double>& t_grid) {
  GapInequalityReport report;
  const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("gap inequalities are stated on (0, 1)");
    double lhs = 0.0, rhs = 0.0;
    switch (model.kind) {
      case ModelKind::BT:
        lhs = t / 4.0;
        rhs = 0.5 * std::tanh(0.5 * t);
        break;
      case ModelKind::Thurstonian:
        lhs = t * inv_sqrt_2pi;
        rhs = std::exp(-0.5 * t * t) * inv_sqrt_2pi - 0.5;
        break;
      default:
        throw DomainError("gap inequalities exist only for the BT and Thurstonian models");
    }
    ++report.points;
    if (rhs > lhs) {
      ++report.violations;
      report.max_violation = std::max(report.max_violation, rhs - lhs);
    }
  }
  return report;
}

double rate_exponent(double alpha, double beta, std::size_t d) {
  check_rate_params(alpha, beta, d);
  const double dd = static_cast<double>(d);
  return beta / ((dd + 2.0 * beta) * (3.0 - 2.0 * alpha));
}

double theoretical_rate(double alpha, double beta, std::size_t d, double n) {
  if (!(n >= 1.0)) throw DomainError("sample size must be at least 1");
  return std::pow(n, -rate_exponent(alpha, beta, d));
}

RegretBoundTerms theoretical_regret_bound_terms(const KappaConstants& kappas, double lambda2,
                                                double alpha, double beta, std::size_t d,
                                                double n, std::size_t action_count,
                                                double delta) {
  check_rate_params(alpha, beta, d);
  if (!(n > 1.0)) throw DomainError("sample size must exceed 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(lambda2 > 0.0)) throw DomainError("spectral gap must be positive");
  if (!(kappas.kappa2 > 0.0)) throw DomainError("kappa2 must be positive");
  if (action_count < 2) throw DomainError("need at least two actions");

  const double dd = static_cast<double>(d);
  const double k = std::floor(beta) + 1.0;
  const double power = 1.0 / (3.0 - 2.0 * alpha);
  const double log_n = std::log(n);
  const double log_inv_delta = std::log(1.0 / delta);

  RegretBoundTerms terms;
  terms.exponent = power;
  terms.rate_exponent = rate_exponent(alpha, beta, d);
  const double lead = kappas.kappa0 * std::sqrt(static_cast<double>(action_count)) *
                      std::pow(k, 4.0) * std::pow(dd, k) * log_n * log_n /
                      (kappas.kappa2 * lambda2);
  terms.approximation_term = std::pow(lead, power) * std::pow(n, -terms.rate_exponent);
  const double conf = kappas.kappa0 * kappas.kappa0 * log_inv_delta /
                      (kappas.kappa2 * kappas.kappa2 * lambda2 * lambda2 * n);
  terms.confidence_term = std::pow(conf, 0.5 * power);
  terms.total = terms.approximation_term + terms.confidence_term;
  terms.informal_rate = std::pow(std::pow(dd, beta) * std::pow(n, -beta / (dd + 2.0 * beta)) +
                                     std::sqrt(log_inv_delta / n),
                                 power);
  return terms;
}

double regret_vs_error_exponent(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 5) throw DomainError("need at least 5 (error, regret) pairs");
  std::vector<double> lx, ly;
  for (auto [err, regret] : pairs) {
    if (!(err > 0.0) || !(regret > 0.0))
      throw DomainError("error and regret values must be positive");
    lx.push_back(std::log(err));
    ly.push_back(std::log(regret));
  }
  return least_squares(lx, ly).slope;
}

}  // namespace deeprm
