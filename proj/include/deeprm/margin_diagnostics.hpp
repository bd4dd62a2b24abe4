#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "deeprm/comparison_models.hpp"
#include "deeprm/reward_env.hpp"
#include "deeprm/state_matrix.hpp"

namespace deeprm {

enum class MarginKind { ProbabilityGap, RewardGap };

// Empirical CDF of the optimal action's margin over a state sample.
// ProbabilityGap: P(y > 0 | a1 = pi*(s), a0 = runner-up) - 1/2.
// RewardGap: r*(s, pi*(s)) - max_{a != pi*(s)} r*(s, a).
struct MarginCurve {
  std::vector<double> t_grid;
  std::vector<double> cdf_values;
  MarginKind kind = MarginKind::ProbabilityGap;
  std::size_t n_states = 0;
};

// cdf ~ c_hat * t^slope with slope = alpha/(1-alpha).
struct MarginFit {
  double alpha_hat = 0.0;
  double slope = 0.0;
  double c_hat = 0.0;
  std::pair<double, double> fit_range{0.0, 0.0};
  double r_squared = 0.0;
  std::size_t points_used = 0;
};

struct GapInequalityReport {
  std::size_t points = 0;
  std::size_t violations = 0;
  double max_violation = 0.0;  // max of (rhs - lhs), clipped at 0
  bool holds() const { return violations == 0; }
};

struct RegretBoundTerms {
  double exponent = 0.0;          // 1 / (3 - 2 alpha)
  double rate_exponent = 0.0;     // beta / ((d + 2 beta)(3 - 2 alpha))
  double approximation_term = 0.0;
  double confidence_term = 0.0;
  double total = 0.0;             // sum of the two terms, universal constant set to 1
  double informal_rate = 0.0;     // {d^beta N^{-beta/(d+2beta)} + sqrt(log(1/delta)/N)}^{1/(3-2alpha)}
};

// Equally spaced grid of `points` values in [t_min, t_max].
std::vector<double> linear_grid(double t_min, double t_max, std::size_t points);
// Log-spaced grid.
std::vector<double> log_grid(double t_min, double t_max, std::size_t points);

std::vector<double> margin_values(const GroundTruthReward& gt, const ComparisonModel& model,
                                  const StateMatrix& states, MarginKind kind);

MarginCurve margin_cdf(const GroundTruthReward& gt, const ComparisonModel& model,
                       const StateMatrix& states, const std::vector<double>& t_grid,
                       MarginKind kind);

// Least squares on (log t, log cdf) over grid points inside `range` with
// 0 < cdf < 1. Defaults: [0.01, 0.2] for ProbabilityGap, the full grid for
// RewardGap. Needs at least 5 usable points.
MarginFit fit_margin_exponent(const MarginCurve& curve,
                              std::optional<std::pair<double, double>> range = std::nullopt);

// Checks t/4 >= (1/2) tanh(t/2) (BT) or t/sqrt(2 pi) >= e^{-t^2/2}/sqrt(2 pi) - 1/2
// (Thurstonian) at every grid point in (0, 1).
GapInequalityReport verify_gap_inequalities(const ComparisonModel& model,
                                            const std::vector<double>& t_grid);

// beta / ((d + 2 beta)(3 - 2 alpha)); alpha in [0, 1).
double rate_exponent(double alpha, double beta, std::size_t d);
// N^{-rate_exponent}.
double theoretical_rate(double alpha, double beta, std::size_t d, double n);

RegretBoundTerms theoretical_regret_bound_terms(const KappaConstants& kappas, double lambda2,
                                                double alpha, double beta, std::size_t d,
                                                double n, std::size_t action_count,
                                                double delta);

// Log-log slope of regret against squared L2 error.
double regret_vs_error_exponent(const std::vector<std::pair<double, double>>& pairs);

}  // namespace deeprm
