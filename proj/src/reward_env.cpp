#include "deeprm/reward_env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "deeprm/error.hpp"

namespace deeprm {
namespace {

void require_states(const StateMatrix& states) {
  if (states.empty()) throw DomainError("state sample is empty");
}

}  // namespace

std::string_view to_string(RewardFamily family) {
  switch (family) {
    case RewardFamily::Sinusoidal: return "sinusoidal";
    case RewardFamily::HermiteGaussian: return "hermite-gaussian";
    case RewardFamily::CompositeSinusoid: return "composite-sinusoid";
  }
  return "unknown";
}

RewardFamily parse_reward_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sinusoidal" || lower == "sin") return RewardFamily::Sinusoidal;
  if (lower == "hermite-gaussian" || lower == "hermite") return RewardFamily::HermiteGaussian;
  if (lower == "composite-sinusoid" || lower == "composite") return RewardFamily::CompositeSinusoid;
  throw ConfigError("unknown reward family '" + std::string(name) + "'");
}

GroundTruthReward GroundTruthReward::random(RewardFamily family, std::size_t d, Rng& rng) {
  GroundTruthReward gt;
  gt.family = family;
  gt.d = d;
  gt.w_star.resize(d);
  for (double& w : gt.w_star) w = standard_normal(rng);
  return gt;
}

std::vector<double> feature_map(std::span<const double> s) {
  std::vector<double> phi(s.size());
  std::transform(s.begin(), s.end(), phi.begin(), [](double v) { return std::sin(v); });
  return phi;
}

double reward_shape(RewardFamily family, double x) {
  switch (family) {
    case RewardFamily::Sinusoidal:
      return std::sin(x);
    case RewardFamily::HermiteGaussian: {
      const double norm = 1.0 / (std::sqrt(15.0) * std::pow(std::numbers::pi, 0.25));
      double x2 = x * x;
      return norm * x * (4.0 * x2 * x2 - 20.0 * x2 + 15.0) * std::exp(-0.5 * x2);
    }
    case RewardFamily::CompositeSinusoid:
      return std::sin(x) + std::sin(x * x);
  }
  throw ConfigError("unknown reward family");
}

double true_reward(const GroundTruthReward& gt, std::span<const double> s, std::size_t action) {
  if (s.size() != gt.d || gt.w_star.size() != gt.d)
    throw DomainError("state dimension does not match the ground truth");
  if (action > 1) throw DomainError("synthetic ground truth has two actions");
  double inner = 0.0;
  for (std::size_t i = 0; i < gt.d; ++i) inner += std::sin(s[i]) * gt.w_star[i];
  double r1 = gt.scale_outer * reward_shape(gt.family, gt.scale_inner * inner);
  return action == 1 ? r1 : -r1;
}

std::vector<double> true_rewards(const GroundTruthReward& gt, std::span<const double> s) {
  double r1 = true_reward(gt, s, 1);
  return {-r1, r1};
}

RewardFunction as_reward_function(const GroundTruthReward& gt) {
  return [gt](std::span<const double> s) { return true_rewards(gt, s); };
}

PolicyDecision greedy_policy(std::span<const double> rewards) {
  if (rewards.empty()) throw DomainError("greedy_policy needs at least one action");
  PolicyDecision best;
  best.action = 0;
  best.value = rewards[0];
  for (std::size_t a = 1; a < rewards.size(); ++a)
    if (rewards[a] > best.value) {
      best.action = a;
      best.value = rewards[a];
    }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < rewards.size(); ++a)
    if (a != best.action) runner_up = std::max(runner_up, rewards[a]);
  best.runner_up_gap = rewards.size() > 1 ? best.value - runner_up : 0.0;
  return best;
}

PolicyDecision greedy_policy(const RewardFunction& reward, std::span<const double> s) {
  auto values = reward(s);
  return greedy_policy(values);
}

double regret_mc(const RewardFunction& r_hat, const GroundTruthReward& gt,
                 const StateMatrix& states) {
  require_states(states);
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto truth = true_rewards(gt, states.row(i));
    auto chosen = greedy_policy(r_hat, states.row(i)).action;
    total += greedy_policy(truth).value - truth.at(chosen);
  }
  return total / static_cast<double>(states.size());
}

double disagreement_rate(const RewardFunction& r_hat, const GroundTruthReward& gt,
                         const StateMatrix& states) {
  require_states(states);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto truth = true_rewards(gt, states.row(i));
    if (greedy_policy(truth).action != greedy_policy(r_hat, states.row(i)).action) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(states.size());
}

double random_policy_regret(const GroundTruthReward& gt, const StateMatrix& states) {
  require_states(states);
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto truth = true_rewards(gt, states.row(i));
    double best = greedy_policy(truth).value;
    for (double v : truth) total += (best - v) / static_cast<double>(truth.size());
  }
  return total / static_cast<double>(states.size());
}

double l2_error_sq(const RewardFunction& r_hat, const GroundTruthReward& gt,
                   const StateMatrix& states) {
  require_states(states);
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto truth = true_rewards(gt, states.row(i));
    auto est = r_hat(states.row(i));
    if (est.size() != truth.size()) throw DomainError("estimator action count mismatch");
    for (std::size_t a = 0; a < truth.size(); ++a) total += (est[a] - truth[a]) * (est[a] - truth[a]);
  }
  return total / static_cast<double>(states.size());
}

double estimate_c_rstar(const GroundTruthReward& gt, std::size_t n, Rng& rng) {
  std::vector<double> s(gt.d);
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : s) v = uniform01(rng);
    sup = std::max(sup, std::abs(true_reward(gt, s, 1)));
  }
  return sup;
}

}  // namespace deeprm
