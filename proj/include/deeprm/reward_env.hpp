#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "deeprm/random.hpp"
#include "deeprm/state_matrix.hpp"

namespace deeprm {

enum class RewardFamily { Sinusoidal, HermiteGaussian, CompositeSinusoid };

std::string_view to_string(RewardFamily family);
RewardFamily parse_reward_family(std::string_view name);

// Synthetic truth r*(s, a1) = scale_outer * psi(scale_inner * phi(s)^T w*),
// r*(s, a0) = -r*(s, a1), with phi(s) = componentwise sine.
struct GroundTruthReward {
  RewardFamily family = RewardFamily::Sinusoidal;
  std::size_t d = 10;
  std::vector<double> w_star;
  double scale_inner = 4.0;
  double scale_outer = 2.0;
  std::size_t action_count = 2;

  // w* drawn from a standard normal.
  static GroundTruthReward random(RewardFamily family, std::size_t d, Rng& rng);
};

struct PolicyDecision {
  std::size_t action = 0;
  double value = 0.0;
  double runner_up_gap = 0.0;
};

// Maps a state to the reward of every action.
using RewardFunction = std::function<std::vector<double>(std::span<const double>)>;

std::vector<double> feature_map(std::span<const double> s);

// psi for each family; the Hermite-Gaussian normalizer is (sqrt(15) pi^{1/4})^{-1}.
double reward_shape(RewardFamily family, double x);

double true_reward(const GroundTruthReward& gt, std::span<const double> s, std::size_t action);
std::vector<double> true_rewards(const GroundTruthReward& gt, std::span<const double> s);
RewardFunction as_reward_function(const GroundTruthReward& gt);

// Ties go to the lowest action index.
PolicyDecision greedy_policy(std::span<const double> rewards);
PolicyDecision greedy_policy(const RewardFunction& reward, std::span<const double> s);

// Monte Carlo regret of the greedy policy induced by r_hat.
double regret_mc(const RewardFunction& r_hat, const GroundTruthReward& gt,
                 const StateMatrix& states);
// Fraction of states where the greedy actions of r_hat and r* differ.
double disagreement_rate(const RewardFunction& r_hat, const GroundTruthReward& gt,
                         const StateMatrix& states);
// Expected regret of the uniformly random policy on the given states.
double random_policy_regret(const GroundTruthReward& gt, const StateMatrix& states);
// Mean over states of sum_a (r_hat(s,a) - r*(s,a))^2.
double l2_error_sq(const RewardFunction& r_hat, const GroundTruthReward& gt,
                   const StateMatrix& states);

// Empirical sup_s max_a |r*(s,a)| over n uniform states.
double estimate_c_rstar(const GroundTruthReward& gt, std::size_t n, Rng& rng);

}  // namespace deeprm
