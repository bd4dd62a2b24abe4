#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "deeprm/comparison_models.hpp"
#include "deeprm/dataset.hpp"
#include "deeprm/neural_reward.hpp"
#include "deeprm/reward_env.hpp"

namespace deeprm {

struct TrainingConfig {
  std::size_t batch_size = 256;
  int max_epochs = 200;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int early_stop_patience = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingHistory {
  std::vector<double> train_nll;  // mean mini-batch loss per epoch
  std::vector<double> eval_nll;   // full eval-split loss after each epoch
  double initial_eval_nll = 0.0;  // before the first update
  int best_epoch = 0;             // 1-based; eval_nll[best_epoch - 1] is the minimum
  double wall_time_seconds = 0.0;

  int epochs_run() const { return static_cast<int>(eval_nll.size()); }
  double best_eval_nll() const { return eval_nll.at(static_cast<std::size_t>(best_epoch - 1)); }
};

struct TrainingResult {
  MLPParameters params;  // the best-eval checkpoint
  TrainingHistory history;
};

// Maximum-likelihood fit with shuffled mini-batches and bias-corrected
// adaptive-moment updates. Stops after `early_stop_patience` epochs without an
// eval improvement or at `max_epochs`, returning the best-eval parameters.
TrainingResult train_mle(const ComparisonDataset& train, const ComparisonDataset& eval,
                         const MLPArchitecture& arch, const ComparisonModel& model,
                         const TrainingConfig& cfg);

// Mean log-likelihood (higher is better).
double empirical_loglik(const MLPParameters& params, const ComparisonDataset& ds,
                        const ComparisonModel& model);

// Per-state log g(y, u*) - log g(y, u_hat) with y drawn from g(., u*).
std::vector<double> excess_risk_terms(const MLPParameters& params, const GroundTruthReward& gt,
                                      const ComparisonModel& model, const StateMatrix& states,
                                      Rng& rng);
// Monte Carlo estimate of l(r*) - l(r_hat).
double excess_risk_estimate(const MLPParameters& params, const GroundTruthReward& gt,
                            const ComparisonModel& model, const StateMatrix& states, Rng& rng);

// CSV with columns epoch,train_nll,eval_nll.
void write_history_csv(const TrainingHistory& history, const std::filesystem::path& path);

}  // namespace deeprm
