#include "deeprm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "deeprm/error.hpp"

namespace deeprm {
namespace {

constexpr std::size_t kEvalChunk = 4096;

void check_compatible(const ComparisonDataset& ds, const MLPArchitecture& arch,
                      const ComparisonModel& model, const char* name) {
  if (ds.empty()) throw DomainError(std::string(name) + " dataset is empty");
  if (ds.d != arch.input_dim)
    throw DomainError(std::string(name) + " dataset dimension does not match the network");
  if (ds.action_count != arch.output_dim)
    throw DomainError(std::string(name) + " dataset action count does not match the network");
  if (ds.model_kind != model.kind)
    throw DomainError(std::string(name) + " dataset was generated under a different model");
}

double dataset_nll(const MLPParameters& params, const ComparisonDataset& ds,
                   const ComparisonModel& model) {
  std::span<const ComparisonSample> all(ds.samples);
  double total = 0.0;
  for (std::size_t start = 0; start < all.size(); start += kEvalChunk) {
    auto chunk = all.subspan(start, std::min(kEvalChunk, all.size() - start));
    total += nll(params, chunk, model) * static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(all.size());
}

class AdamState {
 public:
  AdamState(std::size_t n, const TrainingConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
    }
  }

 private:
  TrainingConfig cfg_;
  std::vector<double> m_, v_;
  double t_ = 0.0;
};

}  // namespace

void TrainingConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs <= 0) throw ConfigError("max_epochs must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("moment decay rates must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (early_stop_patience <= 0) throw ConfigError("early_stop_patience must be positive");
  if (early_stop_patience > max_epochs) throw ConfigError("patience cannot exceed max_epochs");
}

TrainingResult train_mle(const ComparisonDataset& train, const ComparisonDataset& eval,
                         const MLPArchitecture& arch, const ComparisonModel& model,
                         const TrainingConfig& cfg) {
  cfg.validate();
  arch.validate();
  model.validate();
  check_compatible(train, arch, model, "training");
  check_compatible(eval, arch, model, "eval");
  if (cfg.batch_size > train.size())
    throw ConfigError("batch_size exceeds the training-set size");

  const auto started = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  MLPParameters params = init_params(arch, rng);
  AdamState adam(params.size(), cfg);

  TrainingResult result{params, {}};
  auto& history = result.history;
  history.initial_eval_nll = dataset_nll(params, eval, model);
  double best = history.initial_eval_nll;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<ComparisonSample> batch;
  batch.reserve(cfg.batch_size);
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train.samples[order[k]]);
      auto [loss, grad] = nll_and_gradient(params, batch, model);
      if (!std::isfinite(loss)) throw TrainingError("training loss became non-finite", epoch);
      epoch_loss += loss * static_cast<double>(batch.size());
      adam.step(params.values(), grad.values());
    }
    const double eval_loss = dataset_nll(params, eval, model);
    if (!std::isfinite(eval_loss)) throw TrainingError("eval loss became non-finite", epoch);
    history.train_nll.push_back(epoch_loss / static_cast<double>(train.size()));
    history.eval_nll.push_back(eval_loss);

    if (history.best_epoch == 0 || eval_loss < best) {
      best = eval_loss;
      history.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  history.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

double empirical_loglik(const MLPParameters& params, const ComparisonDataset& ds,
                        const ComparisonModel& model) {
  if (ds.empty()) throw DomainError("dataset is empty");
  return -dataset_nll(params, ds, model);
}

std::vector<double> excess_risk_terms(const MLPParameters& params, const GroundTruthReward& gt,
                                      const ComparisonModel& model, const StateMatrix& states,
                                      Rng& rng) {
  if (states.empty()) throw DomainError("state sample is empty");
  Eigen::MatrixXd out = forward_batch(params, states);
  std::vector<double> terms(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double u_star = true_reward(gt, states.row(i), 1) - true_reward(gt, states.row(i), 0);
    const auto col = static_cast<Eigen::Index>(i);
    const double u_hat = out(1, col) - out(0, col);
    const Outcome y = sample_outcome(model, u_star, rng);
    terms[i] = log_density(model, y, u_star) - log_density(model, y, u_hat);
  }
  return terms;
}

double excess_risk_estimate(const MLPParameters& params, const GroundTruthReward& gt,
                            const ComparisonModel& model, const StateMatrix& states, Rng& rng) {
  auto terms = excess_risk_terms(params, gt, model, states, rng);
  return std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
}

void write_history_csv(const TrainingHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "epoch,train_nll,eval_nll\n";
  char buf[96];
  for (std::size_t e = 0; e < history.eval_nll.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e + 1, history.train_nll[e],
                  history.eval_nll[e]);
    out << buf;
  }
}

}  // namespace deeprm
