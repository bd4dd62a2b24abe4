#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "deeprm/neural_reward.hpp"

namespace deeprm::testing {

// Largest entrywise relative error between the analytic gradient and central
// differences of nll. Entries where both are below `floor` are compared
// against `floor`.
inline double gradient_check(const MLPParameters& params, std::span<const ComparisonSample> batch,
                             const ComparisonModel& model, double h = 1e-5,
                             double floor = 1e-6) {
  auto analytic = nll_and_gradient(params, batch, model).gradient;
  MLPParameters probe = params;
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double saved = probe.values()[k];
    probe.values()[k] = saved + h;
    const double up = nll(probe, batch, model);
    probe.values()[k] = saved - h;
    const double down = nll(probe, batch, model);
    probe.values()[k] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double g = analytic.values()[k];
    const double scale = std::max({std::abs(g), std::abs(fd), floor});
    worst = std::max(worst, std::abs(g - fd) / scale);
  }
  return worst;
}

// Random states with labels drawn from the given model at random reward gaps.
inline std::vector<ComparisonSample> random_batch(std::size_t n, std::size_t d,
                                                  std::size_t actions,
                                                  const ComparisonModel& model, Rng& rng) {
  std::vector<ComparisonSample> batch(n);
  for (auto& smp : batch) {
    smp.s.resize(d);
    for (double& v : smp.s) v = uniform01(rng);
    smp.a1 = static_cast<std::size_t>(uniform01(rng) * actions);
    smp.a0 = (smp.a1 + 1 + static_cast<std::size_t>(uniform01(rng) * (actions - 1))) % actions;
    smp.y = sample_outcome(model, 2.0 * standard_normal(rng), rng);
  }
  return batch;
}

}  // namespace deeprm::testing
