#pragma once

#include <span>
#include <string>
#include <string_view>

#include "deeprm/random.hpp"

namespace deeprm {

enum class ModelKind { BT, Thurstonian, RaoKupper, Davidson };
enum class OutcomeSpace { Binary, Ternary };

// Comparison outcome y: +1 means a1 preferred, -1 means a0 preferred, 0 a tie.
using Outcome = int;

std::string_view to_string(ModelKind kind);
// Accepts "bt", "thurstonian", "rao-kupper", "davidson" (case-insensitive).
ModelKind parse_model_kind(std::string_view name);

// A comparison function g(y, u): the law of the outcome y given the reward
// difference u = r(s, a1) - r(s, a0).
//
// Rao-Kupper uses log-scale strengths with threshold theta > 1:
//   P(+1|u) = e^u / (e^u + theta),  P(-1|u) = 1 / (1 + theta e^u),
//   P(0|u)  = 1 - P(+1|u) - P(-1|u).
// Davidson uses tie weight nu > 0:
//   P(+1|u) : P(-1|u) : P(0|u) = e^{u/2} : e^{-u/2} : nu.
struct ComparisonModel {
  ModelKind kind = ModelKind::BT;
  double tie_param = 0.0;

  static ComparisonModel bradley_terry() { return {ModelKind::BT, 0.0}; }
  static ComparisonModel thurstonian() { return {ModelKind::Thurstonian, 0.0}; }
  static ComparisonModel rao_kupper(double theta);
  static ComparisonModel davidson(double nu);
  // Default tie parameters are theta = 1.5 and nu = 1.
  static ComparisonModel make(ModelKind kind);

  OutcomeSpace outcome_space() const {
    return (kind == ModelKind::BT || kind == ModelKind::Thurstonian) ? OutcomeSpace::Binary
                                                                     : OutcomeSpace::Ternary;
  }
  bool is_binary() const { return outcome_space() == OutcomeSpace::Binary; }
  bool admits(Outcome y) const;
  std::span<const Outcome> outcomes() const;

  // Throws DomainError if the tie parameter violates the model's range.
  void validate() const;
};

struct KappaConstants {
  double kappa0 = 0.0;  // sup |log g|
  double kappa1 = 0.0;  // sup |d/du log g|
  double kappa2 = 0.0;  // inf |d^2/du^2 log g|
  double c_rstar = 0.0;
};

// Numerically stable pieces shared with the diagnostics and tests.
double sigmoid(double x);
double log_sigmoid(double x);
double normal_pdf(double x);
double normal_cdf(double x);
double log_normal_cdf(double x);

double log_density(const ComparisonModel& model, Outcome y, double u);
double density(const ComparisonModel& model, Outcome y, double u);
double dlog_density_du(const ComparisonModel& model, Outcome y, double u);
double d2log_density_du2(const ComparisonModel& model, Outcome y, double u);

// P(y > 0 | u).
double win_probability(const ComparisonModel& model, double u);
// g(0, u); zero for binary models.
double tie_probability(const ComparisonModel& model, double u);

Outcome sample_outcome(const ComparisonModel& model, double u, Rng& rng);

KappaConstants kappa_constants(const ComparisonModel& model, double c_rstar);

}  // namespace deeprm
