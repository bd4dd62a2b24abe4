#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deeprm/comparison_models.hpp"
#include "deeprm/dataset.hpp"
#include "deeprm/random.hpp"
#include "deeprm/reward_env.hpp"
#include "deeprm/state_matrix.hpp"

namespace deeprm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

// Fully connected ReLU network: input_dim -> hidden_widths... -> output_dim.
// Hidden layers apply ReLU; the output layer is affine.
struct MLPArchitecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths;
  std::size_t output_dim = 2;

  static MLPArchitecture rectangular(std::size_t d, std::size_t width, std::size_t depth,
                                     std::size_t actions = 2);

  std::size_t depth() const { return hidden_widths.size(); }
  std::size_t layer_count() const { return hidden_widths.size() + 1; }
  std::size_t layer_inputs(std::size_t layer) const;
  std::size_t layer_outputs(std::size_t layer) const;
  void validate() const;

  bool operator==(const MLPArchitecture&) const = default;
};

// theta stored flat: for each layer, H (outputs x inputs, row-major) then b.
class MLPParameters {
 public:
  MLPParameters() = default;
  // Zero-initialized parameters.
  explicit MLPParameters(MLPArchitecture arch);

  const MLPArchitecture& arch() const { return arch_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  MatrixMap weight(std::size_t layer);
  ConstMatrixMap weight(std::size_t layer) const;
  VectorMap bias(std::size_t layer);
  ConstVectorMap bias(std::size_t layer) const;

  bool operator==(const MLPParameters& other) const {
    return arch_ == other.arch_ && values_ == other.values_;
  }

 private:
  MLPArchitecture arch_;
  std::vector<double> values_;
  std::vector<std::size_t> offsets_;  // start of H for each layer
};

// He initialization: H ~ Normal(0, 2 / fan_in), b = 0.
MLPParameters init_params(const MLPArchitecture& arch, Rng& rng);

std::size_t param_count(const MLPArchitecture& arch);
// W(d+1) + (W^2+W)(D-1) + W + 1, the size bound for single-output nets.
std::uint64_t param_count_bound(std::uint64_t width, std::uint64_t depth, std::uint64_t d);

struct TheoremArchitecture {
  double width = 0.0;
  double depth = 0.0;
};
// W = 114 (floor(beta)+1)^2 d^{floor(beta)+1},
// D = 21 (floor(beta)+1)^2 ceil(N^{d/(2d+4beta)} log2(8 N^{d/(2d+4beta)})).
// Returned as doubles since the depth outgrows 64-bit integers for large N.
TheoremArchitecture theorem_architecture(std::size_t d, double beta, double n);

// Uncentered network output for one state.
Eigen::VectorXd raw_forward(const MLPParameters& params, std::span<const double> s);
// Outputs minus their mean over actions, so they sum to zero.
std::vector<double> forward(const MLPParameters& params, std::span<const double> s);
// Centered outputs for every state, one column per state.
Eigen::MatrixXd forward_batch(const MLPParameters& params, const StateMatrix& states);
// Post-ReLU activations of every hidden layer for one state.
std::vector<Eigen::VectorXd> hidden_activations(const MLPParameters& params,
                                                std::span<const double> s);

RewardFunction as_reward_function(const MLPParameters& params);

struct LossAndGradient {
  double loss = 0.0;
  MLPParameters gradient;
};

// Negative mean log-likelihood of the batch under the centered network and its
// exact gradient with respect to every weight and bias.
LossAndGradient nll_and_gradient(const MLPParameters& params,
                                 std::span<const ComparisonSample> batch,
                                 const ComparisonModel& model);
// Same loss without the backward pass.
double nll(const MLPParameters& params, std::span<const ComparisonSample> batch,
           const ComparisonModel& model);

// Checkpoint layout: 8-byte magic "DRMNET01", then little-endian int32
// d, D, widths[0..D), |A|, then little-endian float64 parameters layer by
// layer (H row-major, then b).
void write_checkpoint(const MLPParameters& params, std::ostream& out);
void write_checkpoint(const MLPParameters& params, const std::filesystem::path& path);
MLPParameters read_checkpoint(std::istream& in);
MLPParameters read_checkpoint(const std::filesystem::path& path);

}  // namespace deeprm
