#include "deeprm/neural_reward.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "deeprm/error.hpp"

namespace deeprm {
namespace {

constexpr std::array<char, 8> kCheckpointMagic = {'D', 'R', 'M', 'N', 'E', 'T', '0', '1'};

struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // input, then each hidden layer post-ReLU
  std::vector<Eigen::MatrixXd> pre_activations;
  Eigen::MatrixXd centered;
};

Eigen::MatrixXd batch_inputs(std::span<const ComparisonSample> batch, std::size_t d) {
  Eigen::MatrixXd x(d, batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].s.size() != d) throw DomainError("sample dimension does not match the network");
    for (std::size_t k = 0; k < d; ++k) x(k, i) = batch[i].s[k];
  }
  return x;
}

ForwardCache forward_cached(const MLPParameters& params, Eigen::MatrixXd x) {
  const auto& arch = params.arch();
  ForwardCache cache;
  cache.activations.push_back(std::move(x));
  for (std::size_t l = 0; l < arch.depth(); ++l) {
    Eigen::MatrixXd z = params.weight(l) * cache.activations.back();
    z.colwise() += params.bias(l);
    cache.activations.push_back(z.cwiseMax(0.0));
    cache.pre_activations.push_back(std::move(z));
  }
  const std::size_t out = arch.depth();
  Eigen::MatrixXd raw = params.weight(out) * cache.activations.back();
  raw.colwise() += params.bias(out);
  Eigen::RowVectorXd mean = raw.colwise().mean();
  raw.rowwise() -= mean;
  cache.centered = std::move(raw);
  return cache;
}

void check_batch(const MLPParameters& params, std::span<const ComparisonSample> batch,
                 const ComparisonModel& model) {
  if (batch.empty()) throw DomainError("batch is empty");
  const auto actions = params.arch().output_dim;
  for (const auto& sample : batch) {
    if (sample.a1 >= actions || sample.a0 >= actions || sample.a1 == sample.a0)
      throw DomainError("sample action pair outside the network's action space");
    if (!model.admits(sample.y)) throw DomainError("sample outcome not valid for the model");
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw DomainError("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

double get_f64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DomainError("truncated checkpoint");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

MLPArchitecture MLPArchitecture::rectangular(std::size_t d, std::size_t width, std::size_t depth,
                                             std::size_t actions) {
  MLPArchitecture arch{d, std::vector<std::size_t>(depth, width), actions};
  arch.validate();
  return arch;
}

std::size_t MLPArchitecture::layer_inputs(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_widths[layer - 1];
}

std::size_t MLPArchitecture::layer_outputs(std::size_t layer) const {
  return layer < hidden_widths.size() ? hidden_widths[layer] : output_dim;
}

void MLPArchitecture::validate() const {
  if (input_dim == 0) throw ConfigError("network input dimension must be positive");
  if (hidden_widths.empty()) throw ConfigError("network needs at least one hidden layer");
  for (auto w : hidden_widths)
    if (w == 0) throw ConfigError("hidden widths must be positive");
  if (output_dim == 0) throw ConfigError("network needs at least one output");
}

MLPParameters::MLPParameters(MLPArchitecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  std::size_t offset = 0;
  for (std::size_t l = 0; l < arch_.layer_count(); ++l) {
    offsets_.push_back(offset);
    offset += arch_.layer_outputs(l) * (arch_.layer_inputs(l) + 1);
  }
  values_.assign(offset, 0.0);
}

MatrixMap MLPParameters::weight(std::size_t layer) {
  return {values_.data() + offsets_.at(layer), static_cast<Eigen::Index>(arch_.layer_outputs(layer)),
          static_cast<Eigen::Index>(arch_.layer_inputs(layer))};
}

ConstMatrixMap MLPParameters::weight(std::size_t layer) const {
  return {values_.data() + offsets_.at(layer), static_cast<Eigen::Index>(arch_.layer_outputs(layer)),
          static_cast<Eigen::Index>(arch_.layer_inputs(layer))};
}

VectorMap MLPParameters::bias(std::size_t layer) {
  const auto rows = arch_.layer_outputs(layer);
  return {values_.data() + offsets_.at(layer) + rows * arch_.layer_inputs(layer),
          static_cast<Eigen::Index>(rows)};
}

ConstVectorMap MLPParameters::bias(std::size_t layer) const {
  const auto rows = arch_.layer_outputs(layer);
  return {values_.data() + offsets_.at(layer) + rows * arch_.layer_inputs(layer),
          static_cast<Eigen::Index>(rows)};
}

MLPParameters init_params(const MLPArchitecture& arch, Rng& rng) {
  MLPParameters params(arch);
  for (std::size_t l = 0; l < arch.layer_count(); ++l) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(arch.layer_inputs(l)));
    std::normal_distribution<double> normal(0.0, stddev);
    auto w = params.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = normal(rng);
  }
  return params;
}

std::size_t param_count(const MLPArchitecture& arch) {
  arch.validate();
  std::size_t count = 0;
  for (std::size_t l = 0; l < arch.layer_count(); ++l)
    count += arch.layer_outputs(l) * (arch.layer_inputs(l) + 1);
  return count;
}

std::uint64_t param_count_bound(std::uint64_t width, std::uint64_t depth, std::uint64_t d) {
  if (depth == 0) throw DomainError("depth must be at least 1");
  return width * (d + 1) + (width * width + width) * (depth - 1) + width + 1;
}

TheoremArchitecture theorem_architecture(std::size_t d, double beta, double n) {
  if (!(beta > 0.0)) throw DomainError("smoothness beta must be positive");
  if (!(n >= 1.0)) throw DomainError("sample size must be at least 1");
  if (d == 0) throw DomainError("dimension must be positive");
  const double k = std::floor(beta) + 1.0;
  const double dd = static_cast<double>(d);
  const double m = std::pow(n, dd / (2.0 * dd + 4.0 * beta));
  TheoremArchitecture out;
  out.width = 114.0 * k * k * std::pow(dd, k);
  out.depth = 21.0 * k * k * std::ceil(m * std::log2(8.0 * m));
  return out;
}

Eigen::VectorXd raw_forward(const MLPParameters& params, std::span<const double> s) {
  const auto& arch = params.arch();
  if (s.size() != arch.input_dim) throw DomainError("state dimension does not match the network");
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t l = 0; l < arch.depth(); ++l)
    h = (params.weight(l) * h + params.bias(l)).cwiseMax(0.0);
  return params.weight(arch.depth()) * h + params.bias(arch.depth());
}

std::vector<double> forward(const MLPParameters& params, std::span<const double> s) {
  Eigen::VectorXd out = raw_forward(params, s);
  out.array() -= out.mean();
  return {out.data(), out.data() + out.size()};
}

Eigen::MatrixXd forward_batch(const MLPParameters& params, const StateMatrix& states) {
  if (states.dim() != params.arch().input_dim)
    throw DomainError("state dimension does not match the network");
  Eigen::MatrixXd x(states.dim(), states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t k = 0; k < states.dim(); ++k) x(k, i) = states.row(i)[k];
  return forward_cached(params, std::move(x)).centered;
}

std::vector<Eigen::VectorXd> hidden_activations(const MLPParameters& params,
                                                std::span<const double> s) {
  const auto& arch = params.arch();
  if (s.size() != arch.input_dim) throw DomainError("state dimension does not match the network");
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t l = 0; l < arch.depth(); ++l) {
    h = (params.weight(l) * h + params.bias(l)).cwiseMax(0.0);
    out.push_back(h);
  }
  return out;
}

RewardFunction as_reward_function(const MLPParameters& params) {
  return [params](std::span<const double> s) { return forward(params, s); };
}

double nll(const MLPParameters& params, std::span<const ComparisonSample> batch,
           const ComparisonModel& model) {
  check_batch(params, batch, model);
  auto cache = forward_cached(params, batch_inputs(batch, params.arch().input_dim));
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    double u = cache.centered(static_cast<Eigen::Index>(batch[i].a1), col) -
               cache.centered(static_cast<Eigen::Index>(batch[i].a0), col);
    total -= log_density(model, batch[i].y, u);
  }
  return total / static_cast<double>(batch.size());
}

LossAndGradient nll_and_gradient(const MLPParameters& params,
                                 std::span<const ComparisonSample> batch,
                                 const ComparisonModel& model) {
  check_batch(params, batch, model);
  const auto& arch = params.arch();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  auto cache = forward_cached(params, batch_inputs(batch, arch.input_dim));

  // dL/d(centered output).
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(cache.centered.rows(), cache.centered.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const auto a1 = static_cast<Eigen::Index>(batch[i].a1);
    const auto a0 = static_cast<Eigen::Index>(batch[i].a0);
    double u = cache.centered(a1, col) - cache.centered(a0, col);
    total -= log_density(model, batch[i].y, u);
    double du = -dlog_density_du(model, batch[i].y, u) * inv_b;
    delta(a1, col) += du;
    delta(a0, col) -= du;
  }
  // Back through the centering: subtract the per-column mean.
  Eigen::RowVectorXd mean = delta.colwise().mean();
  delta.rowwise() -= mean;

  LossAndGradient result{total * inv_b, MLPParameters(arch)};
  auto& grad = result.gradient;
  for (std::size_t l = arch.layer_count(); l-- > 0;) {
    grad.weight(l).noalias() = delta * cache.activations[l].transpose();
    grad.bias(l) = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd upstream = params.weight(l).transpose() * delta;
    delta = upstream.cwiseProduct((cache.pre_activations[l - 1].array() > 0.0).matrix().cast<double>());
  }
  return result;
}

void write_checkpoint(const MLPParameters& params, std::ostream& out) {
  const auto& arch = params.arch();
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_u32(out, static_cast<std::uint32_t>(arch.input_dim));
  put_u32(out, static_cast<std::uint32_t>(arch.depth()));
  for (auto w : arch.hidden_widths) put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(arch.output_dim));
  for (double v : params.values()) put_f64(out, v);
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

void write_checkpoint(const MLPParameters& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(params, out);
}

MLPParameters read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic)
    throw DomainError("not a reward-network checkpoint");
  MLPArchitecture arch;
  arch.input_dim = get_u32(in);
  const std::uint32_t depth = get_u32(in);
  if (depth > (1u << 20)) throw DomainError("implausible network depth in checkpoint");
  for (std::uint32_t l = 0; l < depth; ++l) arch.hidden_widths.push_back(get_u32(in));
  arch.output_dim = get_u32(in);
  MLPParameters params(arch);
  for (double& v : params.values()) v = get_f64(in);
  return params;
}

MLPParameters read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace deeprm
