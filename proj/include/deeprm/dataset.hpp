#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "deeprm/comparison_models.hpp"
#include "deeprm/reward_env.hpp"
#include "deeprm/state_matrix.hpp"

namespace deeprm {

struct ComparisonSample {
  std::vector<double> s;
  std::size_t a1 = 1;
  std::size_t a0 = 0;
  Outcome y = 1;
  // P(y > 0 | s, a1, a0) at generation time; replaced when corrupted.
  double p_win = 0.5;
};

struct ComparisonDataset {
  std::vector<ComparisonSample> samples;
  std::size_t d = 0;
  std::size_t action_count = 2;
  std::uint64_t seed = 0;
  double corruption_level = 0.0;
  ModelKind model_kind = ModelKind::BT;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  StateMatrix states() const;
};

// Symmetric action-pair comparison counts n_ij with zero diagonal.
using CountMatrix = std::vector<std::vector<long>>;

enum class GraphDesign { Complete, Star, Path, Cycle };

std::string_view to_string(GraphDesign design);
GraphDesign parse_graph_design(std::string_view name);

ComparisonDataset generate_dataset(const GroundTruthReward& gt, const ComparisonModel& model,
                                   std::size_t n, std::uint64_t seed);

// Draws pairs according to `counts` (each unordered pair {i,j} appears n_ij
// times, orientation and order randomized) and labels them from `reward`.
ComparisonDataset generate_design_dataset(const RewardFunction& reward, std::size_t d,
                                          const ComparisonModel& model, const CountMatrix& counts,
                                          std::uint64_t seed);

// Replaces floor(m N) uniformly chosen samples' p_win by Uniform[0.4, 0.6]
// and redraws their y as +1 with that probability, -1 otherwise.
ComparisonDataset corrupt_dataset(const ComparisonDataset& ds, double m, std::uint64_t seed);

std::vector<double> dataset_win_probabilities(const ComparisonDataset& ds);

// Edge lists in canonical order (lowest-indexed edges first).
std::vector<std::pair<std::size_t, std::size_t>> design_edges(GraphDesign design,
                                                              std::size_t action_count);
// N comparisons spread evenly over the design's edges; the remainder goes to
// the lowest-indexed edges.
CountMatrix design_counts(GraphDesign design, std::size_t action_count, long n);
CountMatrix dataset_counts(const ComparisonDataset& ds);

// CSV with header s1..sd,a1,a0,y,p_win and 17-significant-digit floats.
void write_dataset_csv(const ComparisonDataset& ds, const std::filesystem::path& path);
void write_dataset_csv(const ComparisonDataset& ds, std::ostream& out);
ComparisonDataset read_dataset_csv(const std::filesystem::path& path, ModelKind kind);
ComparisonDataset read_dataset_csv(std::istream& in, ModelKind kind);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

// Equal-width bins on [0, 1]; the last bin is closed on the right.
std::vector<HistogramBin> probability_histogram(const std::vector<double>& values,
                                                std::size_t bins);

}  // namespace deeprm
