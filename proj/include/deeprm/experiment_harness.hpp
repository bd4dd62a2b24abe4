#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deeprm/comparison_models.hpp"
#include "deeprm/dataset.hpp"
#include "deeprm/margin_diagnostics.hpp"
#include "deeprm/reward_env.hpp"
#include "deeprm/training.hpp"

namespace deeprm {

struct SplitSizes {
  std::size_t train = 1u << 12;
  std::size_t eval = 1u << 11;
  std::size_t test = 1u << 14;
};

// Desk-scale defaults; the full grid (widths 2^2..2^12, depths 3..13, 50
// replications, splits 2^14/2^13/2^14) is reachable through the config.
struct SweepConfig {
  RewardFamily reward_family = RewardFamily::Sinusoidal;
  ModelKind model_kind = ModelKind::BT;
  double tie_param = 0.0;  // 0 selects the model's default
  std::size_t d = 10;
  std::vector<std::size_t> widths = {4, 16, 64, 256};
  std::vector<std::size_t> depths = {3, 5, 7, 9};
  std::vector<double> noise_levels = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::size_t replications = 10;
  SplitSizes split_sizes;
  std::uint64_t base_seed = 0;
  TrainingConfig training;
  std::size_t fixed_width = 64;  // noise sweep architecture
  std::size_t fixed_depth = 4;
  // When true, w* and the datasets depend only on the replication, so
  // architectures within a replication see the same data.
  bool share_truth_across_cells = true;
  std::size_t jobs = 1;

  ComparisonModel model() const;
  void validate() const;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& cfg);
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct ResultRow {
  std::string experiment_id;
  std::string reward_family;
  std::string model_kind;
  std::size_t width = 0;
  std::size_t depth = 0;
  double noise_level = 0.0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  double disagreement_rate = 0.0;
  double test_loglik = 0.0;
  double train_nll_final = 0.0;
  double eval_nll_best = 0.0;
  double l2_error_sq = 0.0;
  double lambda2 = 0.0;
  double wall_time_seconds = 0.0;
  std::string note;  // empty unless the cell failed; failed cells carry regret = NaN
};

inline constexpr const char* kResultsSchemaLine = "# deeprm-results schema_version=1";

// hash64(base_seed, width, depth, bits(noise_level), replication).
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t width, std::size_t depth,
                        double noise_level, std::size_t replication);

// Data for one replication: the truth, clean splits and the clean test set.
struct ReplicationData {
  GroundTruthReward truth;
  ComparisonDataset train;
  ComparisonDataset eval;
  ComparisonDataset test;
};

ReplicationData make_replication_data(const SweepConfig& cfg, std::size_t width,
                                      std::size_t depth, double noise_level,
                                      std::size_t replication);

// Trains and evaluates one (width, depth, noise level, replication) cell.
// Failures are caught and reported through `note` with regret = NaN.
ResultRow run_cell(const SweepConfig& cfg, const std::string& experiment_id, std::size_t width,
                   std::size_t depth, double noise_level, std::size_t replication);

// Receives rows in cell order as they complete.
using RowSink = std::function<void(const ResultRow&)>;

std::vector<ResultRow> run_arch_sweep(const SweepConfig& cfg, const RowSink& sink = {});
std::vector<ResultRow> run_noise_sweep(const SweepConfig& cfg, const RowSink& sink = {});

// Uniform-random-policy regret on the replication's test states.
double replication_random_regret(const SweepConfig& cfg, std::size_t replication);

void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const ResultRow& row);
std::vector<ResultRow> read_results_csv(std::istream& in);

// Appends rows to a results CSV, writing the schema and header lines when the
// file is new. Thread-safe.
class ResultsAppender {
 public:
  explicit ResultsAppender(const std::filesystem::path& path);
  void append(const ResultRow& row);

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

struct GraphSpectrumRow {
  GraphDesign design = GraphDesign::Complete;
  std::size_t action_count = 0;
  double lambda2 = 0.0;
};

std::vector<GraphSpectrumRow> run_graph_spectrum(const std::vector<GraphDesign>& designs,
                                                 const std::vector<std::size_t>& action_counts,
                                                 long n);
void write_graph_spectrum_csv(const std::vector<GraphSpectrumRow>& rows, std::ostream& out);

std::vector<HistogramBin> export_probability_histogram(const ComparisonDataset& ds,
                                                       std::size_t bins);
void write_histogram_csv(const std::vector<HistogramBin>& bins, std::ostream& out);

struct MarginReport {
  GroundTruthReward truth;
  MarginCurve probability_gap;
  MarginCurve reward_gap;
};

// w* and the states are drawn from streams derived from `seed`; the grid is
// log-spaced on [t_min, t_max].
MarginReport diagnose_margin(RewardFamily family, const ComparisonModel& model, std::size_t d,
                             std::size_t n_states, double t_min, double t_max,
                             std::size_t t_points, std::uint64_t seed);
void write_margin_csv(const MarginReport& report, std::ostream& out);

}  // namespace deeprm
