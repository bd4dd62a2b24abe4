#include "deeprm/experiment_harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string_view>
#include <thread>

#include "deeprm/error.hpp"
#include "deeprm/neural_reward.hpp"
#include "deeprm/spectral.hpp"

namespace deeprm {
namespace {

// Stream tags for seeds derived from a replication.
enum : std::uint64_t {
  kTruthStream = 1,
  kTrainStream = 2,
  kEvalStream = 3,
  kTestStream = 4,
  kCorruptTrainStream = 5,
  kCorruptEvalStream = 6,
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize_note(std::string note) {
  std::replace(note.begin(), note.end(), ',', ';');
  std::replace(note.begin(), note.end(), '\n', ' ');
  return note;
}

std::uint64_t replication_seed(const SweepConfig& cfg, std::size_t width, std::size_t depth,
                               double noise_level, std::size_t replication) {
  if (cfg.share_truth_across_cells) return hash64(cfg.base_seed, replication);
  return cell_seed(cfg.base_seed, width, depth, noise_level, replication);
}

struct CellSpec {
  std::size_t width, depth;
  double noise_level;
  std::size_t replication;
};

// Runs the cells in a worker pool and hands rows to `sink` in cell order.
std::vector<ResultRow> run_cells(const SweepConfig& cfg, const std::string& experiment_id,
                                 const std::vector<CellSpec>& cells, const RowSink& sink) {
  std::vector<ResultRow> rows(cells.size());
  std::vector<char> done(cells.size(), 0);
  std::size_t flushed = 0;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      ResultRow row = run_cell(cfg, experiment_id, c.width, c.depth, c.noise_level, c.replication);
      std::lock_guard lock(mutex);
      rows[i] = std::move(row);
      done[i] = 1;
      while (flushed < cells.size() && done[flushed]) {
        if (sink) sink(rows[flushed]);
        ++flushed;
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cells.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return rows;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

ComparisonModel SweepConfig::model() const {
  if (tie_param > 0.0) {
    ComparisonModel m{model_kind, tie_param};
    m.validate();
    return m;
  }
  return ComparisonModel::make(model_kind);
}

void SweepConfig::validate() const {
  if (d == 0) throw ConfigError("d must be positive");
  if (widths.empty() || depths.empty()) throw ConfigError("widths and depths must be nonempty");
  if (noise_levels.empty()) throw ConfigError("noise_levels must be nonempty");
  for (auto w : widths)
    if (w == 0) throw ConfigError("widths must be positive");
  for (auto dd : depths)
    if (dd == 0) throw ConfigError("depths must be positive");
  for (double m : noise_levels)
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("noise levels must lie in [0, 1]");
  if (replications == 0) throw ConfigError("replications must be positive");
  if (split_sizes.train == 0 || split_sizes.eval == 0 || split_sizes.test == 0)
    throw ConfigError("split sizes must be positive");
  if (fixed_width == 0 || fixed_depth == 0) throw ConfigError("fixed architecture must be positive");
  training.validate();
  model().validate();
}

static void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                         std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"reward_family", "model_kind", "tie_param", "d", "widths", "depths",
                       "noise_levels", "replications", "split_sizes", "base_seed", "training",
                       "fixed_width", "fixed_depth", "share_truth_across_cells", "jobs"},
                      "sweep config");
  SweepConfig cfg;
  if (j.contains("reward_family"))
    cfg.reward_family = parse_reward_family(j.at("reward_family").get<std::string>());
  if (j.contains("model_kind"))
    cfg.model_kind = parse_model_kind(j.at("model_kind").get<std::string>());
  cfg.tie_param = get_or(j, "tie_param", cfg.tie_param);
  cfg.d = get_or(j, "d", cfg.d);
  cfg.widths = get_or(j, "widths", cfg.widths);
  cfg.depths = get_or(j, "depths", cfg.depths);
  cfg.noise_levels = get_or(j, "noise_levels", cfg.noise_levels);
  cfg.replications = get_or(j, "replications", cfg.replications);
  if (j.contains("split_sizes")) {
    auto s = j.at("split_sizes").get<std::vector<std::size_t>>();
    if (s.size() != 3) throw ConfigError("split_sizes must list N_train, N_eval, N_test");
    cfg.split_sizes = {s[0], s[1], s[2]};
  }
  cfg.base_seed = get_or(j, "base_seed", cfg.base_seed);
  cfg.fixed_width = get_or(j, "fixed_width", cfg.fixed_width);
  cfg.fixed_depth = get_or(j, "fixed_depth", cfg.fixed_depth);
  cfg.share_truth_across_cells = get_or(j, "share_truth_across_cells", cfg.share_truth_across_cells);
  cfg.jobs = get_or(j, "jobs", cfg.jobs);
  if (j.contains("training")) {
    const auto& t = j.at("training");
    reject_unknown_keys(t,
                        {"batch_size", "max_epochs", "learning_rate", "adaptive_moment_betas",
                         "epsilon", "early_stop_patience", "seed"},
                        "training config");
    auto& tc = cfg.training;
    tc.batch_size = get_or(t, "batch_size", tc.batch_size);
    tc.max_epochs = get_or(t, "max_epochs", tc.max_epochs);
    tc.learning_rate = get_or(t, "learning_rate", tc.learning_rate);
    if (t.contains("adaptive_moment_betas")) {
      auto b = t.at("adaptive_moment_betas").get<std::vector<double>>();
      if (b.size() != 2) throw ConfigError("adaptive_moment_betas must have two entries");
      tc.beta1 = b[0];
      tc.beta2 = b[1];
    }
    tc.epsilon = get_or(t, "epsilon", tc.epsilon);
    tc.early_stop_patience = get_or(t, "early_stop_patience", tc.early_stop_patience);
    tc.seed = get_or(t, "seed", tc.seed);
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const SweepConfig& cfg) {
  const auto& t = cfg.training;
  return {
      {"reward_family", std::string(to_string(cfg.reward_family))},
      {"model_kind", std::string(to_string(cfg.model_kind))},
      {"tie_param", cfg.tie_param},
      {"d", cfg.d},
      {"widths", cfg.widths},
      {"depths", cfg.depths},
      {"noise_levels", cfg.noise_levels},
      {"replications", cfg.replications},
      {"split_sizes", {cfg.split_sizes.train, cfg.split_sizes.eval, cfg.split_sizes.test}},
      {"base_seed", cfg.base_seed},
      {"fixed_width", cfg.fixed_width},
      {"fixed_depth", cfg.fixed_depth},
      {"share_truth_across_cells", cfg.share_truth_across_cells},
      {"jobs", cfg.jobs},
      {"training",
       {{"batch_size", t.batch_size},
        {"max_epochs", t.max_epochs},
        {"learning_rate", t.learning_rate},
        {"adaptive_moment_betas", {t.beta1, t.beta2}},
        {"epsilon", t.epsilon},
        {"early_stop_patience", t.early_stop_patience},
        {"seed", t.seed}}},
  };
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return sweep_config_from_json(nlohmann::json::parse(in));
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t width, std::size_t depth,
                        double noise_level, std::size_t replication) {
  return hash64(base_seed, width, depth, std::bit_cast<std::uint64_t>(noise_level), replication);
}

ReplicationData make_replication_data(const SweepConfig& cfg, std::size_t width,
                                      std::size_t depth, double noise_level,
                                      std::size_t replication) {
  const auto model = cfg.model();
  const std::uint64_t rep = replication_seed(cfg, width, depth, noise_level, replication);
  Rng truth_rng(hash64(rep, kTruthStream));
  ReplicationData data;
  data.truth = GroundTruthReward::random(cfg.reward_family, cfg.d, truth_rng);
  data.train = generate_dataset(data.truth, model, cfg.split_sizes.train, hash64(rep, kTrainStream));
  data.eval = generate_dataset(data.truth, model, cfg.split_sizes.eval, hash64(rep, kEvalStream));
  data.test = generate_dataset(data.truth, model, cfg.split_sizes.test, hash64(rep, kTestStream));
  if (noise_level > 0.0) {
    const auto bits = std::bit_cast<std::uint64_t>(noise_level);
    data.train = corrupt_dataset(data.train, noise_level, hash64(rep, kCorruptTrainStream, bits));
    data.eval = corrupt_dataset(data.eval, noise_level, hash64(rep, kCorruptEvalStream, bits));
  }
  return data;
}

ResultRow run_cell(const SweepConfig& cfg, const std::string& experiment_id, std::size_t width,
                   std::size_t depth, double noise_level, std::size_t replication) {
  const auto started = std::chrono::steady_clock::now();
  ResultRow row;
  row.experiment_id = experiment_id;
  row.reward_family = to_string(cfg.reward_family);
  row.model_kind = to_string(cfg.model_kind);
  row.width = width;
  row.depth = depth;
  row.noise_level = noise_level;
  row.replication = replication;
  row.seed = cell_seed(cfg.base_seed, width, depth, noise_level, replication);
  try {
    const auto model = cfg.model();
    auto data = make_replication_data(cfg, width, depth, noise_level, replication);
    auto arch = MLPArchitecture::rectangular(cfg.d, width, depth, data.truth.action_count);
    TrainingConfig tc = cfg.training;
    tc.seed = row.seed;
    auto fit = train_mle(data.train, data.eval, arch, model, tc);

    const auto states = data.test.states();
    const auto r_hat = as_reward_function(fit.params);
    row.regret = regret_mc(r_hat, data.truth, states);
    row.disagreement_rate = disagreement_rate(r_hat, data.truth, states);
    row.l2_error_sq = l2_error_sq(r_hat, data.truth, states);
    row.test_loglik = empirical_loglik(fit.params, data.test, model);
    row.train_nll_final = fit.history.train_nll.back();
    row.eval_nll_best = fit.history.best_eval_nll();
    row.lambda2 = build_laplacian(dataset_counts(data.train), static_cast<long>(data.train.size())).lambda2;
  } catch (const std::exception& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.regret = row.disagreement_rate = row.test_loglik = nan;
    row.train_nll_final = row.eval_nll_best = row.l2_error_sq = row.lambda2 = nan;
    row.note = sanitize_note(e.what());
  }
  row.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return row;
}

std::vector<ResultRow> run_arch_sweep(const SweepConfig& cfg, const RowSink& sink) {
  cfg.validate();
  std::vector<CellSpec> cells;
  for (std::size_t rep = 0; rep < cfg.replications; ++rep)
    for (auto w : cfg.widths)
      for (auto dd : cfg.depths) cells.push_back({w, dd, 0.0, rep});
  return run_cells(cfg, "arch", cells, sink);
}

std::vector<ResultRow> run_noise_sweep(const SweepConfig& cfg, const RowSink& sink) {
  cfg.validate();
  std::vector<CellSpec> cells;
  for (std::size_t rep = 0; rep < cfg.replications; ++rep)
    for (double m : cfg.noise_levels) cells.push_back({cfg.fixed_width, cfg.fixed_depth, m, rep});
  return run_cells(cfg, "noise", cells, sink);
}

double replication_random_regret(const SweepConfig& cfg, std::size_t replication) {
  auto data = make_replication_data(cfg, cfg.fixed_width, cfg.fixed_depth, 0.0, replication);
  return random_policy_regret(data.truth, data.test.states());
}

void write_results_header(std::ostream& out) {
  out << kResultsSchemaLine << '\n'
      << "experiment_id,reward_family,model_kind,width,depth,noise_level,replication,seed,"
         "regret,disagreement_rate,test_loglik,train_nll_final,eval_nll_best,l2_error_sq,"
         "lambda2,wall_time_seconds,note\n";
}

void write_result_row(std::ostream& out, const ResultRow& row) {
  out << row.experiment_id << ',' << row.reward_family << ',' << row.model_kind << ','
      << row.width << ',' << row.depth << ',' << g17(row.noise_level) << ',' << row.replication
      << ',' << row.seed << ',' << g17(row.regret) << ',' << g17(row.disagreement_rate) << ','
      << g17(row.test_loglik) << ',' << g17(row.train_nll_final) << ','
      << g17(row.eval_nll_best) << ',' << g17(row.l2_error_sq) << ',' << g17(row.lambda2) << ','
      << g17(row.wall_time_seconds) << ',' << sanitize_note(row.note) << '\n';
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  std::vector<ResultRow> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() == 16) f.emplace_back();
    if (f.size() != 17) throw DomainError("results row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.experiment_id = f[0];
    r.reward_family = f[1];
    r.model_kind = f[2];
    r.width = std::stoul(f[3]);
    r.depth = std::stoul(f[4]);
    r.noise_level = std::stod(f[5]);
    r.replication = std::stoul(f[6]);
    r.seed = std::stoull(f[7]);
    r.regret = std::stod(f[8]);
    r.disagreement_rate = std::stod(f[9]);
    r.test_loglik = std::stod(f[10]);
    r.train_nll_final = std::stod(f[11]);
    r.eval_nll_best = std::stod(f[12]);
    r.l2_error_sq = std::stod(f[13]);
    r.lambda2 = std::stod(f[14]);
    r.wall_time_seconds = std::stod(f[15]);
    r.note = f[16];
    rows.push_back(std::move(r));
  }
  return rows;
}

struct ResultsAppender::Impl {
  std::mutex mutex;
  std::ofstream out;
};

ResultsAppender::ResultsAppender(const std::filesystem::path& path)
    : impl_(std::make_shared<Impl>()) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  impl_->out.open(path, std::ios::app);
  if (!impl_->out) throw std::runtime_error("cannot open " + path.string() + " for appending");
  if (fresh) {
    write_results_header(impl_->out);
    impl_->out.flush();
  }
}

void ResultsAppender::append(const ResultRow& row) {
  std::lock_guard lock(impl_->mutex);
  write_result_row(impl_->out, row);
  impl_->out.flush();
}

std::vector<GraphSpectrumRow> run_graph_spectrum(const std::vector<GraphDesign>& designs,
                                                 const std::vector<std::size_t>& action_counts,
                                                 long n) {
  std::vector<GraphSpectrumRow> rows;
  for (auto design : designs)
    for (auto m : action_counts) {
      auto counts = design_counts(design, m, n);
      rows.push_back({design, m, build_laplacian(counts, n).lambda2});
    }
  return rows;
}

void write_graph_spectrum_csv(const std::vector<GraphSpectrumRow>& rows, std::ostream& out) {
  out << "design,m,lambda2\n";
  for (const auto& r : rows)
    out << to_string(r.design) << ',' << r.action_count << ',' << g17(r.lambda2) << '\n';
}

std::vector<HistogramBin> export_probability_histogram(const ComparisonDataset& ds,
                                                       std::size_t bins) {
  return probability_histogram(dataset_win_probabilities(ds), bins);
}

void write_histogram_csv(const std::vector<HistogramBin>& bins, std::ostream& out) {
  out << "bin_left,bin_right,count\n";
  for (const auto& b : bins) out << g17(b.left) << ',' << g17(b.right) << ',' << b.count << '\n';
}

MarginReport diagnose_margin(RewardFamily family, const ComparisonModel& model, std::size_t d,
                             std::size_t n_states, double t_min, double t_max,
                             std::size_t t_points, std::uint64_t seed) {
  Rng truth_rng(hash64(seed, kTruthStream));
  Rng state_rng(hash64(seed, kTestStream));
  MarginReport report;
  report.truth = GroundTruthReward::random(family, d, truth_rng);
  auto states = sample_uniform_states(n_states, d, state_rng);
  auto grid = log_grid(t_min, t_max, t_points);
  report.probability_gap = margin_cdf(report.truth, model, states, grid, MarginKind::ProbabilityGap);
  report.reward_gap = margin_cdf(report.truth, model, states, grid, MarginKind::RewardGap);
  return report;
}

void write_margin_csv(const MarginReport& report, std::ostream& out) {
  out << "t,cdf_prob_gap,cdf_reward_gap\n";
  for (std::size_t i = 0; i < report.probability_gap.t_grid.size(); ++i)
    out << g17(report.probability_gap.t_grid[i]) << ',' << g17(report.probability_gap.cdf_values[i])
        << ',' << g17(report.reward_gap.cdf_values[i]) << '\n';
}

}  // namespace deeprm
