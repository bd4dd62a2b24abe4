#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "deeprm/error.hpp"
#include "deeprm/experiment_harness.hpp"
#include "doctest.h"

using namespace deeprm;

namespace {

SweepConfig tiny_config() {
  SweepConfig cfg;
  cfg.d = 4;
  cfg.widths = {4, 8};
  cfg.depths = {1, 2};
  cfg.noise_levels = {0.0, 0.5};
  cfg.replications = 2;
  cfg.split_sizes = {256, 128, 512};
  cfg.base_seed = 7;
  cfg.training.batch_size = 64;
  cfg.training.max_epochs = 4;
  cfg.training.early_stop_patience = 2;
  cfg.fixed_width = 8;
  cfg.fixed_depth = 2;
  return cfg;
}

std::string csv_without_wall_time(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_results_header(out);
  for (auto row : rows) {
    row.wall_time_seconds = 0.0;
    write_result_row(out, row);
  }
  return out.str();
}

bool same_metrics(const ResultRow& a, const ResultRow& b) {
  return a.seed == b.seed && a.regret == b.regret && a.disagreement_rate == b.disagreement_rate &&
         a.test_loglik == b.test_loglik && a.train_nll_final == b.train_nll_final &&
         a.eval_nll_best == b.eval_nll_best && a.l2_error_sq == b.l2_error_sq &&
         a.lambda2 == b.lambda2;
}

}  // namespace

TEST_CASE("cell seeds") {
  CHECK(cell_seed(1, 4, 3, 0.0, 0) == cell_seed(1, 4, 3, 0.0, 0));
  std::set<std::uint64_t> seen;
  for (std::size_t w : {4, 16})
    for (std::size_t dd : {3, 5})
      for (double m : {0.0, 0.1, 0.2})
        for (std::size_t r = 0; r < 3; ++r) seen.insert(cell_seed(1, w, dd, m, r));
  CHECK(seen.size() == 2 * 2 * 3 * 3);
  CHECK(cell_seed(1, 4, 3, 0.0, 0) != cell_seed(2, 4, 3, 0.0, 0));
  CHECK(cell_seed(1, 4, 3, 0.0, 0) == hash64(std::uint64_t{1}, std::uint64_t{4}, std::uint64_t{3},
                                             std::uint64_t{0}, std::uint64_t{0}));
}

TEST_CASE("config validation and json") {
  auto cfg = tiny_config();
  cfg.validate();
  auto j = to_json(cfg);
  CHECK(j.at("split_sizes") == nlohmann::json::array({256, 128, 512}));
  CHECK(j.at("reward_family") == "sinusoidal");
  auto back = sweep_config_from_json(j);
  CHECK(back.widths == cfg.widths);
  CHECK(back.depths == cfg.depths);
  CHECK(back.noise_levels == cfg.noise_levels);
  CHECK(back.replications == cfg.replications);
  CHECK(back.split_sizes.eval == 128);
  CHECK(back.base_seed == 7);
  CHECK(back.training.max_epochs == 4);
  CHECK(back.training.batch_size == 64);
  CHECK(back.fixed_width == 8);

  auto partial = sweep_config_from_json(nlohmann::json::parse(
      R"({"model_kind": "thurstonian", "reward_family": "hermite-gaussian", "replications": 3})"));
  CHECK(partial.model_kind == ModelKind::Thurstonian);
  CHECK(partial.reward_family == RewardFamily::HermiteGaussian);
  CHECK(partial.replications == 3);
  CHECK(partial.widths == SweepConfig{}.widths);

  CHECK_THROWS_AS(sweep_config_from_json(nlohmann::json::parse(R"({"widthz": [4]})")), ConfigError);
  CHECK_THROWS_AS(sweep_config_from_json(nlohmann::json::parse(R"({"widths": []})")), ConfigError);
  CHECK_THROWS_AS(sweep_config_from_json(nlohmann::json::parse(R"({"noise_levels": [1.5]})")), ConfigError);
  CHECK_THROWS_AS(sweep_config_from_json(nlohmann::json::parse(R"({"split_sizes": [10, 0, 10]})")),
                  ConfigError);

  auto dir = std::filesystem::temp_directory_path() / "deeprm_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "cfg.json");
    f << j.dump(2);
  }
  CHECK(load_sweep_config(dir / "cfg.json").widths == cfg.widths);
  std::filesystem::remove_all(dir);
}

TEST_CASE("arch sweep cardinality, order and determinism") {
  auto cfg = tiny_config();
  std::vector<ResultRow> streamed;
  auto rows = run_arch_sweep(cfg, [&](const ResultRow& r) { streamed.push_back(r); });
  REQUIRE(rows.size() == 2 * 2 * 2);
  CHECK(streamed.size() == rows.size());
  std::size_t i = 0;
  for (std::size_t rep = 0; rep < 2; ++rep)
    for (std::size_t w : {4, 8})
      for (std::size_t dd : {1, 2}) {
        CHECK(rows[i].replication == rep);
        CHECK(rows[i].width == w);
        CHECK(rows[i].depth == dd);
        CHECK(rows[i].experiment_id == "arch");
        CHECK(rows[i].note.empty());
        CHECK(rows[i].regret >= 0.0);
        CHECK(rows[i].disagreement_rate >= 0.0);
        CHECK(rows[i].disagreement_rate <= 1.0);
        CHECK(rows[i].seed == cell_seed(7, w, dd, 0.0, rep));
        CHECK(same_metrics(rows[i], streamed[i]));
        ++i;
      }
  auto again = run_arch_sweep(cfg);
  CHECK(csv_without_wall_time(rows) == csv_without_wall_time(again));

  auto parallel_cfg = cfg;
  parallel_cfg.jobs = 3;
  CHECK(csv_without_wall_time(run_arch_sweep(parallel_cfg)) == csv_without_wall_time(rows));
}

TEST_CASE("noise sweep") {
  auto cfg = tiny_config();
  auto rows = run_noise_sweep(cfg);
  REQUIRE(rows.size() == 2 * 2);
  CHECK(rows[0].noise_level == 0.0);
  CHECK(rows[1].noise_level == 0.5);
  CHECK(rows[0].experiment_id == "noise");

  auto arch_cfg = cfg;
  arch_cfg.widths = {cfg.fixed_width};
  arch_cfg.depths = {cfg.fixed_depth};
  auto arch_rows = run_arch_sweep(arch_cfg);
  CHECK(same_metrics(rows[0], arch_rows[0]));
  CHECK(same_metrics(rows[2], arch_rows[1]));
  CHECK_FALSE(same_metrics(rows[0], rows[1]));
}

TEST_CASE("replication data") {
  auto cfg = tiny_config();
  auto clean = make_replication_data(cfg, 4, 1, 0.0, 0);
  auto noisy = make_replication_data(cfg, 4, 1, 0.5, 0);
  CHECK(clean.truth.w_star == noisy.truth.w_star);
  CHECK(clean.truth.w_star == make_replication_data(cfg, 8, 2, 0.0, 0).truth.w_star);
  CHECK(clean.truth.w_star != make_replication_data(cfg, 4, 1, 0.0, 1).truth.w_star);
  CHECK(noisy.train.corruption_level == 0.5);
  CHECK(noisy.eval.corruption_level == 0.5);
  CHECK(noisy.test.corruption_level == 0.0);

  // Test sets are never corrupted.
  auto model = cfg.model();
  for (const auto& smp : noisy.test.samples) {
    const double u = true_reward(noisy.truth, smp.s, smp.a1) - true_reward(noisy.truth, smp.s, smp.a0);
    CHECK(std::abs(smp.p_win - win_probability(model, u)) <= 1e-12);
  }
  // Corrupted indices carry p_win in [0.4, 0.6].
  std::size_t changed = 0;
  for (std::size_t k = 0; k < clean.train.size(); ++k)
    if (clean.train.samples[k].p_win != noisy.train.samples[k].p_win) {
      ++changed;
      CHECK(noisy.train.samples[k].p_win >= 0.4);
      CHECK(noisy.train.samples[k].p_win <= 0.6);
    }
  CHECK(changed == 128);

  auto unshared = cfg;
  unshared.share_truth_across_cells = false;
  CHECK(make_replication_data(unshared, 4, 1, 0.0, 0).truth.w_star !=
        make_replication_data(unshared, 8, 1, 0.0, 0).truth.w_star);

  CHECK(replication_random_regret(cfg, 0) > 0.0);
}

TEST_CASE("failed cells produce sentinel rows") {
  auto cfg = tiny_config();
  cfg.training.learning_rate = 1e300;
  auto row = run_cell(cfg, "arch", 8, 2, 0.0, 0);
  CHECK(std::isnan(row.regret));
  CHECK_FALSE(row.note.empty());
  CHECK(row.note.find(',') == std::string::npos);
  CHECK(row.note.find('\n') == std::string::npos);
}

TEST_CASE("results csv round trip and appender") {
  auto cfg = tiny_config();
  cfg.widths = {4};
  cfg.depths = {1};
  auto rows = run_arch_sweep(cfg);
  ResultRow failed = rows[0];
  failed.regret = std::numeric_limits<double>::quiet_NaN();
  failed.note = "training diverged";
  rows.push_back(failed);

  std::stringstream buffer;
  write_results_header(buffer);
  for (const auto& r : rows) write_result_row(buffer, r);
  std::string first_line;
  std::getline(std::istringstream(buffer.str()) >> std::ws, first_line);
  CHECK(first_line == kResultsSchemaLine);
  auto back = read_results_csv(buffer);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(same_metrics(back[i], rows[i]));
    CHECK(back[i].wall_time_seconds == rows[i].wall_time_seconds);
    CHECK(back[i].experiment_id == rows[i].experiment_id);
    CHECK(back[i].model_kind == rows[i].model_kind);
  }
  CHECK(std::isnan(back.back().regret));
  CHECK(back.back().note == "training diverged");

  auto dir = std::filesystem::temp_directory_path() / "deeprm_appender_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = dir / "results.csv";
  {
    ResultsAppender appender(path);
    appender.append(rows[0]);
  }
  {
    ResultsAppender appender(path);
    appender.append(rows[1]);
  }
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t schema_lines = 0;
  for (std::size_t pos = 0; (pos = text.find(kResultsSchemaLine, pos)) != std::string::npos; ++pos)
    ++schema_lines;
  CHECK(schema_lines == 1);
  std::istringstream text_in(text);
  CHECK(read_results_csv(text_in).size() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("graph spectrum") {
  auto rows = run_graph_spectrum({GraphDesign::Complete, GraphDesign::Path, GraphDesign::Star},
                                 {2, 4, 6}, 600);
  REQUIRE(rows.size() == 9);
  double complete4 = 0.0, path4 = 0.0;
  for (const auto& r : rows) {
    if (r.design == GraphDesign::Complete && r.action_count == 4) complete4 = r.lambda2;
    if (r.design == GraphDesign::Path && r.action_count == 4) path4 = r.lambda2;
    if (r.design == GraphDesign::Star) CHECK(r.lambda2 > 0.0);
  }
  CHECK(std::abs(complete4 - 2.0 / 3.0) <= 1e-10);
  CHECK(path4 < complete4);
  std::ostringstream out;
  write_graph_spectrum_csv(rows, out);
  CHECK(out.str().rfind("design,m,lambda2\n", 0) == 0);
}

TEST_CASE("probability histogram export") {
  GroundTruthReward zero;
  zero.w_star.assign(zero.d, 0.0);
  auto ds = generate_dataset(zero, ComparisonModel::bradley_terry(), 1000, 1);
  auto bins = export_probability_histogram(ds, 10);
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  CHECK(total == 1000);
  CHECK(bins[5].count == 1000);

  Rng rng(2);
  auto gt = GroundTruthReward::random(RewardFamily::Sinusoidal, 10, rng);
  auto corrupted = corrupt_dataset(generate_dataset(gt, ComparisonModel::bradley_terry(), 2000, 3), 1.0, 4);
  for (const auto& b : export_probability_histogram(corrupted, 10))
    if (b.right <= 0.4 + 1e-12 || b.left >= 0.6 - 1e-12) CHECK(b.count == 0);

  std::ostringstream out;
  write_histogram_csv(bins, out);
  CHECK(out.str().rfind("bin_left,bin_right,count\n", 0) == 0);
}

TEST_CASE("margin report") {
  auto report = diagnose_margin(RewardFamily::Sinusoidal, ComparisonModel::bradley_terry(), 10,
                                20000, 0.005, 0.45, 25, 3);
  CHECK(report.probability_gap.t_grid.size() == 25);
  CHECK(report.reward_gap.t_grid == report.probability_gap.t_grid);
  CHECK(report.probability_gap.n_states == 20000);
  auto again = diagnose_margin(RewardFamily::Sinusoidal, ComparisonModel::bradley_terry(), 10, 20000,
                               0.005, 0.45, 25, 3);
  CHECK(again.probability_gap.cdf_values == report.probability_gap.cdf_values);
  std::ostringstream out;
  write_margin_csv(report, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,cdf_prob_gap,cdf_reward_gap");
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 25);
}
