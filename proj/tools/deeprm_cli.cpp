// Command-line front end: data generation, training, sweeps and diagnostics.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "deeprm/error.hpp"
#include "deeprm/experiment_harness.hpp"
#include "deeprm/margin_diagnostics.hpp"
#include "deeprm/training.hpp"

namespace fs = std::filesystem;
using namespace deeprm;

namespace {

struct GlobalOptions {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
};

SweepConfig load_config(const GlobalOptions& g) {
  SweepConfig cfg = g.config.empty() ? SweepConfig{} : load_sweep_config(g.config);
  if (g.jobs) cfg.jobs = *g.jobs;
  if (g.seed) cfg.base_seed = *g.seed;
  cfg.validate();
  return cfg;
}

fs::path in_out_dir(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

fs::path resolve_output(const GlobalOptions& g, const std::string& given,
                        const std::string& fallback) {
  if (given.empty()) return in_out_dir(g, fallback);
  fs::path p(given);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

ComparisonModel model_from(const std::string& name, double tie_param) {
  auto kind = parse_model_kind(name);
  if (tie_param == 0.0) return ComparisonModel::make(kind);
  ComparisonModel m{kind, tie_param};
  m.validate();
  return m;
}

void print_row(const ResultRow& row) {
  std::fprintf(stderr, "%s w=%zu D=%zu m=%.3g rep=%zu regret=%.6g disagree=%.4f eval_nll=%.6f%s%s\n",
               row.experiment_id.c_str(), row.width, row.depth, row.noise_level, row.replication,
               row.regret, row.disagreement_rate, row.eval_nll_best, row.note.empty() ? "" : " ",
               row.note.c_str());
}

int run_sweep(const GlobalOptions& g, bool noise, std::optional<std::size_t> replications,
              const std::string& out_csv) {
  auto cfg = load_config(g);
  if (replications) cfg.replications = *replications;
  const auto path = resolve_output(g, out_csv, noise ? "noise_results.csv" : "arch_results.csv");
  ResultsAppender appender(path);
  auto sink = [&](const ResultRow& row) {
    appender.append(row);
    print_row(row);
  };
  auto rows = noise ? run_noise_sweep(cfg, sink) : run_arch_sweep(cfg, sink);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.note.empty();
  std::printf("%zu rows written to %s (%zu failed)\n", rows.size(), path.string().c_str(), failed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep reward modeling from pairwise comparisons"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Sweep configuration JSON file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Directory for default output files");
  app.add_option("--jobs", g.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Base seed");
  app.fallthrough();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic comparison dataset");
  std::string gen_family = "sinusoidal", gen_model = "bt", gen_out;
  std::size_t gen_d = 10, gen_n = 4096;
  double gen_noise = 0.0, gen_tie = 0.0;
  std::uint64_t gen_truth_seed = 0;
  gen->add_option("--reward-family", gen_family, "sinusoidal | hermite-gaussian | composite-sinusoid");
  gen->add_option("--model", gen_model, "bt | thurstonian | rao-kupper | davidson");
  gen->add_option("--tie-param", gen_tie, "Rao-Kupper theta or Davidson nu (0 = default)");
  gen->add_option("--d", gen_d, "State dimension")->check(CLI::PositiveNumber);
  gen->add_option("--n", gen_n, "Number of comparisons")->check(CLI::PositiveNumber);
  gen->add_option("--noise", gen_noise, "Corruption level m")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--truth-seed", gen_truth_seed, "Seed for w*; datasets from the same truth share it");
  gen->add_option("--out", gen_out, "Output CSV (default <out-dir>/data.csv)");

  // train
  auto* train = app.add_subcommand("train", "Fit a reward network by maximum likelihood");
  std::string tr_data, tr_eval, tr_model = "bt", tr_ckpt, tr_hist;
  std::size_t tr_width = 64, tr_depth = 4;
  double tr_tie = 0.0;
  TrainingConfig tc;
  train->add_option("--data", tr_data, "Training dataset CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--eval-data", tr_eval, "Evaluation dataset CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--width", tr_width, "Hidden width")->check(CLI::PositiveNumber);
  train->add_option("--depth", tr_depth, "Number of hidden layers")->check(CLI::PositiveNumber);
  train->add_option("--model", tr_model, "bt | thurstonian | rao-kupper | davidson");
  train->add_option("--tie-param", tr_tie, "Rao-Kupper theta or Davidson nu (0 = default)");
  train->add_option("--batch-size", tc.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--lr", tc.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--max-epochs", tc.max_epochs)->check(CLI::PositiveNumber);
  train->add_option("--patience", tc.early_stop_patience)->check(CLI::PositiveNumber);
  train->add_option("--out-checkpoint", tr_ckpt, "Checkpoint path (default <out-dir>/model.bin)");
  train->add_option("--history-csv", tr_hist, "Per-epoch loss CSV");

  // sweeps
  auto* arch = app.add_subcommand("arch-sweep", "Regret over a width x depth grid");
  auto* noise = app.add_subcommand("noise-sweep", "Regret over label-corruption levels");
  std::optional<std::size_t> sweep_reps;
  std::string sweep_out;
  for (auto* sub : {arch, noise}) {
    sub->add_option("--replications", sweep_reps, "Override the configured replication count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out-csv", sweep_out, "Results CSV (appended)");
  }

  // diagnose-margin
  auto* margin = app.add_subcommand("diagnose-margin", "Empirical margin CDFs and exponent fit");
  std::string mg_family = "sinusoidal", mg_model = "bt", mg_out;
  std::size_t mg_states = 100000, mg_points = 50, mg_d = 10;
  double mg_tmin = 1e-3, mg_tmax = 0.45;
  std::uint64_t mg_seed = 0;
  margin->add_option("--reward-family", mg_family);
  margin->add_option("--model", mg_model);
  margin->add_option("--d", mg_d)->check(CLI::PositiveNumber);
  margin->add_option("--n-states", mg_states)->check(CLI::PositiveNumber);
  margin->add_option("--t-min", mg_tmin)->check(CLI::PositiveNumber);
  margin->add_option("--t-max", mg_tmax)->check(CLI::PositiveNumber);
  margin->add_option("--t-points", mg_points)->check(CLI::Range(2, 100000));
  auto* mg_seed_opt = margin->add_option("--seed", mg_seed);
  margin->add_option("--out-csv", mg_out, "Output CSV (default <out-dir>/margin.csv)");

  // graph-spectrum
  auto* graph = app.add_subcommand("graph-spectrum", "Spectral gap of comparison designs");
  std::vector<std::string> gs_designs = {"complete", "star", "path", "cycle"};
  std::vector<std::size_t> gs_actions = {3, 4, 8, 16};
  long gs_n = 10000;
  std::string gs_out;
  graph->add_option("--designs", gs_designs)->delimiter(',');
  graph->add_option("--action-counts", gs_actions)->delimiter(',');
  graph->add_option("--n", gs_n, "Total comparisons per design")->check(CLI::PositiveNumber);
  graph->add_option("--out-csv", gs_out, "Output CSV (default <out-dir>/graph_spectrum.csv)");

  // export-hist
  auto* hist = app.add_subcommand("export-hist", "Histogram of stored win probabilities");
  std::string eh_data, eh_model = "bt", eh_out;
  std::size_t eh_bins = 20;
  hist->add_option("--data", eh_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  hist->add_option("--model", eh_model);
  hist->add_option("--bins", eh_bins)->check(CLI::Range(2, 100000));
  hist->add_option("--out-csv", eh_out, "Output CSV (default <out-dir>/histogram.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const std::uint64_t seed = g.seed.value_or(0);
      Rng truth_rng(hash64(gen_truth_seed, std::uint64_t{1}));
      auto gt = GroundTruthReward::random(parse_reward_family(gen_family), gen_d, truth_rng);
      auto model = model_from(gen_model, gen_tie);
      auto ds = generate_dataset(gt, model, gen_n, seed);
      if (gen_noise > 0.0) ds = corrupt_dataset(ds, gen_noise, hash64(seed, std::uint64_t{5}));
      const auto path = resolve_output(g, gen_out, "data.csv");
      write_dataset_csv(ds, path);
      std::printf("%zu comparisons written to %s\n", ds.size(), path.string().c_str());
    } else if (*train) {
      auto model = model_from(tr_model, tr_tie);
      auto train_ds = read_dataset_csv(fs::path(tr_data), model.kind);
      auto eval_ds = read_dataset_csv(fs::path(tr_eval), model.kind);
      tc.seed = g.seed.value_or(0);
      auto arch_def = MLPArchitecture::rectangular(train_ds.d, tr_width, tr_depth, train_ds.action_count);
      auto result = train_mle(train_ds, eval_ds, arch_def, model, tc);
      const auto ckpt = resolve_output(g, tr_ckpt, "model.bin");
      write_checkpoint(result.params, ckpt);
      if (!tr_hist.empty()) write_history_csv(result.history, resolve_output(g, tr_hist, ""));
      const auto& h = result.history;
      std::printf("epochs %d, best epoch %d, best eval nll %.6f, %.2f s; checkpoint %s\n",
                  h.epochs_run(), h.best_epoch, h.best_eval_nll(), h.wall_time_seconds,
                  ckpt.string().c_str());
    } else if (*arch || *noise) {
      return run_sweep(g, static_cast<bool>(*noise), sweep_reps, sweep_out);
    } else if (*margin) {
      const std::uint64_t seed = mg_seed_opt->count() ? mg_seed : g.seed.value_or(0);
      auto report = diagnose_margin(parse_reward_family(mg_family), model_from(mg_model, 0.0), mg_d,
                                    mg_states, mg_tmin, mg_tmax, mg_points, seed);
      const auto path = resolve_output(g, mg_out, "margin.csv");
      auto out = open_output(path);
      write_margin_csv(report, out);
      try {
        auto fit = fit_margin_exponent(report.probability_gap);
        std::printf("alpha_hat %.6f slope %.6f c_hat %.6g r2 %.4f over [%g, %g] (%zu points)\n",
                    fit.alpha_hat, fit.slope, fit.c_hat, fit.r_squared, fit.fit_range.first,
                    fit.fit_range.second, fit.points_used);
      } catch (const DomainError& e) {
        std::fprintf(stderr, "exponent fit unavailable: %s\n", e.what());
      }
      std::printf("margin curves written to %s\n", path.string().c_str());
    } else if (*graph) {
      std::vector<GraphDesign> designs;
      for (const auto& name : gs_designs) designs.push_back(parse_graph_design(name));
      auto rows = run_graph_spectrum(designs, gs_actions, gs_n);
      const auto path = resolve_output(g, gs_out, "graph_spectrum.csv");
      auto out = open_output(path);
      write_graph_spectrum_csv(rows, out);
      write_graph_spectrum_csv(rows, std::cout);
    } else if (*hist) {
      auto ds = read_dataset_csv(fs::path(eh_data), parse_model_kind(eh_model));
      auto bins = export_probability_histogram(ds, eh_bins);
      const auto path = resolve_output(g, eh_out, "histogram.csv");
      auto out = open_output(path);
      write_histogram_csv(bins, out);
      std::printf("histogram of %zu probabilities written to %s\n", ds.size(), path.string().c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
