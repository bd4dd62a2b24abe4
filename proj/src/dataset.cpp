#include "deeprm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "deeprm/error.hpp"

namespace deeprm {
namespace {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void check_counts_shape(const CountMatrix& counts) {
  const std::size_t m = counts.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (counts[i].size() != m) throw DomainError("count matrix must be square");
    if (counts[i][i] != 0) throw DomainError("count matrix must have a zero diagonal");
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (counts[i][j] < 0) throw DomainError("comparison counts must be nonnegative");
      if (counts[i][j] != counts[j][i]) throw DomainError("comparison counts must be symmetric");
    }
}

}  // namespace

StateMatrix ComparisonDataset::states() const {
  StateMatrix out(samples.size(), d);
  for (std::size_t i = 0; i < samples.size(); ++i)
    std::copy(samples[i].s.begin(), samples[i].s.end(), out.row(i).begin());
  return out;
}

std::string_view to_string(GraphDesign design) {
  switch (design) {
    case GraphDesign::Complete: return "complete";
    case GraphDesign::Star: return "star";
    case GraphDesign::Path: return "path";
    case GraphDesign::Cycle: return "cycle";
  }
  return "unknown";
}

GraphDesign parse_graph_design(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "complete") return GraphDesign::Complete;
  if (lower == "star") return GraphDesign::Star;
  if (lower == "path") return GraphDesign::Path;
  if (lower == "cycle") return GraphDesign::Cycle;
  throw ConfigError("unknown graph design '" + std::string(name) + "'");
}

ComparisonDataset generate_dataset(const GroundTruthReward& gt, const ComparisonModel& model,
                                   std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("dataset size must be positive");
  model.validate();
  Rng rng(seed);
  ComparisonDataset ds;
  ds.d = gt.d;
  ds.action_count = gt.action_count;
  ds.seed = seed;
  ds.model_kind = model.kind;
  ds.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ComparisonSample sample;
    sample.s.resize(gt.d);
    for (double& v : sample.s) v = uniform01(rng);
    sample.a1 = 1;
    sample.a0 = 0;
    double u = true_reward(gt, sample.s, 1) - true_reward(gt, sample.s, 0);
    sample.p_win = win_probability(model, u);
    sample.y = sample_outcome(model, u, rng);
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

ComparisonDataset generate_design_dataset(const RewardFunction& reward, std::size_t d,
                                          const ComparisonModel& model, const CountMatrix& counts,
                                          std::uint64_t seed) {
  check_counts_shape(counts);
  model.validate();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = i + 1; j < counts.size(); ++j)
      for (long k = 0; k < counts[i][j]; ++k) pairs.emplace_back(i, j);
  if (pairs.empty()) throw DomainError("design has no comparisons");

  Rng rng(seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  ComparisonDataset ds;
  ds.d = d;
  ds.action_count = counts.size();
  ds.seed = seed;
  ds.model_kind = model.kind;
  ds.samples.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    ComparisonSample sample;
    sample.s.resize(d);
    for (double& v : sample.s) v = uniform01(rng);
    bool flip = uniform01(rng) < 0.5;
    sample.a1 = flip ? j : i;
    sample.a0 = flip ? i : j;
    auto r = reward(sample.s);
    if (r.size() != counts.size()) throw DomainError("reward action count mismatch");
    double u = r[sample.a1] - r[sample.a0];
    sample.p_win = win_probability(model, u);
    sample.y = sample_outcome(model, u, rng);
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

ComparisonDataset corrupt_dataset(const ComparisonDataset& ds, double m, std::uint64_t seed) {
  if (!(m >= 0.0 && m <= 1.0)) throw DomainError("corruption level must lie in [0, 1]");
  if (ds.corruption_level != 0.0) throw StateError("dataset is already corrupted");
  ComparisonDataset out = ds;
  if (m == 0.0) return out;

  const std::size_t n = ds.size();
  // The small slack keeps decimal levels such as 0.3 * 10 from rounding down.
  const auto k = std::min(n, static_cast<std::size_t>(std::floor(m * static_cast<double>(n) + 1e-9)));
  Rng rng(seed);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), k, rng);
  for (std::size_t idx : chosen) {
    auto& sample = out.samples[idx];
    sample.p_win = 0.4 + 0.2 * uniform01(rng);
    sample.y = uniform01(rng) < sample.p_win ? 1 : -1;
  }
  out.corruption_level = m;
  return out;
}

std::vector<double> dataset_win_probabilities(const ComparisonDataset& ds) {
  std::vector<double> p;
  p.reserve(ds.size());
  for (const auto& sample : ds.samples) p.push_back(sample.p_win);
  return p;
}

std::vector<std::pair<std::size_t, std::size_t>> design_edges(GraphDesign design,
                                                              std::size_t m) {
  if (m < 2) throw DomainError("a comparison design needs at least two actions");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  switch (design) {
    case GraphDesign::Complete:
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) edges.emplace_back(i, j);
      break;
    case GraphDesign::Star:
      for (std::size_t j = 1; j < m; ++j) edges.emplace_back(0, j);
      break;
    case GraphDesign::Path:
      for (std::size_t i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
      break;
    case GraphDesign::Cycle:
      if (m < 3) throw DomainError("a cycle design needs at least three actions");
      for (std::size_t i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
      edges.emplace_back(0, m - 1);
      break;
  }
  return edges;
}

CountMatrix design_counts(GraphDesign design, std::size_t m, long n) {
  auto edges = design_edges(design, m);
  if (n < static_cast<long>(edges.size()))
    throw DomainError("fewer comparisons than edges in the design");
  const long per_edge = n / static_cast<long>(edges.size());
  long remainder = n % static_cast<long>(edges.size());
  CountMatrix counts(m, std::vector<long>(m, 0));
  for (auto [i, j] : edges) {
    long c = per_edge + (remainder > 0 ? 1 : 0);
    if (remainder > 0) --remainder;
    counts[i][j] = counts[j][i] = c;
  }
  return counts;
}

CountMatrix dataset_counts(const ComparisonDataset& ds) {
  CountMatrix counts(ds.action_count, std::vector<long>(ds.action_count, 0));
  for (const auto& sample : ds.samples) {
    if (sample.a1 == sample.a0 || sample.a1 >= ds.action_count || sample.a0 >= ds.action_count)
      throw DomainError("sample has an invalid action pair");
    ++counts[sample.a1][sample.a0];
    ++counts[sample.a0][sample.a1];
  }
  return counts;
}

void write_dataset_csv(const ComparisonDataset& ds, std::ostream& out) {
  for (std::size_t k = 0; k < ds.d; ++k) out << 's' << (k + 1) << ',';
  out << "a1,a0,y,p_win\n";
  for (const auto& sample : ds.samples) {
    for (double v : sample.s) out << format_g17(v) << ',';
    out << sample.a1 << ',' << sample.a0 << ',' << sample.y << ',' << format_g17(sample.p_win)
        << '\n';
  }
}

void write_dataset_csv(const ComparisonDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset_csv(ds, out);
}

ComparisonDataset read_dataset_csv(std::istream& in, ModelKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("dataset CSV is empty");
  auto header = split_csv_line(line);
  if (header.size() < 4 || header[header.size() - 4] != "a1" || header.back() != "p_win")
    throw DomainError("dataset CSV header must end with a1,a0,y,p_win");
  ComparisonDataset ds;
  ds.d = header.size() - 4;
  ds.model_kind = kind;
  std::size_t max_action = 1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DomainError("dataset CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields");
    ComparisonSample sample;
    sample.s.resize(ds.d);
    for (std::size_t k = 0; k < ds.d; ++k) sample.s[k] = std::stod(fields[k]);
    sample.a1 = std::stoul(fields[ds.d]);
    sample.a0 = std::stoul(fields[ds.d + 1]);
    sample.y = std::stoi(fields[ds.d + 2]);
    sample.p_win = std::stod(fields[ds.d + 3]);
    const std::string where = "dataset CSV line " + std::to_string(line_no);
    if (sample.a1 == sample.a0) throw DomainError(where + ": a1 equals a0");
    if (!ComparisonModel::make(kind).admits(sample.y))
      throw DomainError(where + ": outcome " + std::to_string(sample.y) + " not admitted by model");
    if (!(sample.p_win > 0.0 && sample.p_win < 1.0))
      throw DomainError(where + ": p_win outside (0, 1)");
    max_action = std::max({max_action, sample.a1, sample.a0});
    ds.samples.push_back(std::move(sample));
  }
  ds.action_count = max_action + 1;
  return ds;
}

ComparisonDataset read_dataset_csv(const std::filesystem::path& path, ModelKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset_csv(in, kind);
}

std::vector<HistogramBin> probability_histogram(const std::vector<double>& values,
                                                std::size_t bins) {
  if (bins < 2) throw DomainError("histogram needs at least two bins");
  std::vector<HistogramBin> hist(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    hist[b].left = static_cast<double>(b) / static_cast<double>(bins);
    hist[b].right = static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("probability outside [0, 1]");
    auto b = std::min(bins - 1, static_cast<std::size_t>(v * static_cast<double>(bins)));
    ++hist[b].count;
  }
  return hist;
}

}  // namespace deeprm
