// Copyright 2026 The Amortex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "amortex/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "amortex/attribution.h"
#include "amortex/error.h"
#include "amortex/parallel.h"
#include "amortex/random.h"

namespace amortex {
namespace {

constexpr double kGridTolerance = 1e-9;

void CheckGrid(const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("empty sparsity grid");
  for (size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) {
      throw InvalidArgument("sparsity grid values must lie in [0, 1]");
    }
    if (k > 0 && grid[k] <= grid[k - 1]) {
      throw InvalidArgument("sparsity grid must be strictly ascending");
    }
  }
}

NodeSet TopNodes(const Explanation& e, int64_t count) {
  std::vector<NodeId> ids;
  ids.reserve(count);
  for (int64_t k = 0; k < count; ++k) ids.push_back(e.sources[k].node);
  return NodeSet::FromUnsorted(std::move(ids));
}

void Summarize(FidelityReport& report) {
  const size_t points = report.grid.size();
  const double n = static_cast<double>(report.fid_plus.size());
  report.n_targets = static_cast<int64_t>(report.fid_plus.size());
  auto moments = [&](const std::vector<std::vector<double>>& values,
                     std::vector<double>& mean, std::vector<double>& sd) {
    mean.assign(points, 0.0);
    sd.assign(points, 0.0);
    if (values.empty()) return;
    for (size_t p = 0; p < points; ++p) {
      double sum = 0.0;
      for (const auto& row : values) sum += row[p];
      mean[p] = sum / n;
      double sq = 0.0;
      for (const auto& row : values) sq += (row[p] - mean[p]) * (row[p] - mean[p]);
      sd[p] = std::sqrt(sq / n);
    }
  };
  moments(report.fid_plus, report.fid_plus_mean, report.fid_plus_std);
  moments(report.fid_minus, report.fid_minus_mean, report.fid_minus_std);
}

size_t GridIndex(const std::vector<double>& grid, double value) {
  for (size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(grid[k] - value) <= kGridTolerance) return k;
  }
  throw InvalidArgument("sparsity " + std::to_string(value) + " is not on the grid");
}

}  // namespace

double Sparsity(int64_t neighborhood_size, int64_t selected) {
  if (neighborhood_size < 1) throw InvalidArgument("neighbourhood size must be >= 1");
  if (selected < 0 || selected > neighborhood_size) {
    throw InvalidArgument("selected count must lie in [0, neighbourhood size]");
  }
  return 1.0 - static_cast<double>(selected) / static_cast<double>(neighborhood_size);
}

int64_t ImportantCount(int64_t m, double sparsity) {
  const double raw = (1.0 - sparsity) * static_cast<double>(m);
  // Snap values within floating noise of an integer before rounding.
  const double snapped = std::abs(raw - std::round(raw)) < 1e-9 ? std::round(raw) : raw;
  return std::clamp<int64_t>(std::llround(snapped), 0, m);
}

std::vector<double> DefaultSparsityGrid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
  return grid;
}

FidelityReport EvaluateFidelity(const GcnModel& target_model, const Graph& g,
                                int max_hop,
                                const std::vector<Explanation>& explanations,
                                const std::vector<double>& grid,
                                const std::string& method, int workers) {
  CheckGrid(grid);
  FidelityReport report;
  report.method = method;
  report.grid = grid;
  report.fid_plus.assign(explanations.size(), std::vector<double>(grid.size()));
  report.fid_minus.assign(explanations.size(), std::vector<double>(grid.size()));
  for (const Explanation& e : explanations) report.targets.push_back(e.target);
  ParallelFor(explanations.size(), workers, [&](size_t t) {
    const Explanation& e = explanations[t];
    if (!g.IsValid(static_cast<NodeId>(e.target))) {
      throw InvalidArgument("explanation for invalid node " + std::to_string(e.target));
    }
    const NodeOracle oracle(target_model, g, static_cast<NodeId>(e.target), max_hop);
    const NodeSet sources = oracle.sources();
    std::vector<NodeId> ranked;
    for (const ScoredNode& s : e.sources) ranked.push_back(s.node);
    if (NodeSet::FromUnsorted(ranked) != sources || ranked.size() != sources.size()) {
      throw InvalidArgument("explanation of node " + std::to_string(e.target) +
                            " does not rank exactly its neighbourhood");
    }
    const int64_t m = static_cast<int64_t>(sources.size());
    for (size_t p = 0; p < grid.size(); ++p) {
      const int64_t keep = ImportantCount(m, grid[p]);
      const NodeSet top = TopNodes(e, keep);
      report.fid_plus[t][p] = keep == 0 ? 0.0 : FidelityPlus(oracle, top);
      report.fid_minus[t][p] = keep == m ? 0.0 : FidelityMinus(oracle, top);
    }
  });
  Summarize(report);
  return report;
}

FidelityReport EvaluateGraphFidelity(const GcnModel& target_model,
                                     const std::vector<Graph>& graphs,
                                     const std::vector<Explanation>& explanations,
                                     const std::vector<double>& grid,
                                     const std::string& method, int workers) {
  CheckGrid(grid);
  FidelityReport report;
  report.method = method;
  report.grid = grid;
  report.fid_plus.assign(explanations.size(), std::vector<double>(grid.size()));
  report.fid_minus.assign(explanations.size(), std::vector<double>(grid.size()));
  for (const Explanation& e : explanations) report.targets.push_back(e.target);
  ParallelFor(explanations.size(), workers, [&](size_t t) {
    const Explanation& e = explanations[t];
    if (e.target < 0 || e.target >= static_cast<int64_t>(graphs.size())) {
      throw InvalidArgument("explanation for missing graph " + std::to_string(e.target));
    }
    const Graph& g = graphs[e.target];
    const GraphOracle oracle(target_model, g);
    std::vector<NodeId> ranked;
    for (const ScoredNode& s : e.sources) ranked.push_back(s.node);
    if (NodeSet::FromUnsorted(ranked) != oracle.nodes() ||
        ranked.size() != oracle.nodes().size()) {
      throw InvalidArgument("explanation of graph " + std::to_string(e.target) +
                            " does not rank exactly its nodes");
    }
    const int64_t m = g.num_nodes();
    for (size_t p = 0; p < grid.size(); ++p) {
      const int64_t keep = ImportantCount(m, grid[p]);
      const NodeSet top = TopNodes(e, keep);
      report.fid_plus[t][p] =
          keep == 0 ? 0.0 : oracle.full_value() - oracle.Evaluate(oracle.nodes().Difference(top));
      report.fid_minus[t][p] =
          keep == m ? 0.0 : oracle.full_value() - oracle.Evaluate(top);
    }
  });
  Summarize(report);
  return report;
}

FidelityReport AverageReports(const std::vector<FidelityReport>& reports,
                              const std::string& method) {
  if (reports.empty()) throw InvalidArgument("no reports to average");
  FidelityReport out;
  out.method = method;
  out.grid = reports.front().grid;
  out.targets = reports.front().targets;
  out.fid_plus = reports.front().fid_plus;
  out.fid_minus = reports.front().fid_minus;
  for (auto* table : {&out.fid_plus, &out.fid_minus}) {
    for (auto& row : *table) std::fill(row.begin(), row.end(), 0.0);
  }
  for (const FidelityReport& r : reports) {
    if (r.grid != out.grid || r.targets != out.targets) {
      throw InvalidArgument("reports differ in grid or targets");
    }
    for (size_t t = 0; t < out.fid_plus.size(); ++t) {
      for (size_t p = 0; p < out.grid.size(); ++p) {
        out.fid_plus[t][p] += r.fid_plus[t][p] / reports.size();
        out.fid_minus[t][p] += r.fid_minus[t][p] / reports.size();
      }
    }
  }
  Summarize(out);
  return out;
}

std::pair<double, double> MeanFidelity(const FidelityReport& report, double lo,
                                       double hi, double step) {
  if (step <= 0.0 || hi < lo) throw InvalidArgument("invalid averaging range");
  double plus = 0.0;
  double minus = 0.0;
  int count = 0;
  for (int k = 0;; ++k) {
    const double s = lo + k * step;
    if (s > hi + kGridTolerance) break;
    const size_t idx = GridIndex(report.grid, s);
    plus += report.fid_plus_mean[idx];
    minus += report.fid_minus_mean[idx];
    ++count;
  }
  return {plus / count, minus / count};
}

std::pair<double, double> FidelityAt(const FidelityReport& report, double sparsity) {
  const size_t idx = GridIndex(report.grid, sparsity);
  return {report.fid_plus_mean[idx], report.fid_minus_mean[idx]};
}

std::vector<Explanation> RandomExplanations(const Graph& g, const NodeSet& targets,
                                            int max_hop, uint64_t seed) {
  std::vector<Explanation> out;
  for (NodeId i : targets) {
    std::vector<NodeId> ids = KhopNeighbors(g, i, max_hop).Without(i).ids();
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    rng.Shuffle(ids);
    Explanation e;
    e.target = i;
    for (size_t k = 0; k < ids.size(); ++k) {
      e.sources.push_back({ids[k], static_cast<double>(ids.size() - k)});
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Explanation> RandomGraphExplanations(const std::vector<Graph>& graphs,
                                                 const NodeSet& indices,
                                                 uint64_t seed) {
  std::vector<Explanation> out;
  for (NodeId idx : indices) {
    std::vector<NodeId> ids = NodeSet::Range(graphs.at(idx).num_nodes()).ids();
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(idx)));
    rng.Shuffle(ids);
    Explanation e;
    e.target = idx;
    for (size_t k = 0; k < ids.size(); ++k) {
      e.sources.push_back({ids[k], static_cast<double>(ids.size() - k)});
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Explanation> MaskExplanations(const Graph& g, const NodeSet& targets,
                                          int max_hop, const std::vector<int>& mask) {
  if (static_cast<NodeId>(mask.size()) != g.num_nodes()) {
    throw InvalidArgument("mask length does not match the graph");
  }
  std::vector<Explanation> out;
  for (NodeId i : targets) {
    Explanation e;
    e.target = i;
    for (NodeId j : KhopNeighbors(g, i, max_hop)) {
      if (j != i) e.sources.push_back({j, mask[j] ? 1.0 : 0.0});
    }
    SortSources(e.sources);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Explanation> ExactExplanations(const GcnModel& target_model,
                                           const Graph& g, const NodeSet& targets,
                                           int max_hop, int workers) {
  std::vector<Explanation> out(targets.size());
  ParallelFor(targets.size(), workers, [&](size_t t) {
    const NodeOracle oracle(target_model, g, targets[t], max_hop);
    const std::vector<double> phi = ExactAttributionAll(oracle);
    const NodeSet sources = oracle.sources();
    Explanation& e = out[t];
    e.target = targets[t];
    for (size_t k = 0; k < sources.size(); ++k) e.sources.push_back({sources[k], phi[k]});
    SortSources(e.sources);
  });
  return out;
}

double RocAuc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("scores and labels differ in length");
  }
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (size_t start = 0; start < n;) {
    size_t stop = start + 1;
    while (stop < n && scores[order[stop]] == scores[order[start]]) ++stop;
    // Ranks start..stop-1 (1-based start+1..stop) share their average.
    const double average = 0.5 * static_cast<double>(start + 1 + stop);
    for (size_t k = start; k < stop; ++k) rank[order[k]] = average;
    start = stop;
  }
  double positive_rank_sum = 0.0;
  int64_t positives = 0;
  for (size_t k = 0; k < n; ++k) {
    if (labels[k]) {
      positive_rank_sum += rank[k];
      ++positives;
    }
  }
  const int64_t negatives = static_cast<int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) {
    throw InvalidArgument("AUC is undefined when all labels are equal");
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

double AucNodes(const std::vector<Explanation>& explanations,
                const std::vector<int>& mask) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const Explanation& e : explanations) {
    for (const ScoredNode& s : e.sources) {
      if (s.node < 0 || s.node >= static_cast<NodeId>(mask.size())) {
        throw InvalidArgument("explained node outside the mask");
      }
      scores.push_back(s.score);
      labels.push_back(mask[s.node] ? 1 : 0);
    }
  }
  return RocAuc(scores, labels);
}

double AucGraphs(const std::vector<Explanation>& explanations,
                 const std::vector<std::vector<int>>& masks) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const Explanation& e : explanations) {
    if (e.target < 0 || e.target >= static_cast<int64_t>(masks.size())) {
      throw InvalidArgument("no mask for graph " + std::to_string(e.target));
    }
    const std::vector<int>& mask = masks[e.target];
    for (const ScoredNode& s : e.sources) {
      if (s.node < 0 || s.node >= static_cast<NodeId>(mask.size())) {
        throw InvalidArgument("explained node outside the mask");
      }
      scores.push_back(s.score);
      labels.push_back(mask[s.node] ? 1 : 0);
    }
  }
  return RocAuc(scores, labels);
}

std::string HardwareNote() {
  std::ostringstream note;
  note << "hardware_threads=" << std::thread::hardware_concurrency();
#if defined(__VERSION__)
  note << "; compiler=" << __VERSION__;
#endif
  return note.str();
}

ThroughputReport BenchThroughput(const std::string& method,
                                 const std::function<void()>& explain_all,
                                 int64_t n_instances, int warmup, int repeats) {
  if (repeats < 3) throw InvalidArgument("throughput timing needs at least 3 repeats");
  if (n_instances < 1) throw InvalidArgument("no instances to time");
  for (int w = 0; w < warmup; ++w) explain_all();
  ThroughputReport report;
  report.method = method;
  report.n_instances = n_instances;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    explain_all();
    const auto stop = std::chrono::steady_clock::now();
    report.repeat_seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::vector<double> sorted = report.repeat_seconds;
  std::sort(sorted.begin(), sorted.end());
  const size_t mid = sorted.size() / 2;
  report.seconds = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  report.seconds = std::max(report.seconds, std::numeric_limits<double>::min());
  report.throughput = static_cast<double>(n_instances) / report.seconds;
  report.hardware = HardwareNote();
  return report;
}

std::optional<double> PearsonR(const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("correlation inputs differ in length");
  const size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t k = 0; k < n; ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationStudy RunCorrelationStudy(const GcnModel& target_model, const Graph& g,
                                     int max_hop, const std::string& method,
                                     int pairs, uint64_t seed) {
  if (method != "removal" && method != "mi") {
    throw InvalidArgument("correlation method must be removal or mi");
  }
  if (pairs < 1) throw InvalidArgument("pairs must be >= 1");
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.Degree(v) >= 2) candidates.push_back(v);
  }
  if (candidates.empty()) throw DataError("no node has two or more neighbours");
  Rng rng(DeriveSeed(seed, "correlation-pairs"));
  CorrelationStudy study;
  study.method = method;
  for (int p = 0; p < pairs; ++p) {
    const NodeId target = candidates[rng.UniformInt(candidates.size())];
    const NodeOracle oracle(target_model, g, target, max_hop);
    const NodeSet sources = oracle.sources();
    // Uniform over the non-empty subsets of the sources.
    std::vector<NodeId> chosen;
    for (NodeId j : sources) {
      if (rng.Coin()) chosen.push_back(j);
    }
    if (chosen.empty()) chosen.push_back(sources[rng.UniformInt(sources.size())]);
    const NodeSet subset = NodeSet::FromUnsorted(std::move(chosen));
    const double score =
        method == "removal" ? RemovalScore(oracle, subset) : MiValue(oracle, subset);
    study.points.emplace_back(score, FidelityPlus(oracle, subset));
  }
  std::vector<double> xs, ys;
  for (const auto& [x, y] : study.points) {
    xs.push_back(x);
    ys.push_back(y);
  }
  study.r = PearsonR(xs, ys);
  return study;
}

void WriteFidelityCsv(std::ostream& out, const std::vector<FidelityReport>& reports) {
  out << "method,sparsity,fid_plus_mean,fid_plus_std,fid_minus_mean,fid_minus_std,"
         "n_targets\n";
  out << std::setprecision(17);
  for (const FidelityReport& r : reports) {
    for (size_t p = 0; p < r.grid.size(); ++p) {
      out << r.method << ',' << r.grid[p] << ',' << r.fid_plus_mean[p] << ','
          << r.fid_plus_std[p] << ',' << r.fid_minus_mean[p] << ','
          << r.fid_minus_std[p] << ',' << r.n_targets << '\n';
    }
  }
}

std::string FidelityReportJson(const FidelityReport& report) {
  nlohmann::json j;
  j["method"] = report.method;
  j["grid"] = report.grid;
  j["fid_plus_mean"] = report.fid_plus_mean;
  j["fid_plus_std"] = report.fid_plus_std;
  j["fid_minus_mean"] = report.fid_minus_mean;
  j["fid_minus_std"] = report.fid_minus_std;
  j["n_targets"] = report.n_targets;
  j["targets"] = report.targets;
  j["fid_plus"] = report.fid_plus;
  j["fid_minus"] = report.fid_minus;
  return j.dump(2);
}

void WriteCorrelationCsv(std::ostream& out, const CorrelationStudy& study) {
  out << "method,score,fid_plus\n" << std::setprecision(17);
  for (const auto& [x, y] : study.points) {
    out << study.method << ',' << x << ',' << y << '\n';
  }
}

}  // namespace amortex
