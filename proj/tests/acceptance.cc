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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "amortex/attribution.h"
#include "amortex/datasets.h"
#include "amortex/eval.h"
#include "amortex/explainer.h"
#include "amortex/gcn.h"
#include "test_util.h"

namespace amortex {
namespace {

using testing::RandomGraph;
using testing::RandomNodeModel;

// Pinned tolerances.
constexpr double kIdentityTol = 1e-12;
constexpr int kMcSamples = 2000;
constexpr double kMcTol = 0.05;
constexpr double kRecursionTol = 1e-12;
constexpr double kGradTol = 1e-4;
constexpr double kBaShapesAccuracy = 0.95;
constexpr double kTreeCyclesAccuracy = 0.90;
constexpr double kMseRatio = 0.5;
constexpr int kHeldOutPairs = 50;
constexpr double kSparsity = 0.5;
constexpr double kMinAuc = 0.80;
constexpr int kCorrelationPairs = 100;
constexpr double kMinSpeedup = 10.0;
constexpr double kMaxLatencyGrowth = 2.0;
constexpr double kMinExactSlope = 1.0;
constexpr int kMaxHop = 3;
const std::vector<uint64_t> kSeeds = {0, 1, 2};
constexpr Aggregation kAggregations[] = {Aggregation::kSqrtDegree, Aggregation::kMean,
                                         Aggregation::kSymmetric};

double Now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// Trained artefacts shared between criteria.
struct NodeBench {
  GeneratedDataset data;
  TrainResult target;
};

NodeBench& Bench(const std::string& name, uint64_t seed) {
  static std::map<std::pair<std::string, uint64_t>, NodeBench> cache;
  auto it = cache.find({name, seed});
  if (it == cache.end()) {
    GeneratedDataset d = Generate(name, seed);
    const Graph& g = d.graphs[0];
    TrainConfig cfg = TargetTrainDefaults(Head::kNode);
    cfg.seed = seed;
    TrainResult r = TrainNodeClassifier(
        g, TargetSpec(g.feature_dim(), d.num_classes, Head::kNode), cfg);
    it = cache.emplace(std::make_pair(name, seed), NodeBench{std::move(d), std::move(r)}).first;
  }
  return it->second;
}

ExplainerTrainResult& TrainedExplainer(const std::string& name, uint64_t seed,
                                       EmbeddingMode mode) {
  static std::map<std::tuple<std::string, uint64_t, EmbeddingMode>, ExplainerTrainResult> cache;
  const auto key = std::make_tuple(name, seed, mode);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const NodeBench& b = Bench(name, seed);
    const Graph& g = b.data.graphs[0];
    ExplainerConfig cfg;
    cfg.seed = seed;
    cfg.mode = mode;
    cfg.max_hop = kMaxHop;
    it = cache.emplace(key, TrainExplainer(b.target.model, g, g.masks()->train,
                                           g.masks()->valid, cfg))
             .first;
  }
  return it->second;
}

// 1. Delta-fidelity identity and ranking agreement.
Outcome Criterion1() {
  Outcome out;
  Rng rng(101);
  double worst = 0.0;
  int pairs = 0, ranked = 0, mismatched = 0;
  for (uint64_t s = 0; s < 10; ++s) {
    const Graph g = RandomGraph(12, 0.22, 3, 200 + s);
    const GcnModel model = RandomNodeModel(3, {6, 4}, 300 + s);
    for (int p = 0; p < 100; ++p, ++pairs) {
      const NodeId v = static_cast<NodeId>(rng.UniformInt(g.num_nodes()));
      const NodeOracle oracle(model, g, v, 2);
      const NodeSet subset = SampleSubsetWithAnchor(rng, oracle.neighborhood(), v);
      const double delta_fid = FidelityPlus(oracle, subset) - FidelityMinus(oracle, subset);
      worst = std::max(worst, std::abs(delta_fid - SubsetDelta(oracle, subset)));
    }
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      const NodeOracle oracle(model, g, v, 2);
      const NodeSet sources = oracle.sources();
      if (sources.size() < 2 || sources.size() > 8) continue;
      ++ranked;
      const std::vector<double> phi = ExactAttributionAll(oracle);
      // Mean delta-fidelity over every subset containing each source,
      // enumerated by bitmask over the sources.
      std::vector<double> mean_fid(sources.size(), 0.0);
      std::vector<int> count(sources.size(), 0);
      for (uint32_t mask = 0; mask < (1u << sources.size()); ++mask) {
        std::vector<NodeId> kept = {v};
        for (size_t k = 0; k < sources.size(); ++k) {
          if (mask >> k & 1u) kept.push_back(sources[k]);
        }
        const NodeSet subset = NodeSet::FromUnsorted(kept);
        const double d = FidelityPlus(oracle, subset) - FidelityMinus(oracle, subset);
        for (size_t k = 0; k < sources.size(); ++k) {
          if (mask >> k & 1u) {
            mean_fid[k] += d;
            ++count[k];
          }
        }
      }
      for (size_t k = 0; k < sources.size(); ++k) mean_fid[k] /= count[k];
      for (size_t a = 0; a < sources.size(); ++a) {
        for (size_t b = 0; b < sources.size(); ++b) {
          // Orderings must agree on every pair that is not a numerical tie.
          if (std::abs(phi[a] - phi[b]) < 1e-12 && std::abs(mean_fid[a] - mean_fid[b]) < 1e-12) {
            continue;
          }
          if ((phi[a] < phi[b]) != (mean_fid[a] < mean_fid[b])) ++mismatched;
        }
      }
    }
  }
  out.Check(pairs == 1000 && worst < kIdentityTol,
            Fmt("max |dFid - delta| = %.2e over %d pairs", worst, pairs));
  out.Check(ranked > 0 && mismatched == 0,
            Fmt("%d neighbourhoods ranked, %d order mismatches", ranked, mismatched));
  return out;
}

// 2. Monte-Carlo estimate against exhaustive enumeration.
Outcome Criterion2() {
  Outcome out;
  Rng rng(102);
  int hoods = 0;
  double worst = 0.0, worst_recursion = 0.0;
  for (uint64_t s = 0; hoods < 20 && s < 100; ++s) {
    const Graph g = RandomGraph(10, 0.25, 3, 400 + s);
    const GcnModel model = RandomNodeModel(3, {6, 4}, 500 + s);
    const NodeId v = static_cast<NodeId>(s % g.num_nodes());
    const NodeOracle oracle(model, g, v, 2);
    const NodeSet sources = oracle.sources();
    if (sources.empty() || oracle.neighborhood().size() > 10) continue;
    ++hoods;
    const NodeId j = sources[rng.UniformInt(sources.size())];
    const double exact = ExactAttribution(oracle, j);
    AttributionEstimate e;
    double sum = 0.0;
    for (int t = 1; t <= kMcSamples; ++t) {
      const DeltaSample sample = SampleDelta(oracle, j, rng);
      e = McUpdate(e, sample);
      sum += sample.delta;
      worst_recursion = std::max(worst_recursion, std::abs(e.value - sum / t));
    }
    worst = std::max(worst, std::abs(e.value - exact));
  }
  out.Check(hoods == 20 && worst <= kMcTol,
            Fmt("max |MC - exact| = %.4f over %d neighbourhoods", worst, hoods));
  out.Check(worst_recursion <= kRecursionTol,
            Fmt("max |recursion - running mean| = %.2e", worst_recursion));
  return out;
}

// 3. Analytic gradients against finite differences.
Outcome Criterion3() {
  Outcome out;
  double worst_target = 0.0, worst_explainer = 0.0;
  for (uint64_t s = 0; s < 10; ++s) {
    const Graph g = RandomGraph(7, 0.4, 3, 600 + s);
    const InducedSubgraph sg(g, NodeSet::Range(7));
    const GcnModel model = RandomNodeModel(3, {5, 4, 3}, 700 + s, kAggregations[s % 3]);
    const LossFn ce = CrossEntropyLoss({0, 2, 4, 6}, {1, 0, 2, 1});
    worst_target = std::max(worst_target, GradCheck(model, sg, ce));
  }
  for (uint64_t s = 0; s < 5; ++s) {
    const Graph g = RandomGraph(8, 0.35, 3, 800 + s);
    const InducedSubgraph sg(g, NodeSet::Range(8));
    const auto mode = s % 2 == 0 ? EmbeddingMode::kBidirectional : EmbeddingMode::kSingle;
    const auto em = ExplainerModel::Initialize(3, 4, 2, 5, mode, 2, TaskKind::kNode, 900 + s);
    const LossFn loss = PairRegressionLoss(
        {{0, 1, 0.3, 1.0}, {2, 5, -0.2, 0.5}, {7, 3, 0.1, 2.0}, {4, 4, 0.0, 1.0}}, 4, mode);
    worst_explainer = std::max(worst_explainer, GradCheck(em.backbone(), sg, loss));
  }
  out.Check(worst_target < kGradTol, Fmt("target models max error %.2e", worst_target));
  out.Check(worst_explainer < kGradTol, Fmt("explainer losses max error %.2e", worst_explainer));
  return out;
}

// 4. Target accuracy.
Outcome Criterion4() {
  Outcome out;
  const double ba = Bench("ba-shapes", 0).target.accuracy.test;
  const double tc = Bench("tree-cycles", 0).target.accuracy.test;
  out.Check(ba >= kBaShapesAccuracy, Fmt("BA-Shapes test accuracy %.3f", ba));
  out.Check(tc >= kTreeCyclesAccuracy, Fmt("Tree-Cycles test accuracy %.3f", tc));
  return out;
}

double ScoreOf(const ExplainerModel& em, const Graph& g, NodeId target, NodeId source) {
  const auto explanations = Explain(em, g, NodeSet{target});
  for (const ScoredNode& s : explanations[0].sources) {
    if (s.node == source) return s.score;
  }
  std::fprintf(stderr, "source %d missing from the explanation of %d\n", source, target);
  std::abort();
}

// 5. Trained explainer approximates the exact attribution.
Outcome Criterion5() {
  Outcome out;
  for (uint64_t seed : kSeeds) {
    const NodeBench& b = Bench("ba-shapes", seed);
    const Graph& g = b.data.graphs[0];
    const auto& trained = TrainedExplainer("ba-shapes", seed, EmbeddingMode::kBidirectional);
    ExplainerConfig cfg;
    const ExplainerModel untrained = ExplainerModel::Initialize(
        g.feature_dim(), cfg.embedding_dim, kMaxHop, cfg.hidden_dim,
        EmbeddingMode::kBidirectional, kMaxHop, TaskKind::kNode,
        DeriveSeed(seed, "explainer-init"));
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (g.masks()->train.Contains(v)) continue;
      const NodeSet hood = KhopNeighbors(g, v, kMaxHop);
      if (hood.size() > static_cast<size_t>(kDefaultEnumerationCap)) continue;
      for (NodeId u : hood) {
        if (u != v) pairs.emplace_back(v, u);
      }
    }
    Rng rng(DeriveSeed(seed, "pairs"));
    rng.Shuffle(pairs);
    pairs.resize(std::min<size_t>(kHeldOutPairs, pairs.size()));
    double after = 0.0, before = 0.0;
    for (const auto& [v, u] : pairs) {
      const double phi = ExactAttribution(NodeOracle(b.target.model, g, v, kMaxHop), u);
      after += std::pow(ScoreOf(trained.model, g, v, u) - phi, 2);
      before += std::pow(ScoreOf(untrained, g, v, u) - phi, 2);
    }
    const double ratio = after / before;
    out.Check(pairs.size() == static_cast<size_t>(kHeldOutPairs) && ratio <= kMseRatio,
              Fmt("seed %lu MSE ratio %.3f", static_cast<unsigned long>(seed), ratio));
  }
  return out;
}

// 6. Fidelity ordering against the random ranking.
Outcome Criterion6() {
  Outcome out;
  const auto grid = DefaultSparsityGrid();
  for (const std::string name : {"ba-shapes", "tree-cycles"}) {
    double bi_mean = 0.0, single_mean = 0.0;
    for (uint64_t seed : kSeeds) {
      const NodeBench& b = Bench(name, seed);
      const Graph& g = b.data.graphs[0];
      const NodeSet& test = g.masks()->test;
      const auto random = EvaluateFidelity(b.target.model, g, kMaxHop,
                                           RandomExplanations(g, test, kMaxHop, seed), grid,
                                           "random");
      const auto [rp, rm] = FidelityAt(random, kSparsity);
      for (auto mode : {EmbeddingMode::kBidirectional, EmbeddingMode::kSingle}) {
        const auto& ex = TrainedExplainer(name, seed, mode);
        const auto report = EvaluateFidelity(b.target.model, g, kMaxHop,
                                             Explain(ex.model, g, test), grid, ToString(mode));
        (mode == EmbeddingMode::kBidirectional ? bi_mean : single_mean) +=
            MeanFidelity(report).first / kSeeds.size();
        if (mode != EmbeddingMode::kBidirectional) continue;
        const auto [p, m] = FidelityAt(report, kSparsity);
        out.Check(p > rp && m <= rm,
                  Fmt("%s seed %lu Fid+ %.3f vs %.3f, Fid- %.3f vs %.3f", name.c_str(),
                      static_cast<unsigned long>(seed), p, rp, m, rm));
      }
    }
    out.Check(bi_mean >= single_mean, Fmt("%s mean Fid+ bidirectional %.3f vs single %.3f",
                                          name.c_str(), bi_mean, single_mean));
  }
  return out;
}

// 7. Motif recovery on BA-2Motifs.
Outcome Criterion7() {
  Outcome out;
  for (uint64_t seed : kSeeds) {
    const GeneratedDataset d = GenBa2Motifs(seed);
    const SplitMasks& split = *d.graph_split;
    TrainConfig tc = TargetTrainDefaults(Head::kGraph);
    tc.seed = seed;
    const TrainResult target = TrainGraphClassifier(
        d.graphs, split, TargetSpec(d.graphs[0].feature_dim(), 2, Head::kGraph), tc);
    ExplainerConfig cfg;
    cfg.seed = seed;
    const auto ex = TrainGraphExplainer(target.model, d.graphs, split.train, split.valid, cfg);
    const double auc = AucGraphs(ExplainGraphs(ex.model, d.graphs, split.test), d.motif_masks);
    out.Check(auc >= kMinAuc, Fmt("seed %lu AUC %.3f (target accuracy %.3f)",
                                  static_cast<unsigned long>(seed), auc, target.accuracy.test));
  }
  return out;
}

// 8. Removal attribution tracks Fidelity+ better than the MI value.
Outcome Criterion8() {
  Outcome out;
  constexpr int kLayers = 2;
  const GeneratedDataset d = GenBigBa(500, 12, 0);
  const Graph& g = d.graphs[0];
  const double mean_degree = 2.0 * g.num_edges() / g.num_nodes();
  TrainConfig tc = TargetTrainDefaults(Head::kNode);
  tc.epochs = 300;
  const TrainResult target = TrainNodeClassifier(
      g, TargetSpec(g.feature_dim(), d.num_classes, Head::kNode, kLayers), tc);
  const auto removal = RunCorrelationStudy(target.model, g, kLayers, "removal",
                                           kCorrelationPairs, 0);
  const auto mi = RunCorrelationStudy(target.model, g, kLayers, "mi", kCorrelationPairs, 0);
  const double r_removal = removal.r ? std::abs(*removal.r) : 0.0;
  const double r_mi = mi.r ? std::abs(*mi.r) : 0.0;
  out.Check(mean_degree >= 20.0, Fmt("mean degree %.1f", mean_degree));
  out.Check(r_removal > r_mi, Fmt("|r| removal %.3f vs MI %.3f", r_removal, r_mi));
  return out;
}

// Least-squares slope of log(y) on log(x).
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]) / x.size();
    my += std::log(y[k]) / y.size();
  }
  double sxy = 0.0, sxx = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return sxy / sxx;
}

// 9. Efficiency.
Outcome Criterion9() {
  Outcome out;
  {
    const NodeBench& b = Bench("ba-shapes", 0);
    const Graph& g = b.data.graphs[0];
    const auto& ex = TrainedExplainer("ba-shapes", 0, EmbeddingMode::kBidirectional);
    std::vector<NodeId> small;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (KhopNeighbors(g, v, kMaxHop).size() <= static_cast<size_t>(kDefaultEnumerationCap)) {
        small.push_back(v);
      }
    }
    const NodeSet targets = NodeSet::FromUnsorted(small);
    const auto fast = BenchThroughput("explainer", [&] { Explain(ex.model, g, targets); },
                                      targets.size(), 1, 3);
    const auto slow = BenchThroughput(
        "exact", [&] { ExactExplanations(b.target.model, g, targets, kMaxHop); },
        targets.size(), 1, 3);
    const double speedup = fast.throughput / slow.throughput;
    out.Check(speedup >= kMinSpeedup,
              Fmt("BA-Shapes throughput %.0f vs %.1f per s (%.0fx, %zu targets)",
                  fast.throughput, slow.throughput, speedup, targets.size()));

    // Exact cost per node against neighbourhood size.
    std::map<size_t, std::vector<NodeId>> by_size;
    for (NodeId v : targets) {
      const size_t m = KhopNeighbors(g, v, kMaxHop).size();
      if (m >= 4 && by_size[m].size() < 5) by_size[m].push_back(v);
    }
    std::vector<double> sizes, seconds;
    for (const auto& [m, nodes] : by_size) {
      double best = 1e30;
      for (int rep = 0; rep < 3; ++rep) {
        const double t0 = Now();
        for (NodeId v : nodes) ExactAttributionAll(NodeOracle(b.target.model, g, v, kMaxHop));
        best = std::min(best, (Now() - t0) / nodes.size());
      }
      sizes.push_back(static_cast<double>(m));
      seconds.push_back(best);
    }
    const double slope = sizes.size() >= 3 ? LogLogSlope(sizes, seconds) : 0.0;
    out.Check(slope > kMinExactSlope,
              Fmt("exact cost log-log slope %.2f over |N| %.0f..%.0f", slope,
                  sizes.empty() ? 0.0 : sizes.front(), sizes.empty() ? 0.0 : sizes.back()));
  }
  std::vector<double> latency;
  for (NodeId n : {1000, 10000}) {
    const GeneratedDataset d = GenBigBa(n, 3, 0);
    const Graph& g = d.graphs[0];
    const auto em = ExplainerModel::Initialize(g.feature_dim(), 20, 2, 20,
                                               EmbeddingMode::kBidirectional, 2,
                                               TaskKind::kNode, 1);
    const NodeSet all = NodeSet::Range(n);
    Explain(em, g, all);
    double best = 1e30;
    for (int rep = 0; rep < 3; ++rep) {
      const double t0 = Now();
      Explain(em, g, all);
      best = std::min(best, Now() - t0);
    }
    latency.push_back(best / n);
  }
  const double growth = latency[1] / latency[0];
  out.Check(growth < kMaxLatencyGrowth,
            Fmt("per-node latency %.2fus at 1e3, %.2fus at 1e4 (x%.2f)", latency[0] * 1e6,
                latency[1] * 1e6, growth));
  return out;
}

bool BoundariesExact(const FidelityReport& r) {
  const size_t first = 0, last = r.grid.size() - 1;
  if (r.grid[first] != 0.0 || r.grid[last] != 1.0) return false;
  for (size_t t = 0; t < r.fid_plus.size(); ++t) {
    if (r.fid_minus[t][first] != 0.0 || r.fid_plus[t][last] != 0.0) return false;
  }
  return r.fid_minus_mean[first] == 0.0 && r.fid_plus_mean[last] == 0.0;
}

// 10. Boundary invariants for every method on every dataset.
Outcome Criterion10() {
  Outcome out;
  const auto grid = DefaultSparsityGrid();
  for (const std::string name : {"ba-shapes", "ba-community", "tree-cycles"}) {
    const GeneratedDataset d = Generate(name, 0);
    const Graph& g = d.graphs[0];
    TrainConfig tc = TargetTrainDefaults(Head::kNode);
    tc.epochs = 200;
    const GcnModel target =
        TrainNodeClassifier(g, TargetSpec(g.feature_dim(), d.num_classes, Head::kNode), tc)
            .model;
    const auto em = ExplainerModel::Initialize(g.feature_dim(), 20, kMaxHop, 20,
                                               EmbeddingMode::kBidirectional, kMaxHop,
                                               TaskKind::kNode, 0);
    const NodeSet& test = g.masks()->test;
    std::vector<NodeId> small;
    for (NodeId v : test) {
      if (KhopNeighbors(g, v, kMaxHop).size() <= 10) small.push_back(v);
    }
    const std::vector<std::pair<std::string, std::vector<Explanation>>> methods = {
        {"explainer", Explain(em, g, test)},
        {"random", RandomExplanations(g, test, kMaxHop, 0)},
        {"mask", MaskExplanations(g, test, kMaxHop, d.motif_masks[0])},
        {"exact", ExactExplanations(target, g, NodeSet::FromUnsorted(small), kMaxHop)},
    };
    bool ok = true;
    for (const auto& [method, explanations] : methods) {
      if (explanations.empty()) continue;
      ok = ok && BoundariesExact(EvaluateFidelity(target, g, kMaxHop, explanations, grid, method));
    }
    out.Check(ok, name);
  }
  {
    const GeneratedDataset d = GenBa2Motifs(0, 200);
    const SplitMasks& split = *d.graph_split;
    TrainConfig tc = TargetTrainDefaults(Head::kGraph);
    tc.epochs = 20;
    tc.restarts = 1;
    const GcnModel target = TrainGraphClassifier(
        d.graphs, split, TargetSpec(d.graphs[0].feature_dim(), 2, Head::kGraph), tc).model;
    const auto em = ExplainerModel::Initialize(d.graphs[0].feature_dim(), 20, 3, 20,
                                               EmbeddingMode::kBidirectional, 3,
                                               TaskKind::kGraph, 0);
    const bool ok =
        BoundariesExact(EvaluateGraphFidelity(target, d.graphs,
                                              ExplainGraphs(em, d.graphs, split.test), grid,
                                              "explainer")) &&
        BoundariesExact(EvaluateGraphFidelity(
            target, d.graphs, RandomGraphExplanations(d.graphs, split.test, 0), grid, "random"));
    out.Check(ok, "ba-2motifs");
  }
  return out;
}

}  // namespace
}  // namespace amortex

int main(int argc, char** argv) {
  using amortex::Outcome;
  const std::vector<std::function<Outcome()>> criteria = {
      amortex::Criterion1, amortex::Criterion2, amortex::Criterion3, amortex::Criterion4,
      amortex::Criterion5, amortex::Criterion6, amortex::Criterion7, amortex::Criterion8,
      amortex::Criterion9, amortex::Criterion10};
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));
  int failed = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const double t0 = amortex::Now();
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2d: %s  %s  (%.1fs)\n", id, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), amortex::Now() - t0);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
