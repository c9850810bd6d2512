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

// Evaluation harness: fidelity over a sparsity grid, ROC-AUC against motif
// masks, throughput timing, and attribution-versus-fidelity correlation.
//
// At sparsity p over m rankable nodes (the target itself is never ranked),
// the explanation keeps its top round((1 - p) m) nodes. Fidelity+ removes
// them; Fidelity- keeps only them (plus the target). Removing nothing yields
// exactly 0 without evaluating the model.

#ifndef AMORTEX_EVAL_H_
#define AMORTEX_EVAL_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "amortex/explainer.h"
#include "amortex/gcn.h"
#include "amortex/graph.h"

namespace amortex {

// 1 - selected / neighborhood_size.
double Sparsity(int64_t neighborhood_size, int64_t selected);

// Number of nodes kept as important at sparsity p among m candidates.
int64_t ImportantCount(int64_t m, double sparsity);

// 0.0, 0.1, ..., 1.0.
std::vector<double> DefaultSparsityGrid();

struct FidelityReport {
  std::string method;
  std::vector<double> grid;
  std::vector<double> fid_plus_mean;
  std::vector<double> fid_plus_std;
  std::vector<double> fid_minus_mean;
  std::vector<double> fid_minus_std;
  int64_t n_targets = 0;
  std::vector<int64_t> targets;
  // [target][grid point]
  std::vector<std::vector<double>> fid_plus;
  std::vector<std::vector<double>> fid_minus;
};

// Node task. Every explanation must rank exactly the K-hop neighbours of its
// target (target excluded).
FidelityReport EvaluateFidelity(const GcnModel& target_model, const Graph& g,
                                int max_hop,
                                const std::vector<Explanation>& explanations,
                                const std::vector<double>& grid,
                                const std::string& method, int workers = 1);

// Graph task. Explanation targets index into `graphs` and rank every node.
FidelityReport EvaluateGraphFidelity(const GcnModel& target_model,
                                     const std::vector<Graph>& graphs,
                                     const std::vector<Explanation>& explanations,
                                     const std::vector<double>& grid,
                                     const std::string& method, int workers = 1);

// Grid-point-wise mean of several reports on the same grid and targets.
FidelityReport AverageReports(const std::vector<FidelityReport>& reports,
                              const std::string& method);

// Mean of the per-sparsity means over lo, lo + step, ..., hi. Each point must
// be on the grid (within 1e-9).
std::pair<double, double> MeanFidelity(const FidelityReport& report,
                                       double lo = 0.3, double hi = 0.7,
                                       double step = 0.1);

// Value at one grid point.
std::pair<double, double> FidelityAt(const FidelityReport& report, double sparsity);

// --- Baseline rankings ------------------------------------------------------

// Uniformly random order of the K-hop neighbours.
std::vector<Explanation> RandomExplanations(const Graph& g, const NodeSet& targets,
                                            int max_hop, uint64_t seed);
std::vector<Explanation> RandomGraphExplanations(const std::vector<Graph>& graphs,
                                                 const NodeSet& indices,
                                                 uint64_t seed);
// Scores 1 for motif nodes, 0 otherwise.
std::vector<Explanation> MaskExplanations(const Graph& g, const NodeSet& targets,
                                          int max_hop, const std::vector<int>& mask);
// Exact removal attribution; neighbourhoods must be within the cap.
std::vector<Explanation> ExactExplanations(const GcnModel& target_model,
                                           const Graph& g, const NodeSet& targets,
                                           int max_hop, int workers = 1);

// --- Ground-truth agreement -------------------------------------------------

// ROC-AUC by the rank statistic with average ranks for ties. Throws when the
// labels are all 0 or all 1.
double RocAuc(const std::vector<double>& scores, const std::vector<int>& labels);

// Pools (score, mask[node]) over every ranked node of every node explanation.
double AucNodes(const std::vector<Explanation>& explanations,
                const std::vector<int>& mask);
// Pools over graphs; masks[graph index][node].
double AucGraphs(const std::vector<Explanation>& explanations,
                 const std::vector<std::vector<int>>& masks);

// --- Throughput -------------------------------------------------------------

struct ThroughputReport {
  std::string method;
  int64_t n_instances = 0;
  double seconds = 0.0;  // median over repeats
  double throughput = 0.0;  // n_instances / seconds
  std::vector<double> repeat_seconds;
  int workers = 1;
  std::string hardware;
};

// Runs `explain_all` `warmup` times untimed, then `repeats` (>= 3) timed.
ThroughputReport BenchThroughput(const std::string& method,
                                 const std::function<void()>& explain_all,
                                 int64_t n_instances, int warmup, int repeats);

std::string HardwareNote();

// --- Correlation ------------------------------------------------------------

struct CorrelationStudy {
  std::string method;  // removal | mi
  std::vector<std::pair<double, double>> points;  // (score, Fidelity+)
  std::optional<double> r;  // empty when either variance is zero
};

// Pearson correlation; empty for fewer than two points or zero variance.
std::optional<double> PearsonR(const std::vector<double>& x,
                               const std::vector<double>& y);

// Draws `pairs` (target, J) pairs: a uniform target with at least two
// neighbours, then J keeping each neighbour with a per-pair uniform rate
// (never empty). The score is RemovalScore or MiValue of J; the response is
// Fidelity+ of removing J.
CorrelationStudy RunCorrelationStudy(const GcnModel& target_model, const Graph& g,
                                     int max_hop, const std::string& method,
                                     int pairs, uint64_t seed);

// --- Writers ----------------------------------------------------------------

// method,sparsity,fid_plus_mean,fid_plus_std,fid_minus_mean,fid_minus_std,n_targets
void WriteFidelityCsv(std::ostream& out, const std::vector<FidelityReport>& reports);
std::string FidelityReportJson(const FidelityReport& report);
void WriteCorrelationCsv(std::ostream& out, const CorrelationStudy& study);

}  // namespace amortex

#endif  // AMORTEX_EVAL_H_
