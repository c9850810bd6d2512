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

// Amortised explainer: a GCN backbone that emits, for every node, a source
// embedding p and a target embedding t. The predicted attribution of source j
// to target node i is <p_j, t_i>; for a whole graph it is <p_j, t_G> with t_G
// the column-wise max over all target embeddings. The single-embedding
// variant emits one vector per node and scores <t_j, t_i>.
//
// Training regresses these scores onto per-pair running Monte-Carlo estimates
// of the removal attribution (or of the MI integrand for the baseline
// objective), one fresh sample per pair per epoch.

#ifndef AMORTEX_EXPLAINER_H_
#define AMORTEX_EXPLAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "amortex/gcn.h"
#include "amortex/graph.h"

namespace amortex {

enum class TaskKind { kNode, kGraph };
enum class EmbeddingMode { kBidirectional, kSingle };
enum class Objective { kRemoval, kMutualInformation };
// How the regression loss averages over (source, target) pairs: every pair
// alike, or every target alike with its sources sharing one unit of weight.
enum class PairWeighting { kPerPair, kPerTarget };

std::string ToString(TaskKind task);
std::string ToString(EmbeddingMode mode);
std::string ToString(Objective objective);
std::string ToString(PairWeighting weighting);
// Accept the strings produced by ToString; throw InvalidArgument otherwise.
TaskKind ParseTaskKind(const std::string& text);
EmbeddingMode ParseEmbeddingMode(const std::string& text);
Objective ParseObjective(const std::string& text);
PairWeighting ParsePairWeighting(const std::string& text);

class ExplainerModel {
 public:
  // The backbone's per-node output must be 2n wide (bidirectional) or n wide
  // (single).
  ExplainerModel(GcnModel backbone, int embedding_dim, EmbeddingMode mode,
                 int max_hop, TaskKind task);

  // `num_layers` aggregating GCN layers of width `hidden_dim` with ReLU, then
  // one per-node dense layer emitting the embeddings.
  static ExplainerModel Initialize(int input_dim, int embedding_dim,
                                   int num_layers, int hidden_dim,
                                   EmbeddingMode mode, int max_hop,
                                   TaskKind task, uint64_t seed);

  const GcnModel& backbone() const { return backbone_; }
  GcnModel& mutable_backbone() { return backbone_; }
  int embedding_dim() const { return embedding_dim_; }
  EmbeddingMode mode() const { return mode_; }
  int max_hop() const { return max_hop_; }
  TaskKind task() const { return task_; }

  // Raw backbone output, one row per node.
  Matrix Embed(const InducedSubgraph& sg) const;

 private:
  GcnModel backbone_;
  int embedding_dim_;
  EmbeddingMode mode_;
  int max_hop_;
  TaskKind task_;
};

// Views into an Embed() result. In single mode both return the same block.
Matrix SourceEmbeddings(const Matrix& embeddings, int embedding_dim,
                        EmbeddingMode mode);
Matrix TargetEmbeddings(const Matrix& embeddings, int embedding_dim,
                        EmbeddingMode mode);

double ScoreNode(const Vector& source, const Vector& target);
// Column-wise maximum of the rows. Throws on an empty matrix.
Vector MaxPool(const Matrix& rows);
// <source, MaxPool(targets)>.
double ScoreGraph(const Vector& source, const Matrix& targets);

// --- Neighbourhood radius -----------------------------------------------------

struct MaxHopResult {
  int max_hop = 1;
  // False when no k < k_max gave identical predictions for every probe.
  bool converged = true;
};

// Smallest k >= 1 for which the full class distribution of every probe on
// G_{N_{k+1}} equals the one on G_{N_k} within 1e-9.
MaxHopResult EstimateMaxHop(const GcnModel& model, const Graph& g,
                            const NodeSet& probes, int k_max);

// Radius around a target whose induced subgraph gives exact embeddings for
// every node within k hops of it.
int EmbeddingRadius(int k, const GcnModel& backbone);

// Loss weight of one pair of a target with `sources` sources.
double PairWeight(PairWeighting weighting, size_t sources);

// Union of the K-hop (attribution) and 2K-hop (parameter) balls around a
// batch of target nodes, induced. Throw on an empty batch.
InducedSubgraph SampleAttrSubgraph(const Graph& g, const NodeSet& batch, int k);
InducedSubgraph SampleParamSubgraph(const Graph& g, const NodeSet& batch, int k);

// --- Training ---------------------------------------------------------------

struct ExplainerConfig {
  Objective objective = Objective::kRemoval;
  PairWeighting weighting = PairWeighting::kPerPair;
  EmbeddingMode mode = EmbeddingMode::kBidirectional;
  int embedding_dim = 20;
  int hidden_dim = 20;
  // Aggregating backbone layers; -1 uses the max hop (node task) or 3.
  int num_layers = -1;
  // Node task radius; -1 probes it on the training targets.
  int max_hop = -1;
  int probe_k_max = 6;
  // -1 selects 1e-3 for node tasks and 1e-4 for graph tasks.
  double learning_rate = -1.0;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 10;
  double min_delta = 1e-5;
  // Validation pairs use fixed estimates averaged over this many samples.
  int validation_targets = 64;
  int validation_samples = 32;
  int workers = 1;
  uint64_t seed = 0;
};

double ResolvedLearningRate(const ExplainerConfig& config, TaskKind task);

struct TrainingTrace {
  std::vector<double> train_loss;  // mean pair loss per epoch
  std::vector<double> valid_loss;  // after each epoch
  double initial_valid_loss = 0.0;
  int best_epoch = 0;              // 1-based; 0 means the initial model
  int max_hop = 0;
  bool max_hop_converged = true;
};

struct ExplainerTrainResult {
  ExplainerModel model;
  TrainingTrace trace;
};

ExplainerTrainResult TrainExplainer(const GcnModel& target, const Graph& g,
                                    const NodeSet& train_targets,
                                    const NodeSet& valid_targets,
                                    const ExplainerConfig& config);

// `train` and `valid` index into `graphs`.
ExplainerTrainResult TrainGraphExplainer(const GcnModel& target,
                                         const std::vector<Graph>& graphs,
                                         const NodeSet& train,
                                         const NodeSet& valid,
                                         const ExplainerConfig& config);

// Regression losses on a backbone output, mean squared error over the listed
// pairs. Node pairs use local ids of the subgraph the output came from.
struct PairTarget {
  NodeId source = 0;
  NodeId target = 0;
  double value = 0.0;
  double weight = 1.0;
};
LossFn PairRegressionLoss(std::vector<PairTarget> pairs, int embedding_dim,
                          EmbeddingMode mode);
// Graph scores <p_j, t_G> against `values` (one per row of the output).
LossFn GraphRegressionLoss(Vector values, int embedding_dim, EmbeddingMode mode);

// --- Inference --------------------------------------------------------------

struct ScoredNode {
  NodeId node = 0;
  double score = 0.0;
};

struct Explanation {
  int64_t target = 0;  // node id, or graph index
  std::vector<ScoredNode> sources;  // score descending, then id ascending
};

void SortSources(std::vector<ScoredNode>& sources);

// Scores every K-hop neighbour (target excluded) of each target after one
// backbone pass over the union of the targets' EmbeddingRadius balls.
std::vector<Explanation> Explain(const ExplainerModel& explainer, const Graph& g,
                                 const NodeSet& targets);

// Scores every node of each listed graph.
std::vector<Explanation> ExplainGraphs(const ExplainerModel& explainer,
                                       const std::vector<Graph>& graphs,
                                       const NodeSet& indices);

}  // namespace amortex

#endif  // AMORTEX_EXPLAINER_H_
