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

// A small float64 GCN stack with exact analytic gradients.
//
// Aggregating layers compute Z = P H W + b with the propagation operator
//
//   P = D^{-1/2} (A + I),   D = diag(deg + 1),
//
// i.e. each node sums itself and its neighbours and scales the sum by the
// inverse square root of its own closed-neighbourhood size. Unlike the
// two-sided normalisation, P only reads the degree of the receiving node, so
// an L-layer stack depends on exactly the L-hop ball around each node. The
// explainer backbone uses the symmetric D^{-1/2} (A + I) D^{-1/2}, which keeps
// activations bounded on hub nodes. Dense
// layers (aggregate = false) apply the same affine map without propagation.
//
// ReLU separates consecutive layers. A node head emits raw per-node outputs
// (logits, or embeddings for the explainer). A graph head applies ReLU after
// the last node layer, max-pools over nodes and finishes with a dense
// readout layer.

#ifndef AMORTEX_GCN_H_
#define AMORTEX_GCN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amortex/graph.h"

namespace amortex {

enum class Head { kNode, kGraph };

// kSqrtDegree and kMean scale a node's aggregated sum by 1/sqrt(deg + 1) or
// 1/(deg + 1) of the receiving node. kSymmetric also scales each message by
// 1/sqrt(deg + 1) of its sender, so it reads one hop further.
enum class Aggregation { kSqrtDegree, kMean, kSymmetric };

std::string ToString(Aggregation aggregation);
Aggregation ParseAggregation(const std::string& text);
double AggregationScale(Aggregation aggregation, int64_t degree);

struct Layer {
  Matrix weight;  // in_dim x out_dim
  Vector bias;    // out_dim
  bool aggregate = true;
};

struct GcnSpec {
  int input_dim = 0;
  // Output width of each node layer, in order.
  std::vector<int> layer_dims;
  // Per-layer message passing flag. Empty means every layer aggregates.
  std::vector<bool> aggregate;
  Head head = Head::kNode;
  // Class count of the readout layer; graph head only.
  int readout_dim = 0;
  // Biases start uniform in [-bias_init, bias_init]; 0 gives zero biases.
  double bias_init = 0.0;
  Aggregation aggregation = Aggregation::kSqrtDegree;
};

// Intermediate values of one forward pass, consumed by the backward pass.
struct ForwardCache {
  const InducedSubgraph* graph = nullptr;
  std::vector<Matrix> inputs;           // input of node layer l
  std::vector<Matrix> preactivations;   // Z of node layer l
  Matrix pooled;                        // 1 x width, graph head only
  std::vector<NodeId> pool_argmax;      // row that won each pooled column
  Matrix output;
};

class GcnModel {
 public:
  GcnModel(std::vector<Layer> layers, Head head, std::optional<Layer> readout,
           uint64_t seed, Aggregation aggregation = Aggregation::kSqrtDegree);

  // Glorot-uniform weights and biases per GcnSpec::bias_init, drawn from
  // `seed`.
  static GcnModel Initialize(const GcnSpec& spec, uint64_t seed);

  const std::vector<Layer>& layers() const { return layers_; }
  const std::optional<Layer>& readout() const { return readout_; }
  Head head() const { return head_; }
  uint64_t seed() const { return seed_; }
  Aggregation aggregation() const { return aggregation_; }
  int input_dim() const;
  int output_dim() const;
  int NumAggregationLayers() const;

  // Raw outputs: num_nodes x output_dim for a node head, 1 x output_dim for
  // a graph head. Throws on a feature dimension mismatch.
  Matrix Forward(const InducedSubgraph& sg) const;
  ForwardCache ForwardWithCache(const InducedSubgraph& sg) const;

  // Gradient of a scalar loss with respect to every parameter, given the
  // gradient of that loss with respect to the forward output. Flattened in
  // the order of GetParameters().
  Vector Backward(const ForwardCache& cache, const Matrix& output_grad) const;

  int64_t NumParameters() const;
  // Layer by layer: weight (row-major) then bias; readout last.
  Vector GetParameters() const;
  void SetParameters(const Vector& params);

 private:
  std::vector<Layer> layers_;
  Head head_;
  std::optional<Layer> readout_;
  uint64_t seed_;
  Aggregation aggregation_;
};

// Y = P X and Y = P^T X for the propagation operator above.
Matrix Propagate(const InducedSubgraph& sg, const Matrix& x,
                 Aggregation aggregation = Aggregation::kSqrtDegree);
Matrix PropagateTranspose(const InducedSubgraph& sg, const Matrix& x,
                          Aggregation aggregation = Aggregation::kSqrtDegree);

struct PredictionVector {
  Vector probabilities;
  int predicted_class = 0;
};

PredictionVector Softmax(const Eigen::Ref<const Vector>& logits);

// Class distribution of every node (node head) or of the graph (graph
// head; one entry).
std::vector<PredictionVector> Predict(const GcnModel& model,
                                      const InducedSubgraph& sg);

// Class distribution at one local node of a node-head model. Only the
// receptive field of `local_target` is evaluated, so the cost does not depend
// on nodes that cannot influence the answer.
PredictionVector PredictNode(const GcnModel& model, const InducedSubgraph& sg,
                             NodeId local_target);

PredictionVector PredictGraph(const GcnModel& model, const InducedSubgraph& sg);

// --- Losses -----------------------------------------------------------------

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;  // d loss / d output, same shape as the output
};

using LossFn = std::function<LossAndGrad(const Matrix& output)>;

// Mean softmax cross-entropy over the listed output rows.
LossFn CrossEntropyLoss(std::vector<NodeId> rows, std::vector<int> labels);

// Mean over the listed rows of the squared error, summed across columns.
LossFn MseLoss(std::vector<NodeId> rows, Matrix targets);

// Analytic gradient of `loss` at the model's current parameters.
Vector ComputeGradient(const GcnModel& model, const InducedSubgraph& sg,
                       const LossFn& loss, double* loss_value = nullptr);

// Central finite differences, one parameter at a time.
Vector NumericGradient(const GcnModel& model, const InducedSubgraph& sg,
                       const LossFn& loss, double step = 1e-5);

// max_k |a_k - n_k| / max(max_k |a_k|, max_k |n_k|), with 0/0 taken as 0.
double GradientRelativeError(const Vector& analytic, const Vector& numeric);

// GradientRelativeError(ComputeGradient, NumericGradient).
double GradCheck(const GcnModel& model, const InducedSubgraph& sg,
                 const LossFn& loss, double step = 1e-5);

// --- Optimisation -----------------------------------------------------------

class Adam {
 public:
  Adam(int64_t num_params, double learning_rate, double weight_decay = 0.0,
       double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  // L2 weight decay is folded into the gradient.
  void Step(Vector& params, const Vector& grad);
  int64_t steps() const { return steps_; }

 private:
  double learning_rate_;
  double weight_decay_;
  double beta1_;
  double beta2_;
  double epsilon_;
  int64_t steps_ = 0;
  Vector first_moment_;
  Vector second_moment_;
};

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 300;
  // Graphs per optimiser step for graph datasets; node training is
  // full-batch over the train mask.
  int batch_size = 64;
  double weight_decay = 0.0;
  uint64_t seed = 0;
  // Independent initialisations to try. Training stops at the first one whose
  // validation accuracy reaches `restart_target`; otherwise the best
  // validation accuracy wins.
  int restarts = 1;
  double restart_target = 1.0;
};

struct AccuracyReport {
  double train = 0.0;
  double valid = 0.0;
  double test = 0.0;
};

struct TrainResult {
  GcnModel model;
  AccuracyReport accuracy;
  double final_loss = 0.0;
  int attempts = 1;
};

// Cross-entropy on the train mask. Requires node labels and split masks.
TrainResult TrainNodeClassifier(const Graph& g, const GcnSpec& spec,
                                const TrainConfig& config);

// Mini-batch cross-entropy over graphs. `split` indexes into `graphs`.
TrainResult TrainGraphClassifier(const std::vector<Graph>& graphs,
                                 const SplitMasks& split, const GcnSpec& spec,
                                 const TrainConfig& config);

double NodeAccuracy(const GcnModel& model, const Graph& g, const NodeSet& nodes);
double GraphAccuracy(const GcnModel& model, const std::vector<Graph>& graphs,
                     const NodeSet& indices);

// Three aggregation layers of width `hidden`; node head emits `num_classes`
// logits, graph head pools `hidden`-wide embeddings into a readout. Graph
// heads start with non-zero biases.
GcnSpec TargetSpec(int input_dim, int num_classes, Head head,
                   int num_layers = 3, int hidden = 20);

// Schedules that reach high accuracy on the synthetic benchmarks.
TrainConfig TargetTrainDefaults(Head head);

}  // namespace amortex

#endif  // AMORTEX_GCN_H_
