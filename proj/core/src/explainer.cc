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

#include "amortex/explainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "amortex/attribution.h"
#include "amortex/error.h"
#include "amortex/parallel.h"
#include "amortex/random.h"

namespace amortex {
namespace {

constexpr double kPredictionTolerance = 1e-9;

int SourceOffset(EmbeddingMode) { return 0; }
int TargetOffset(int embedding_dim, EmbeddingMode mode) {
  return mode == EmbeddingMode::kBidirectional ? embedding_dim : 0;
}

NodeSet Subsample(const NodeSet& nodes, int limit, uint64_t seed) {
  if (limit < 0 || nodes.size() <= static_cast<size_t>(limit)) return nodes;
  std::vector<NodeId> ids = nodes.ids();
  Rng rng(seed);
  rng.Shuffle(ids);
  ids.resize(limit);
  return NodeSet::FromUnsorted(std::move(ids));
}

void CheckConfig(const ExplainerConfig& config) {
  if (config.embedding_dim < 1) throw InvalidArgument("embedding_dim must be >= 1");
  if (config.hidden_dim < 1) throw InvalidArgument("hidden_dim must be >= 1");
  if (config.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (config.max_epochs < 1) throw InvalidArgument("max_epochs must be >= 1");
  if (config.patience < 1) throw InvalidArgument("patience must be >= 1");
  if (config.validation_samples < 1) {
    throw InvalidArgument("validation_samples must be >= 1");
  }
}

// Tracks the best validation loss and decides when to stop.
class EarlyStopper {
 public:
  EarlyStopper(double initial_loss, const Vector& initial_params, int patience,
               double min_delta)
      : best_loss_(initial_loss),
        best_params_(initial_params),
        patience_(patience),
        min_delta_(min_delta) {}

  // Returns true when training should stop.
  bool Observe(int epoch, double loss, const Vector& params) {
    if (loss < best_loss_ - min_delta_) {
      best_loss_ = loss;
      best_params_ = params;
      best_epoch_ = epoch;
      stale_ = 0;
      return false;
    }
    return ++stale_ >= patience_;
  }

  const Vector& best_params() const { return best_params_; }
  int best_epoch() const { return best_epoch_; }

 private:
  double best_loss_;
  Vector best_params_;
  int patience_;
  double min_delta_;
  int best_epoch_ = 0;
  int stale_ = 0;
};

void Accumulate(std::vector<AttributionEstimate>& estimates,
                const std::vector<double>& samples) {
  for (size_t k = 0; k < estimates.size(); ++k) {
    estimates[k] = McUpdate(estimates[k], DeltaSample{{}, samples[k]});
  }
}

std::vector<double> MeanOfSamples(int count, const std::function<std::vector<double>()>& draw) {
  std::vector<double> total;
  for (int s = 0; s < count; ++s) {
    const std::vector<double> sample = draw();
    if (total.empty()) total.assign(sample.size(), 0.0);
    for (size_t k = 0; k < sample.size(); ++k) total[k] += sample[k];
  }
  for (double& v : total) v /= count;
  return total;
}

}  // namespace

std::string ToString(TaskKind task) {
  return task == TaskKind::kNode ? "node" : "graph";
}
std::string ToString(EmbeddingMode mode) {
  return mode == EmbeddingMode::kBidirectional ? "bidirectional" : "single";
}
std::string ToString(Objective objective) {
  return objective == Objective::kRemoval ? "removal" : "mi";
}

std::string ToString(PairWeighting weighting) {
  return weighting == PairWeighting::kPerPair ? "per-pair" : "per-target";
}

TaskKind ParseTaskKind(const std::string& text) {
  if (text == "node") return TaskKind::kNode;
  if (text == "graph") return TaskKind::kGraph;
  throw InvalidArgument("unknown task '" + text + "' (expected node|graph)");
}
EmbeddingMode ParseEmbeddingMode(const std::string& text) {
  if (text == "bidirectional") return EmbeddingMode::kBidirectional;
  if (text == "single") return EmbeddingMode::kSingle;
  throw InvalidArgument("unknown embedding '" + text +
                        "' (expected bidirectional|single)");
}
Objective ParseObjective(const std::string& text) {
  if (text == "removal") return Objective::kRemoval;
  if (text == "mi") return Objective::kMutualInformation;
  throw InvalidArgument("unknown mode '" + text + "' (expected removal|mi)");
}

PairWeighting ParsePairWeighting(const std::string& text) {
  if (text == "per-pair") return PairWeighting::kPerPair;
  if (text == "per-target") return PairWeighting::kPerTarget;
  throw InvalidArgument("unknown weighting '" + text + "' (expected per-pair|per-target)");
}

ExplainerModel::ExplainerModel(GcnModel backbone, int embedding_dim,
                               EmbeddingMode mode, int max_hop, TaskKind task)
    : backbone_(std::move(backbone)),
      embedding_dim_(embedding_dim),
      mode_(mode),
      max_hop_(max_hop),
      task_(task) {
  if (embedding_dim_ < 1) throw InvalidArgument("embedding_dim must be >= 1");
  if (max_hop_ < 0) throw InvalidArgument("max_hop must be >= 0");
  if (backbone_.head() != Head::kNode) {
    throw InvalidArgument("explainer backbone must emit per-node outputs");
  }
  const int width = mode_ == EmbeddingMode::kBidirectional ? 2 * embedding_dim_
                                                           : embedding_dim_;
  if (backbone_.output_dim() != width) {
    throw InvalidArgument("explainer backbone emits " +
                          std::to_string(backbone_.output_dim()) +
                          " values per node, expected " + std::to_string(width));
  }
}

constexpr double kExplainerBiasInit = 0.3;

ExplainerModel ExplainerModel::Initialize(int input_dim, int embedding_dim,
                                          int num_layers, int hidden_dim,
                                          EmbeddingMode mode, int max_hop,
                                          TaskKind task, uint64_t seed) {
  if (num_layers < 0) throw InvalidArgument("num_layers must be >= 0");
  if (embedding_dim < 1) throw InvalidArgument("embedding_dim must be >= 1");
  GcnSpec spec;
  spec.input_dim = input_dim;
  spec.head = Head::kNode;
  spec.aggregation = Aggregation::kSymmetric;
  // Zero biases on constant features would keep every layer rank one.
  spec.bias_init = kExplainerBiasInit;
  for (int l = 0; l < num_layers; ++l) {
    spec.layer_dims.push_back(hidden_dim);
    spec.aggregate.push_back(true);
  }
  spec.layer_dims.push_back(mode == EmbeddingMode::kBidirectional ? 2 * embedding_dim
                                                                  : embedding_dim);
  spec.aggregate.push_back(false);
  return ExplainerModel(GcnModel::Initialize(spec, seed), embedding_dim, mode,
                        max_hop, task);
}

Matrix ExplainerModel::Embed(const InducedSubgraph& sg) const {
  return backbone_.Forward(sg);
}

Matrix SourceEmbeddings(const Matrix& embeddings, int embedding_dim,
                        EmbeddingMode mode) {
  return embeddings.middleCols(SourceOffset(mode), embedding_dim);
}

Matrix TargetEmbeddings(const Matrix& embeddings, int embedding_dim,
                        EmbeddingMode mode) {
  return embeddings.middleCols(TargetOffset(embedding_dim, mode), embedding_dim);
}

double ScoreNode(const Vector& source, const Vector& target) {
  if (source.size() != target.size()) {
    throw InvalidArgument("embedding dimensions differ");
  }
  return source.dot(target);
}

Vector MaxPool(const Matrix& rows) {
  if (rows.rows() == 0) throw InvalidArgument("max-pool over no rows");
  return rows.colwise().maxCoeff().transpose();
}

double ScoreGraph(const Vector& source, const Matrix& targets) {
  return ScoreNode(source, MaxPool(targets));
}

MaxHopResult EstimateMaxHop(const GcnModel& model, const Graph& g,
                            const NodeSet& probes, int k_max) {
  if (probes.empty()) throw InvalidArgument("max-hop probing needs probe nodes");
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  if (model.head() != Head::kNode) {
    throw InvalidArgument("max-hop probing requires a node-classification model");
  }
  auto distribution = [&](NodeId v, int k) {
    const InducedSubgraph sg(g, KhopNeighbors(g, v, k));
    return PredictNode(model, sg, sg.LocalId(v)).probabilities;
  };
  for (int k = 1; k <= k_max; ++k) {
    bool stable = true;
    for (NodeId v : probes) {
      const Vector a = distribution(v, k);
      const Vector b = distribution(v, k + 1);
      if ((a - b).cwiseAbs().maxCoeff() > kPredictionTolerance) {
        stable = false;
        break;
      }
    }
    if (stable) return {k, true};
  }
  return {k_max, false};
}

double PairWeight(PairWeighting weighting, size_t sources) {
  if (weighting == PairWeighting::kPerPair || sources == 0) return 1.0;
  return 1.0 / static_cast<double>(sources);
}

int EmbeddingRadius(int k, const GcnModel& backbone) {
  const int extra = backbone.aggregation() == Aggregation::kSymmetric ? 1 : 0;
  return k + backbone.NumAggregationLayers() + extra;
}

InducedSubgraph SampleAttrSubgraph(const Graph& g, const NodeSet& batch, int k) {
  if (batch.empty()) throw InvalidArgument("empty target batch");
  return InducedSubgraph(g, KhopUnion(g, batch, k));
}

InducedSubgraph SampleParamSubgraph(const Graph& g, const NodeSet& batch, int k) {
  if (batch.empty()) throw InvalidArgument("empty target batch");
  return InducedSubgraph(g, KhopUnion(g, batch, 2 * k));
}

double ResolvedLearningRate(const ExplainerConfig& config, TaskKind task) {
  if (config.learning_rate > 0.0) return config.learning_rate;
  return task == TaskKind::kNode ? 1e-3 : 1e-4;
}

LossFn PairRegressionLoss(std::vector<PairTarget> pairs, int embedding_dim,
                          EmbeddingMode mode) {
  const int src = SourceOffset(mode);
  const int tgt = TargetOffset(embedding_dim, mode);
  return [pairs = std::move(pairs), embedding_dim, src, tgt](const Matrix& out) {
    LossAndGrad result;
    result.grad = Matrix::Zero(out.rows(), out.cols());
    double total_weight = 0.0;
    for (const PairTarget& pair : pairs) total_weight += pair.weight;
    if (total_weight <= 0.0) return result;
    for (const PairTarget& pair : pairs) {
      const double scale = pair.weight / total_weight;
      const auto p = out.row(pair.source).segment(src, embedding_dim);
      const auto t = out.row(pair.target).segment(tgt, embedding_dim);
      const double residual = p.dot(t) - pair.value;
      result.loss += residual * residual * scale;
      const double g = 2.0 * residual * scale;
      result.grad.row(pair.source).segment(src, embedding_dim) += g * t;
      result.grad.row(pair.target).segment(tgt, embedding_dim) += g * p;
    }
    return result;
  };
}

LossFn GraphRegressionLoss(Vector values, int embedding_dim, EmbeddingMode mode) {
  const int src = SourceOffset(mode);
  const int tgt = TargetOffset(embedding_dim, mode);
  return [values = std::move(values), embedding_dim, src, tgt](const Matrix& out) {
    if (out.rows() != values.size()) {
      throw InvalidArgument("one regression value per node is required");
    }
    LossAndGrad result;
    result.grad = Matrix::Zero(out.rows(), out.cols());
    if (out.rows() == 0) return result;
    const auto targets = out.middleCols(tgt, embedding_dim);
    Vector pooled(embedding_dim);
    std::vector<Eigen::Index> argmax(embedding_dim);
    for (int c = 0; c < embedding_dim; ++c) {
      pooled(c) = targets.col(c).maxCoeff(&argmax[c]);
    }
    const double scale = 1.0 / static_cast<double>(out.rows());
    Vector pooled_grad = Vector::Zero(embedding_dim);
    for (Eigen::Index j = 0; j < out.rows(); ++j) {
      const Vector p = out.row(j).segment(src, embedding_dim).transpose();
      const double residual = p.dot(pooled) - values(j);
      result.loss += residual * residual * scale;
      const double g = 2.0 * residual * scale;
      result.grad.row(j).segment(src, embedding_dim) += g * pooled.transpose();
      pooled_grad += g * p;
    }
    for (int c = 0; c < embedding_dim; ++c) {
      result.grad(argmax[c], tgt + c) += pooled_grad(c);
    }
    return result;
  };
}

ExplainerTrainResult TrainExplainer(const GcnModel& target, const Graph& g,
                                    const NodeSet& train_targets,
                                    const NodeSet& valid_targets,
                                    const ExplainerConfig& config) {
  CheckConfig(config);
  if (train_targets.empty()) throw InvalidArgument("no training targets");
  for (const NodeSet* set : {&train_targets, &valid_targets}) {
    for (NodeId v : *set) {
      if (!g.IsValid(v)) throw InvalidArgument("invalid target node " + std::to_string(v));
    }
  }

  MaxHopResult hop;
  if (config.max_hop >= 0) {
    hop.max_hop = config.max_hop;
  } else {
    // Evenly spaced probes over the training targets.
    std::vector<NodeId> probes;
    const size_t count = std::min<size_t>(16, train_targets.size());
    for (size_t k = 0; k < count; ++k) {
      probes.push_back(train_targets[k * train_targets.size() / count]);
    }
    hop = EstimateMaxHop(target, g, NodeSet::FromUnsorted(probes), config.probe_k_max);
  }
  const int k = hop.max_hop;
  const int layers = config.num_layers >= 0 ? config.num_layers : k;
  ExplainerModel model = ExplainerModel::Initialize(
      g.feature_dim(), config.embedding_dim, layers, config.hidden_dim,
      config.mode, k, TaskKind::kNode, DeriveSeed(config.seed, "explainer-init"));
  const int dim = config.embedding_dim;
  const int radius = EmbeddingRadius(k, model.backbone());

  auto draw = [&config](const NodeOracle& oracle, Rng& rng) {
    return config.objective == Objective::kRemoval ? PartitionDeltas(oracle, rng)
                                                   : PartitionMiSamples(oracle, rng);
  };

  struct TargetState {
    std::optional<NodeOracle> oracle;
    NodeSet sources;
    std::vector<AttributionEstimate> estimates;
  };
  std::vector<TargetState> states(train_targets.size());
  ParallelFor(states.size(), config.workers, [&](size_t s) {
    TargetState& state = states[s];
    state.oracle.emplace(target, g, train_targets[s], k);
    state.sources = state.oracle->sources();
    state.estimates.resize(state.sources.size());
    for (size_t q = 0; q < state.sources.size(); ++q) {
      state.estimates[q].source = state.sources[q];
      state.estimates[q].target = train_targets[s];
    }
  });

  // Fixed validation pairs with many-sample estimates.
  const NodeSet valid =
      Subsample(valid_targets, config.validation_targets,
                DeriveSeed(config.seed, "valid-pick"));
  std::optional<InducedSubgraph> valid_sg;
  LossFn valid_loss;
  if (!valid.empty()) {
    std::vector<std::vector<double>> values(valid.size());
    std::vector<NodeSet> sources(valid.size());
    const uint64_t valid_seed = DeriveSeed(config.seed, "valid-mc");
    ParallelFor(valid.size(), config.workers, [&](size_t s) {
      const NodeOracle oracle(target, g, valid[s], k);
      sources[s] = oracle.sources();
      Rng rng(DeriveSeed(valid_seed, static_cast<uint64_t>(valid[s])));
      values[s] = MeanOfSamples(config.validation_samples,
                                [&] { return draw(oracle, rng); });
    });
    valid_sg.emplace(g, KhopUnion(g, valid, radius));
    std::vector<PairTarget> pairs;
    for (size_t s = 0; s < valid.size(); ++s) {
      const NodeId t_local = valid_sg->LocalId(valid[s]);
      for (size_t q = 0; q < sources[s].size(); ++q) {
        pairs.push_back({valid_sg->LocalId(sources[s][q]), t_local, values[s][q],
                         PairWeight(config.weighting, sources[s].size())});
      }
    }
    valid_loss = PairRegressionLoss(std::move(pairs), dim, config.mode);
  }

  Adam adam(model.backbone().NumParameters(),
            ResolvedLearningRate(config, TaskKind::kNode));
  Vector params = model.backbone().GetParameters();
  TrainingTrace trace;
  trace.max_hop = k;
  trace.max_hop_converged = hop.converged;

  auto train_objective = [&]() {
    // Without validation targets the stopping rule watches the mean training
    // loss of the current estimates.
    double total = 0.0;
    double total_weight = 0.0;
    const InducedSubgraph sg(g, KhopUnion(g, train_targets, radius));
    const Matrix out = model.Embed(sg);
    for (size_t s = 0; s < states.size(); ++s) {
      const NodeId t_local = sg.LocalId(train_targets[s]);
      const double w = PairWeight(config.weighting, states[s].sources.size());
      for (size_t q = 0; q < states[s].sources.size(); ++q) {
        const NodeId j_local = sg.LocalId(states[s].sources[q]);
        const double r =
            out.row(j_local).segment(0, dim).dot(
                out.row(t_local).segment(TargetOffset(dim, config.mode), dim)) -
            states[s].estimates[q].value;
        total += w * r * r;
        total_weight += w;
      }
    }
    return total_weight > 0.0 ? total / total_weight : 0.0;
  };
  auto monitor = [&]() {
    if (valid_loss) return valid_loss(model.Embed(*valid_sg)).loss;
    return train_objective();
  };

  trace.initial_valid_loss = monitor();
  EarlyStopper stopper(trace.initial_valid_loss, params, config.patience,
                       config.min_delta);
  const uint64_t order_seed = DeriveSeed(config.seed, "epoch-order");
  const uint64_t mc_seed = DeriveSeed(config.seed, "mc");
  std::vector<size_t> order(states.size());
  for (size_t s = 0; s < order.size(); ++s) order[s] = s;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng order_rng(DeriveSeed(order_seed, static_cast<uint64_t>(epoch)));
    order_rng.Shuffle(order);
    const uint64_t epoch_seed = DeriveSeed(mc_seed, static_cast<uint64_t>(epoch));
    double loss_sum = 0.0;
    size_t pair_count = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      ParallelFor(stop - start, config.workers, [&](size_t b) {
        TargetState& state = states[order[start + b]];
        Rng rng(DeriveSeed(epoch_seed, static_cast<uint64_t>(state.oracle->target())));
        Accumulate(state.estimates, draw(*state.oracle, rng));
      });
      std::vector<NodeId> batch_ids;
      for (size_t b = start; b < stop; ++b) batch_ids.push_back(train_targets[order[b]]);
      const NodeSet batch = NodeSet::FromUnsorted(batch_ids);
      const InducedSubgraph sg(g, KhopUnion(g, batch, radius));
      std::vector<PairTarget> pairs;
      for (size_t b = start; b < stop; ++b) {
        const TargetState& state = states[order[b]];
        const NodeId t_local = sg.LocalId(state.oracle->target());
        for (size_t q = 0; q < state.sources.size(); ++q) {
          pairs.push_back({sg.LocalId(state.sources[q]), t_local,
                           state.estimates[q].value,
                           PairWeight(config.weighting, state.sources.size())});
        }
      }
      if (pairs.empty()) continue;
      const size_t n_pairs = pairs.size();
      double batch_loss = 0.0;
      const Vector grad = ComputeGradient(
          model.backbone(), sg, PairRegressionLoss(std::move(pairs), dim, config.mode),
          &batch_loss);
      if (!grad.allFinite()) throw NumericError("non-finite explainer gradient");
      adam.Step(params, grad);
      model.mutable_backbone().SetParameters(params);
      loss_sum += batch_loss * static_cast<double>(n_pairs);
      pair_count += n_pairs;
    }
    trace.train_loss.push_back(pair_count ? loss_sum / pair_count : 0.0);
    const double monitored = monitor();
    trace.valid_loss.push_back(monitored);
    if (!std::isfinite(monitored)) throw NumericError("non-finite validation loss");
    if (stopper.Observe(epoch, monitored, params)) break;
  }
  model.mutable_backbone().SetParameters(stopper.best_params());
  trace.best_epoch = stopper.best_epoch();
  return {std::move(model), std::move(trace)};
}

ExplainerTrainResult TrainGraphExplainer(const GcnModel& target,
                                         const std::vector<Graph>& graphs,
                                         const NodeSet& train,
                                         const NodeSet& valid_graphs,
                                         const ExplainerConfig& config) {
  CheckConfig(config);
  if (train.empty()) throw InvalidArgument("no training graphs");
  if (graphs.empty()) throw InvalidArgument("empty graph dataset");
  for (const NodeSet* set : {&train, &valid_graphs}) {
    for (NodeId idx : *set) {
      if (idx < 0 || idx >= static_cast<NodeId>(graphs.size())) {
        throw InvalidArgument("graph index " + std::to_string(idx) + " out of range");
      }
    }
  }
  const int layers = config.num_layers >= 0 ? config.num_layers : 3;
  const int dim = config.embedding_dim;
  ExplainerModel model = ExplainerModel::Initialize(
      graphs.front().feature_dim(), dim, layers, config.hidden_dim, config.mode,
      config.max_hop >= 0 ? config.max_hop : layers, TaskKind::kGraph,
      DeriveSeed(config.seed, "explainer-init"));

  auto draw = [&config](const GraphOracle& oracle, Rng& rng) {
    return config.objective == Objective::kRemoval
               ? GraphPartitionDeltas(oracle, rng)
               : GraphPartitionMiSamples(oracle, rng);
  };

  struct GraphState {
    NodeId index = 0;
    std::optional<GraphOracle> oracle;
    std::optional<InducedSubgraph> view;
    std::vector<AttributionEstimate> estimates;
  };
  std::vector<GraphState> states(train.size());
  ParallelFor(states.size(), config.workers, [&](size_t s) {
    GraphState& state = states[s];
    state.index = train[s];
    const Graph& g = graphs[state.index];
    state.oracle.emplace(target, g);
    state.view.emplace(g, NodeSet::Range(g.num_nodes()));
    state.estimates.resize(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      state.estimates[v].source = v;
      state.estimates[v].target = state.index;
    }
  });

  auto gradient_over = [&](const std::vector<std::pair<const InducedSubgraph*, Vector>>& items,
                           double* loss) {
    Vector grad = Vector::Zero(model.backbone().NumParameters());
    double total = 0.0;
    for (const auto& [view, values] : items) {
      double value = 0.0;
      grad += ComputeGradient(model.backbone(), *view,
                              GraphRegressionLoss(values, dim, config.mode), &value);
      total += value;
    }
    const double scale = 1.0 / static_cast<double>(items.size());
    if (loss != nullptr) *loss = total * scale;
    return Vector(grad * scale);
  };

  const NodeSet valid = Subsample(valid_graphs, config.validation_targets,
                                  DeriveSeed(config.seed, "valid-pick"));
  std::vector<InducedSubgraph> valid_views;
  std::vector<Vector> valid_values;
  {
    const uint64_t valid_seed = DeriveSeed(config.seed, "valid-mc");
    std::vector<Vector> values(valid.size());
    ParallelFor(valid.size(), config.workers, [&](size_t s) {
      const GraphOracle oracle(target, graphs[valid[s]]);
      Rng rng(DeriveSeed(valid_seed, static_cast<uint64_t>(valid[s])));
      const std::vector<double> mean =
          MeanOfSamples(config.validation_samples, [&] { return draw(oracle, rng); });
      values[s] = Eigen::Map<const Vector>(mean.data(), mean.size());
    });
    for (size_t s = 0; s < valid.size(); ++s) {
      const Graph& g = graphs[valid[s]];
      valid_views.emplace_back(g, NodeSet::Range(g.num_nodes()));
    }
    valid_values = std::move(values);
  }
  auto monitor = [&]() {
    double total = 0.0;
    if (!valid.empty()) {
      for (size_t s = 0; s < valid.size(); ++s) {
        total += GraphRegressionLoss(valid_values[s], dim, config.mode)(
                     model.Embed(valid_views[s]))
                     .loss;
      }
      return total / static_cast<double>(valid.size());
    }
    for (const GraphState& state : states) {
      Vector values(state.estimates.size());
      for (size_t q = 0; q < state.estimates.size(); ++q) values(q) = state.estimates[q].value;
      total += GraphRegressionLoss(values, dim, config.mode)(model.Embed(*state.view)).loss;
    }
    return total / static_cast<double>(states.size());
  };

  Adam adam(model.backbone().NumParameters(),
            ResolvedLearningRate(config, TaskKind::kGraph));
  Vector params = model.backbone().GetParameters();
  TrainingTrace trace;
  trace.max_hop = model.max_hop();
  trace.initial_valid_loss = monitor();
  EarlyStopper stopper(trace.initial_valid_loss, params, config.patience,
                       config.min_delta);
  const uint64_t order_seed = DeriveSeed(config.seed, "epoch-order");
  const uint64_t mc_seed = DeriveSeed(config.seed, "mc");
  std::vector<size_t> order(states.size());
  for (size_t s = 0; s < order.size(); ++s) order[s] = s;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng order_rng(DeriveSeed(order_seed, static_cast<uint64_t>(epoch)));
    order_rng.Shuffle(order);
    const uint64_t epoch_seed = DeriveSeed(mc_seed, static_cast<uint64_t>(epoch));
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      ParallelFor(stop - start, config.workers, [&](size_t b) {
        GraphState& state = states[order[start + b]];
        Rng rng(DeriveSeed(epoch_seed, static_cast<uint64_t>(state.index)));
        Accumulate(state.estimates, draw(*state.oracle, rng));
      });
      std::vector<std::pair<const InducedSubgraph*, Vector>> items;
      for (size_t b = start; b < stop; ++b) {
        const GraphState& state = states[order[b]];
        Vector values(state.estimates.size());
        for (size_t q = 0; q < state.estimates.size(); ++q) values(q) = state.estimates[q].value;
        items.emplace_back(&*state.view, std::move(values));
      }
      double batch_loss = 0.0;
      const Vector grad = gradient_over(items, &batch_loss);
      if (!grad.allFinite()) throw NumericError("non-finite explainer gradient");
      adam.Step(params, grad);
      model.mutable_backbone().SetParameters(params);
      loss_sum += batch_loss;
      ++batches;
    }
    trace.train_loss.push_back(batches ? loss_sum / batches : 0.0);
    const double monitored = monitor();
    trace.valid_loss.push_back(monitored);
    if (!std::isfinite(monitored)) throw NumericError("non-finite validation loss");
    if (stopper.Observe(epoch, monitored, params)) break;
  }
  model.mutable_backbone().SetParameters(stopper.best_params());
  trace.best_epoch = stopper.best_epoch();
  return {std::move(model), std::move(trace)};
}

void SortSources(std::vector<ScoredNode>& sources) {
  std::sort(sources.begin(), sources.end(),
            [](const ScoredNode& a, const ScoredNode& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.node < b.node;
            });
}

std::vector<Explanation> Explain(const ExplainerModel& explainer, const Graph& g,
                                 const NodeSet& targets) {
  if (explainer.task() != TaskKind::kNode) {
    throw InvalidArgument("node explanations need a node-task explainer");
  }
  if (targets.empty()) return {};
  for (NodeId v : targets) {
    if (!g.IsValid(v)) throw InvalidArgument("invalid target node " + std::to_string(v));
  }
  const int k = explainer.max_hop();
  const int dim = explainer.embedding_dim();
  const int tgt = TargetOffset(dim, explainer.mode());
  const int radius = EmbeddingRadius(k, explainer.backbone());
  const InducedSubgraph sg(g, KhopUnion(g, targets, radius));
  const Matrix out = explainer.Embed(sg);
  std::vector<Explanation> explanations;
  explanations.reserve(targets.size());
  for (NodeId i : targets) {
    Explanation e;
    e.target = i;
    const auto t = out.row(sg.LocalId(i)).segment(tgt, dim);
    for (NodeId j : KhopNeighbors(g, i, k)) {
      if (j == i) continue;
      e.sources.push_back({j, out.row(sg.LocalId(j)).segment(0, dim).dot(t)});
    }
    SortSources(e.sources);
    explanations.push_back(std::move(e));
  }
  return explanations;
}

std::vector<Explanation> ExplainGraphs(const ExplainerModel& explainer,
                                       const std::vector<Graph>& graphs,
                                       const NodeSet& indices) {
  if (explainer.task() != TaskKind::kGraph) {
    throw InvalidArgument("graph explanations need a graph-task explainer");
  }
  const int dim = explainer.embedding_dim();
  std::vector<Explanation> explanations;
  explanations.reserve(indices.size());
  for (NodeId idx : indices) {
    if (idx < 0 || idx >= static_cast<NodeId>(graphs.size())) {
      throw InvalidArgument("graph index " + std::to_string(idx) + " out of range");
    }
    const Graph& g = graphs[idx];
    const Matrix out = explainer.Embed(InducedSubgraph(g, NodeSet::Range(g.num_nodes())));
    const Vector pooled =
        MaxPool(TargetEmbeddings(out, dim, explainer.mode()));
    Explanation e;
    e.target = idx;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      e.sources.push_back({v, out.row(v).segment(0, dim).dot(pooled.transpose())});
    }
    SortSources(e.sources);
    explanations.push_back(std::move(e));
  }
  return explanations;
}

}  // namespace amortex
