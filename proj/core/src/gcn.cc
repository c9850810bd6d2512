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

#include "amortex/gcn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "amortex/error.h"
#include "amortex/random.h"

namespace amortex {
namespace {

void ApplyRelu(Matrix& m) { m = m.cwiseMax(0.0); }

Matrix AffineRows(const Matrix& h, const Layer& layer) {
  Matrix z = h * layer.weight;
  z.rowwise() += layer.bias.transpose();
  return z;
}

Matrix LayerForward(const InducedSubgraph& sg, const Matrix& h,
                    const Layer& layer, Aggregation aggregation) {
  if (!layer.aggregate) return AffineRows(h, layer);
  Matrix z;
  // P (H W) == (P H) W; propagate on whichever side is narrower.
  if (layer.weight.cols() <= layer.weight.rows()) {
    z = Propagate(sg, h * layer.weight, aggregation);
  } else {
    z = Propagate(sg, h, aggregation) * layer.weight;
  }
  z.rowwise() += layer.bias.transpose();
  return z;
}

Layer GlorotLayer(int in_dim, int out_dim, bool aggregate, double bias_init,
                  Rng& rng) {
  Layer layer;
  layer.aggregate = aggregate;
  layer.weight.resize(in_dim, out_dim);
  const double limit = std::sqrt(6.0 / (in_dim + out_dim));
  for (int r = 0; r < in_dim; ++r) {
    for (int c = 0; c < out_dim; ++c) {
      layer.weight(r, c) = (2.0 * rng.Uniform() - 1.0) * limit;
    }
  }
  layer.bias = Vector::Zero(out_dim);
  if (bias_init > 0.0) {
    for (int c = 0; c < out_dim; ++c) {
      layer.bias(c) = (2.0 * rng.Uniform() - 1.0) * bias_init;
    }
  }
  return layer;
}

void CheckFeatureDim(const GcnModel& model, const InducedSubgraph& sg) {
  if (sg.features().cols() != model.input_dim()) {
    throw InvalidArgument("feature dimension " +
                          std::to_string(sg.features().cols()) +
                          " does not match model input dimension " +
                          std::to_string(model.input_dim()));
  }
}

}  // namespace

std::string ToString(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::kSqrtDegree: return "sqrt-degree";
    case Aggregation::kMean: return "mean";
    case Aggregation::kSymmetric: return "symmetric";
  }
  return "sqrt-degree";
}

Aggregation ParseAggregation(const std::string& text) {
  if (text == "sqrt-degree") return Aggregation::kSqrtDegree;
  if (text == "mean") return Aggregation::kMean;
  if (text == "symmetric") return Aggregation::kSymmetric;
  throw InvalidArgument("unknown aggregation '" + text + "'");
}

double AggregationScale(Aggregation aggregation, int64_t degree) {
  const double closed = static_cast<double>(degree + 1);
  return aggregation == Aggregation::kMean ? 1.0 / closed : 1.0 / std::sqrt(closed);
}

Matrix Propagate(const InducedSubgraph& sg, const Matrix& x,
                 Aggregation aggregation) {
  if (aggregation == Aggregation::kSymmetric) {
    Matrix scaled = x;
    for (NodeId v = 0; v < sg.num_nodes(); ++v) {
      scaled.row(v) *= AggregationScale(aggregation, sg.Degree(v));
    }
    Matrix y = scaled;
    for (NodeId v = 0; v < sg.num_nodes(); ++v) {
      for (NodeId u : sg.Neighbors(v)) y.row(v) += scaled.row(u);
      y.row(v) *= AggregationScale(aggregation, sg.Degree(v));
    }
    return y;
  }
  Matrix y = x;
  for (NodeId v = 0; v < sg.num_nodes(); ++v) {
    for (NodeId u : sg.Neighbors(v)) y.row(v) += x.row(u);
    y.row(v) *= AggregationScale(aggregation, sg.Degree(v));
  }
  return y;
}

Matrix PropagateTranspose(const InducedSubgraph& sg, const Matrix& x,
                          Aggregation aggregation) {
  if (aggregation == Aggregation::kSymmetric) return Propagate(sg, x, aggregation);
  Matrix scaled = x;
  for (NodeId v = 0; v < sg.num_nodes(); ++v) {
    scaled.row(v) *= AggregationScale(aggregation, sg.Degree(v));
  }
  Matrix y = scaled;
  for (NodeId u = 0; u < sg.num_nodes(); ++u) {
    for (NodeId v : sg.Neighbors(u)) y.row(u) += scaled.row(v);
  }
  return y;
}

GcnModel::GcnModel(std::vector<Layer> layers, Head head,
                   std::optional<Layer> readout, uint64_t seed,
                   Aggregation aggregation)
    : layers_(std::move(layers)),
      head_(head),
      readout_(std::move(readout)),
      seed_(seed),
      aggregation_(aggregation) {
  for (size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.bias.size() != layer.weight.cols()) {
      throw InvalidArgument("layer " + std::to_string(l) +
                            ": bias size does not match weight columns");
    }
    if (l > 0 && layers_[l - 1].weight.cols() != layer.weight.rows()) {
      throw InvalidArgument("layer " + std::to_string(l) +
                            ": input dimension does not match previous layer");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw NumericError("non-finite parameters in layer " + std::to_string(l));
    }
  }
  if (head_ == Head::kGraph) {
    if (!readout_) throw InvalidArgument("graph head requires a readout layer");
    if (layers_.empty()) throw InvalidArgument("graph head requires node layers");
    if (readout_->weight.rows() != layers_.back().weight.cols() ||
        readout_->bias.size() != readout_->weight.cols()) {
      throw InvalidArgument("readout layer dimensions are inconsistent");
    }
    readout_->aggregate = false;
  } else if (readout_) {
    throw InvalidArgument("node head takes no readout layer");
  }
}

GcnModel GcnModel::Initialize(const GcnSpec& spec, uint64_t seed) {
  if (spec.input_dim <= 0) throw InvalidArgument("input_dim must be positive");
  if (spec.bias_init < 0.0) throw InvalidArgument("bias_init must be >= 0");
  if (!spec.aggregate.empty() && spec.aggregate.size() != spec.layer_dims.size()) {
    throw InvalidArgument("aggregate flags must match layer count");
  }
  Rng rng(seed);
  std::vector<Layer> layers;
  int in_dim = spec.input_dim;
  for (size_t l = 0; l < spec.layer_dims.size(); ++l) {
    const bool aggregate = spec.aggregate.empty() || spec.aggregate[l];
    if (spec.layer_dims[l] <= 0) throw InvalidArgument("layer width must be positive");
    layers.push_back(
        GlorotLayer(in_dim, spec.layer_dims[l], aggregate, spec.bias_init, rng));
    in_dim = spec.layer_dims[l];
  }
  std::optional<Layer> readout;
  if (spec.head == Head::kGraph) {
    if (spec.readout_dim <= 0) throw InvalidArgument("readout_dim must be positive");
    readout = GlorotLayer(in_dim, spec.readout_dim, false, spec.bias_init, rng);
  }
  return GcnModel(std::move(layers), spec.head, std::move(readout), seed,
                  spec.aggregation);
}

int GcnModel::input_dim() const {
  if (layers_.empty()) return -1;
  return static_cast<int>(layers_.front().weight.rows());
}

int GcnModel::output_dim() const {
  if (readout_) return static_cast<int>(readout_->weight.cols());
  if (layers_.empty()) return -1;
  return static_cast<int>(layers_.back().weight.cols());
}

int GcnModel::NumAggregationLayers() const {
  return static_cast<int>(std::count_if(layers_.begin(), layers_.end(),
                                        [](const Layer& l) { return l.aggregate; }));
}

Matrix GcnModel::Forward(const InducedSubgraph& sg) const {
  return ForwardWithCache(sg).output;
}

ForwardCache GcnModel::ForwardWithCache(const InducedSubgraph& sg) const {
  ForwardCache cache;
  cache.graph = &sg;
  if (layers_.empty()) {
    cache.output = sg.features();
    return cache;
  }
  CheckFeatureDim(*this, sg);
  Matrix h = sg.features();
  const size_t num_layers = layers_.size();
  for (size_t l = 0; l < num_layers; ++l) {
    Matrix z = LayerForward(sg, h, layers_[l], aggregation_);
    cache.inputs.push_back(std::move(h));
    h = z;
    const bool last = l + 1 == num_layers;
    if (!last || head_ == Head::kGraph) ApplyRelu(h);
    cache.preactivations.push_back(std::move(z));
  }
  if (head_ == Head::kNode) {
    cache.output = std::move(h);
    return cache;
  }
  const Eigen::Index width = h.cols();
  cache.pooled.resize(1, width);
  cache.pool_argmax.assign(width, 0);
  for (Eigen::Index c = 0; c < width; ++c) {
    Eigen::Index best = 0;
    cache.pooled(0, c) = h.col(c).maxCoeff(&best);
    cache.pool_argmax[c] = static_cast<NodeId>(best);
  }
  cache.inputs.push_back(std::move(h));  // pooled-from embeddings
  cache.output = AffineRows(cache.pooled, *readout_);
  return cache;
}

Vector GcnModel::Backward(const ForwardCache& cache,
                          const Matrix& output_grad) const {
  Vector grad(NumParameters());
  if (layers_.empty()) return grad;
  const InducedSubgraph& sg = *cache.graph;
  if (output_grad.rows() != cache.output.rows() ||
      output_grad.cols() != cache.output.cols()) {
    throw InvalidArgument("output gradient shape does not match forward output");
  }

  // Offsets of every layer's block in the flat parameter vector.
  std::vector<int64_t> offsets;
  int64_t cursor = 0;
  for (const Layer& layer : layers_) {
    offsets.push_back(cursor);
    cursor += layer.weight.size() + layer.bias.size();
  }
  const int64_t readout_offset = cursor;

  auto write_block = [&grad](int64_t offset, const Matrix& dw, const Vector& db) {
    grad.segment(offset, dw.size()) =
        Eigen::Map<const Vector>(dw.data(), dw.size());
    grad.segment(offset + dw.size(), db.size()) = db;
  };

  const size_t num_layers = layers_.size();
  Matrix upstream;  // d loss / d (post-activation output of the current layer)
  if (head_ == Head::kGraph) {
    const Layer& ro = *readout_;
    const Matrix dw = cache.pooled.transpose() * output_grad;
    const Vector db = output_grad.colwise().sum().transpose();
    write_block(readout_offset, dw, db);
    const Matrix dpooled = output_grad * ro.weight.transpose();
    const Matrix& embeddings = cache.inputs.back();
    upstream = Matrix::Zero(embeddings.rows(), embeddings.cols());
    for (Eigen::Index c = 0; c < dpooled.cols(); ++c) {
      upstream(cache.pool_argmax[c], c) += dpooled(0, c);
    }
  } else {
    upstream = output_grad;
  }

  for (size_t idx = num_layers; idx-- > 0;) {
    const Layer& layer = layers_[idx];
    const bool activated = idx + 1 < num_layers || head_ == Head::kGraph;
    Matrix dz = upstream;
    if (activated) {
      dz = dz.cwiseProduct(
          (cache.preactivations[idx].array() > 0.0).cast<double>().matrix());
    }
    const Matrix& h = cache.inputs[idx];
    const Vector db = dz.colwise().sum().transpose();
    if (layer.aggregate) {
      const Matrix g = PropagateTranspose(sg, dz, aggregation_);
      write_block(offsets[idx], h.transpose() * g, db);
      if (idx > 0) upstream = g * layer.weight.transpose();
    } else {
      write_block(offsets[idx], h.transpose() * dz, db);
      if (idx > 0) upstream = dz * layer.weight.transpose();
    }
  }
  return grad;
}

int64_t GcnModel::NumParameters() const {
  int64_t n = 0;
  for (const Layer& layer : layers_) n += layer.weight.size() + layer.bias.size();
  if (readout_) n += readout_->weight.size() + readout_->bias.size();
  return n;
}

Vector GcnModel::GetParameters() const {
  Vector params(NumParameters());
  int64_t cursor = 0;
  auto read = [&](const Layer& layer) {
    params.segment(cursor, layer.weight.size()) =
        Eigen::Map<const Vector>(layer.weight.data(), layer.weight.size());
    cursor += layer.weight.size();
    params.segment(cursor, layer.bias.size()) = layer.bias;
    cursor += layer.bias.size();
  };
  for (const Layer& layer : layers_) read(layer);
  if (readout_) read(*readout_);
  return params;
}

void GcnModel::SetParameters(const Vector& params) {
  if (params.size() != NumParameters()) {
    throw InvalidArgument("parameter vector has the wrong length");
  }
  int64_t cursor = 0;
  auto write = [&](Layer& layer) {
    Eigen::Map<Vector>(layer.weight.data(), layer.weight.size()) =
        params.segment(cursor, layer.weight.size());
    cursor += layer.weight.size();
    layer.bias = params.segment(cursor, layer.bias.size());
    cursor += layer.bias.size();
  };
  for (Layer& layer : layers_) write(layer);
  if (readout_) write(*readout_);
}

PredictionVector Softmax(const Eigen::Ref<const Vector>& logits) {
  PredictionVector out;
  Eigen::Index best = 0;
  const double max_logit = logits.maxCoeff(&best);
  out.probabilities = (logits.array() - max_logit).exp().matrix();
  out.probabilities /= out.probabilities.sum();
  out.predicted_class = static_cast<int>(best);
  return out;
}

std::vector<PredictionVector> Predict(const GcnModel& model,
                                      const InducedSubgraph& sg) {
  const Matrix logits = model.Forward(sg);
  std::vector<PredictionVector> out;
  out.reserve(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    out.push_back(Softmax(logits.row(r).transpose()));
  }
  return out;
}

PredictionVector PredictNode(const GcnModel& model, const InducedSubgraph& sg,
                             NodeId local_target) {
  if (model.head() != Head::kNode) {
    throw InvalidArgument("PredictNode requires a node-classification model");
  }
  if (local_target < 0 || local_target >= sg.num_nodes()) {
    throw InvalidArgument("target node is not part of the subgraph");
  }
  const auto& layers = model.layers();
  if (layers.empty()) return Softmax(sg.features().row(local_target).transpose());
  CheckFeatureDim(model, sg);
  if (model.aggregation() == Aggregation::kSymmetric) {
    return Softmax(model.Forward(sg).row(local_target).transpose());
  }

  // BFS order lists nodes by non-decreasing distance, so every "distance <= r"
  // ball is a prefix of it.
  const int radius = model.NumAggregationLayers();
  std::vector<NodeId> order{local_target};
  std::vector<int> position(sg.num_nodes(), -1);
  std::vector<int> distance(sg.num_nodes(), -1);
  std::vector<size_t> ball_size(radius + 1, 0);
  position[local_target] = 0;
  distance[local_target] = 0;
  for (size_t head = 0; head < order.size(); ++head) {
    const NodeId u = order[head];
    if (distance[u] >= radius) continue;
    for (NodeId w : sg.Neighbors(u)) {
      if (distance[w] < 0) {
        distance[w] = distance[u] + 1;
        position[w] = static_cast<int>(order.size());
        order.push_back(w);
      }
    }
  }
  for (NodeId u : order) ++ball_size[distance[u]];
  for (int r = 1; r <= radius; ++r) ball_size[r] += ball_size[r - 1];

  Matrix h(static_cast<Eigen::Index>(order.size()), sg.features().cols());
  for (size_t p = 0; p < order.size(); ++p) h.row(p) = sg.features().row(order[p]);

  int remaining = radius;
  for (size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.aggregate) --remaining;
    const Eigen::Index rows = static_cast<Eigen::Index>(ball_size[remaining]);
    Matrix z;
    if (layer.aggregate) {
      const Matrix hw = h * layer.weight;
      z.resize(rows, hw.cols());
      for (Eigen::Index p = 0; p < rows; ++p) {
        const NodeId v = order[p];
        Vector acc = hw.row(p).transpose();
        for (NodeId u : sg.Neighbors(v)) acc += hw.row(position[u]).transpose();
        z.row(p) = acc.transpose() * AggregationScale(model.aggregation(), sg.Degree(v));
      }
    } else {
      z = h.topRows(rows) * layer.weight;
    }
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < layers.size()) ApplyRelu(z);
    h = std::move(z);
  }
  return Softmax(h.row(0).transpose());
}

PredictionVector PredictGraph(const GcnModel& model, const InducedSubgraph& sg) {
  if (model.head() != Head::kGraph) {
    throw InvalidArgument("PredictGraph requires a graph-classification model");
  }
  const Matrix logits = model.Forward(sg);
  return Softmax(logits.row(0).transpose());
}

LossFn CrossEntropyLoss(std::vector<NodeId> rows, std::vector<int> labels) {
  if (rows.size() != labels.size()) {
    throw InvalidArgument("cross-entropy: rows and labels differ in length");
  }
  return [rows = std::move(rows), labels = std::move(labels)](const Matrix& out) {
    LossAndGrad result;
    result.grad = Matrix::Zero(out.rows(), out.cols());
    if (rows.empty()) return result;
    const double scale = 1.0 / static_cast<double>(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) {
      const PredictionVector p = Softmax(out.row(rows[k]).transpose());
      result.loss -= std::log(std::max(p.probabilities(labels[k]), 1e-300)) * scale;
      Vector g = p.probabilities;
      g(labels[k]) -= 1.0;
      result.grad.row(rows[k]) += g.transpose() * scale;
    }
    return result;
  };
}

LossFn MseLoss(std::vector<NodeId> rows, Matrix targets) {
  if (static_cast<Eigen::Index>(rows.size()) != targets.rows()) {
    throw InvalidArgument("mse: one target row per listed output row required");
  }
  return [rows = std::move(rows), targets = std::move(targets)](const Matrix& out) {
    LossAndGrad result;
    result.grad = Matrix::Zero(out.rows(), out.cols());
    if (rows.empty()) return result;
    const double scale = 1.0 / static_cast<double>(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) {
      const Vector residual = out.row(rows[k]).transpose() - targets.row(k).transpose();
      result.loss += residual.squaredNorm() * scale;
      result.grad.row(rows[k]) += 2.0 * scale * residual.transpose();
    }
    return result;
  };
}

Vector ComputeGradient(const GcnModel& model, const InducedSubgraph& sg,
                       const LossFn& loss, double* loss_value) {
  const ForwardCache cache = model.ForwardWithCache(sg);
  const LossAndGrad lg = loss(cache.output);
  if (loss_value != nullptr) *loss_value = lg.loss;
  return model.Backward(cache, lg.grad);
}

Vector NumericGradient(const GcnModel& model, const InducedSubgraph& sg,
                       const LossFn& loss, double step) {
  GcnModel probe = model;
  const Vector base = model.GetParameters();
  Vector numeric(base.size());
  Vector params = base;
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    params(k) = base(k) + step;
    probe.SetParameters(params);
    const double plus = loss(probe.Forward(sg)).loss;
    params(k) = base(k) - step;
    probe.SetParameters(params);
    const double minus = loss(probe.Forward(sg)).loss;
    params(k) = base(k);
    numeric(k) = (plus - minus) / (2.0 * step);
  }
  return numeric;
}

double GradientRelativeError(const Vector& analytic, const Vector& numeric) {
  if (analytic.size() != numeric.size()) {
    throw InvalidArgument("gradient vectors differ in length");
  }
  if (analytic.size() == 0) return 0.0;
  const double scale =
      std::max(analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff());
  const double diff = (analytic - numeric).cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return diff / scale;
}

double GradCheck(const GcnModel& model, const InducedSubgraph& sg,
                 const LossFn& loss, double step) {
  return GradientRelativeError(ComputeGradient(model, sg, loss),
                               NumericGradient(model, sg, loss, step));
}

Adam::Adam(int64_t num_params, double learning_rate, double weight_decay,
           double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      first_moment_(Vector::Zero(num_params)),
      second_moment_(Vector::Zero(num_params)) {
  if (learning_rate <= 0.0) throw InvalidArgument("learning rate must be positive");
}

void Adam::Step(Vector& params, const Vector& grad) {
  ++steps_;
  Vector g = grad;
  if (weight_decay_ > 0.0) g += weight_decay_ * params;
  first_moment_ = beta1_ * first_moment_ + (1.0 - beta1_) * g;
  second_moment_ = beta2_ * second_moment_ + (1.0 - beta2_) * g.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  params.array() -= learning_rate_ * (first_moment_.array() / c1) /
                    ((second_moment_.array() / c2).sqrt() + epsilon_);
}

double NodeAccuracy(const GcnModel& model, const Graph& g, const NodeSet& nodes) {
  if (nodes.empty()) return 0.0;
  if (!g.node_labels()) throw DataError("graph has no node labels");
  const InducedSubgraph full(g, NodeSet::Range(g.num_nodes()));
  const auto predictions = Predict(model, full);
  int correct = 0;
  for (NodeId v : nodes) {
    correct += predictions[v].predicted_class == (*g.node_labels())[v];
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

double GraphAccuracy(const GcnModel& model, const std::vector<Graph>& graphs,
                     const NodeSet& indices) {
  if (indices.empty()) return 0.0;
  int correct = 0;
  for (NodeId idx : indices) {
    const Graph& g = graphs.at(idx);
    if (!g.graph_label()) throw DataError("graph has no graph label");
    const InducedSubgraph full(g, NodeSet::Range(g.num_nodes()));
    correct += PredictGraph(model, full).predicted_class == *g.graph_label();
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

namespace {

uint64_t AttemptSeed(uint64_t seed, int attempt) {
  return attempt == 0 ? seed : DeriveSeed(seed, static_cast<uint64_t>(attempt));
}

template <typename Once>
TrainResult WithRestarts(const TrainConfig& config, Once once) {
  if (config.restarts < 1) throw InvalidArgument("restarts must be >= 1");
  TrainResult best = once(AttemptSeed(config.seed, 0));
  int attempt = 1;
  while (attempt < config.restarts && best.accuracy.valid < config.restart_target) {
    TrainResult next = once(AttemptSeed(config.seed, attempt));
    ++attempt;
    if (next.accuracy.valid > best.accuracy.valid) best = std::move(next);
  }
  best.attempts = attempt;
  return best;
}

TrainResult TrainNodeOnce(const Graph& g, const GcnSpec& spec,
                          const TrainConfig& config) {
  if (!g.node_labels()) throw DataError("node classification needs node labels");
  if (!g.masks()) throw DataError("node classification needs split masks");
  if (config.epochs < 1) throw InvalidArgument("epochs must be >= 1");
  const SplitMasks& masks = *g.masks();
  if (masks.train.empty()) throw DataError("empty training split");

  GcnModel model = GcnModel::Initialize(spec, DeriveSeed(config.seed, "init"));
  const InducedSubgraph full(g, NodeSet::Range(g.num_nodes()));
  std::vector<int> labels;
  for (NodeId v : masks.train) labels.push_back((*g.node_labels())[v]);
  const LossFn loss = CrossEntropyLoss(masks.train.ids(), labels);

  Adam adam(model.NumParameters(), config.learning_rate, config.weight_decay);
  Vector params = model.GetParameters();
  double last_loss = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Vector grad = ComputeGradient(model, full, loss, &last_loss);
    if (!grad.allFinite()) throw NumericError("non-finite gradient during training");
    adam.Step(params, grad);
    model.SetParameters(params);
  }
  TrainResult result{model, {}, last_loss};
  result.accuracy.train = NodeAccuracy(model, g, masks.train);
  result.accuracy.valid = NodeAccuracy(model, g, masks.valid);
  result.accuracy.test = NodeAccuracy(model, g, masks.test);
  return result;
}

TrainResult TrainGraphOnce(const std::vector<Graph>& graphs,
                           const SplitMasks& split, const GcnSpec& spec,
                           const TrainConfig& config) {
  if (config.epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (config.batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (split.train.empty()) throw DataError("empty training split");
  for (NodeId idx : split.train) {
    if (idx < 0 || idx >= static_cast<NodeId>(graphs.size())) {
      throw DataError("graph split references a missing graph");
    }
    if (!graphs[idx].graph_label()) throw DataError("graph without a label");
  }

  GcnModel model = GcnModel::Initialize(spec, DeriveSeed(config.seed, "init"));
  Rng rng(DeriveSeed(config.seed, "batches"));
  Adam adam(model.NumParameters(), config.learning_rate, config.weight_decay);
  Vector params = model.GetParameters();
  std::vector<NodeId> order = split.train.ids();
  std::vector<InducedSubgraph> views;
  views.reserve(graphs.size());
  for (const Graph& g : graphs) views.emplace_back(g, NodeSet::Range(g.num_nodes()));

  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(order);
    epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      Vector grad = Vector::Zero(params.size());
      for (size_t k = start; k < stop; ++k) {
        const NodeId idx = order[k];
        double loss_value = 0.0;
        grad += ComputeGradient(model, views[idx],
                                CrossEntropyLoss({0}, {*graphs[idx].graph_label()}),
                                &loss_value);
        epoch_loss += loss_value;
      }
      grad /= static_cast<double>(stop - start);
      if (!grad.allFinite()) throw NumericError("non-finite gradient during training");
      adam.Step(params, grad);
      model.SetParameters(params);
    }
    epoch_loss /= static_cast<double>(order.size());
  }
  TrainResult result{model, {}, epoch_loss};
  result.accuracy.train = GraphAccuracy(model, graphs, split.train);
  result.accuracy.valid = GraphAccuracy(model, graphs, split.valid);
  result.accuracy.test = GraphAccuracy(model, graphs, split.test);
  return result;
}

}  // namespace

TrainResult TrainNodeClassifier(const Graph& g, const GcnSpec& spec,
                                const TrainConfig& config) {
  return WithRestarts(config, [&](uint64_t seed) {
    TrainConfig once = config;
    once.seed = seed;
    return TrainNodeOnce(g, spec, once);
  });
}

TrainResult TrainGraphClassifier(const std::vector<Graph>& graphs,
                                 const SplitMasks& split, const GcnSpec& spec,
                                 const TrainConfig& config) {
  return WithRestarts(config, [&](uint64_t seed) {
    TrainConfig once = config;
    once.seed = seed;
    return TrainGraphOnce(graphs, split, spec, once);
  });
}

GcnSpec TargetSpec(int input_dim, int num_classes, Head head, int num_layers,
                   int hidden) {
  GcnSpec spec;
  spec.input_dim = input_dim;
  spec.head = head;
  for (int l = 0; l < num_layers; ++l) {
    const bool last = l + 1 == num_layers;
    spec.layer_dims.push_back(last && head == Head::kNode ? num_classes : hidden);
  }
  if (head == Head::kGraph) {
    spec.readout_dim = num_classes;
    spec.bias_init = 0.3;
  }
  return spec;
}

TrainConfig TargetTrainDefaults(Head head) {
  TrainConfig config;
  if (head == Head::kNode) {
    config.learning_rate = 0.01;
    config.epochs = 5000;
  } else {
    config.learning_rate = 0.005;
    config.epochs = 300;
    config.restarts = 6;
    config.restart_target = 0.95;
  }
  return config;
}

}  // namespace amortex
