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

#include "amortex/attribution.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "amortex/error.h"

namespace amortex {
namespace {

NodeSet MaskToSet(const NodeSet& pool, uint64_t mask) {
  std::vector<NodeId> ids;
  for (size_t b = 0; b < pool.size(); ++b) {
    if (mask >> b & 1ULL) ids.push_back(pool[b]);
  }
  return NodeSet::FromUnsorted(std::move(ids));
}

void CheckCap(size_t size, int cap) {
  if (static_cast<int64_t>(size) > cap) {
    throw InvalidArgument("neighbourhood of " + std::to_string(size) +
                          " nodes exceeds the enumeration cap of " +
                          std::to_string(cap));
  }
}

// Splits `pool` by independent fair coins.
void RandomSplit(const NodeSet& pool, Rng& rng, std::vector<bool>* in_first,
                 NodeSet* first, NodeSet* second) {
  std::vector<NodeId> a, b;
  in_first->assign(pool.size(), false);
  for (size_t k = 0; k < pool.size(); ++k) {
    if (rng.Coin()) {
      (*in_first)[k] = true;
      a.push_back(pool[k]);
    } else {
      b.push_back(pool[k]);
    }
  }
  *first = NodeSet::FromUnsorted(std::move(a));
  *second = NodeSet::FromUnsorted(std::move(b));
}

double MiIntegrand(const Vector& reference, const Vector& perturbed) {
  double total = 0.0;
  for (Eigen::Index y = 0; y < reference.size(); ++y) {
    const double p = std::clamp(reference(y), kProbabilityFloor, 1.0);
    const double q = std::clamp(perturbed(y), kProbabilityFloor, 1.0);
    total -= reference(y) * (std::log(p) - std::log(q));
  }
  return total;
}

}  // namespace

NodeOracle::NodeOracle(const GcnModel& model, const Graph& g, NodeId target,
                       int max_hop)
    : model_(&model),
      graph_(&g),
      target_(target),
      neighborhood_(KhopNeighbors(g, target, max_hop)) {
  if (model.head() != Head::kNode) {
    throw InvalidArgument("node oracle requires a node-classification model");
  }
  const InducedSubgraph sg(g, neighborhood_);
  full_ = PredictNode(model, sg, sg.LocalId(target));
}

PredictionVector NodeOracle::Distribution(const NodeSet& kept) const {
  if (!kept.IsSubsetOf(neighborhood_)) {
    throw InvalidArgument("subset leaves the neighbourhood of node " +
                          std::to_string(target_));
  }
  const InducedSubgraph sg(*graph_, kept.With(target_));
  return PredictNode(*model_, sg, sg.LocalId(target_));
}

double NodeOracle::Evaluate(const NodeSet& kept) const {
  return Distribution(kept).probabilities(full_.predicted_class);
}

GraphOracle::GraphOracle(const GcnModel& model, const Graph& g)
    : model_(&model), graph_(&g), nodes_(NodeSet::Range(g.num_nodes())) {
  if (model.head() != Head::kGraph) {
    throw InvalidArgument("graph oracle requires a graph-classification model");
  }
  if (g.num_nodes() == 0) throw InvalidArgument("graph oracle on an empty graph");
  full_ = PredictGraph(model, InducedSubgraph(g, nodes_));
}

PredictionVector GraphOracle::Distribution(const NodeSet& kept) const {
  if (kept.empty()) {
    PredictionVector uniform;
    uniform.probabilities = Vector::Constant(num_classes(), 1.0 / num_classes());
    return uniform;
  }
  if (!kept.IsSubsetOf(nodes_)) throw InvalidArgument("subset leaves the graph");
  return PredictGraph(*model_, InducedSubgraph(*graph_, kept));
}

double GraphOracle::Evaluate(const NodeSet& kept) const {
  return Distribution(kept).probabilities(full_.predicted_class);
}

double SubsetDelta(const NodeOracle& oracle, const NodeSet& subset) {
  const NodeSet& n = oracle.neighborhood();
  if (!subset.IsSubsetOf(n)) {
    throw InvalidArgument("subset is not within the K-hop neighbourhood");
  }
  return oracle.Evaluate(subset) - oracle.Evaluate(n.Difference(subset));
}

double FidelityPlus(const NodeOracle& oracle, const NodeSet& removed) {
  const NodeSet& n = oracle.neighborhood();
  if (!removed.IsSubsetOf(n)) {
    throw InvalidArgument("removed set is not within the K-hop neighbourhood");
  }
  return oracle.full_value() - oracle.Evaluate(n.Difference(removed));
}

double FidelityMinus(const NodeOracle& oracle, const NodeSet& kept) {
  if (!kept.IsSubsetOf(oracle.neighborhood())) {
    throw InvalidArgument("kept set is not within the K-hop neighbourhood");
  }
  return oracle.full_value() - oracle.Evaluate(kept);
}

double DeltaFidelity(const NodeOracle& oracle, const NodeSet& subset) {
  return FidelityPlus(oracle, subset) - FidelityMinus(oracle, subset);
}

double ExactAttribution(const NodeOracle& oracle, NodeId source, int cap) {
  const NodeSet& n = oracle.neighborhood();
  CheckCap(n.size(), cap);
  if (!n.Contains(source)) {
    throw InvalidArgument("source " + std::to_string(source) +
                          " is outside the neighbourhood");
  }
  if (source == oracle.target()) return 0.0;
  const NodeSet others = oracle.sources().Without(source);
  const uint64_t count = 1ULL << others.size();
  double total = 0.0;
  for (uint64_t mask = 0; mask < count; ++mask) {
    total += SubsetDelta(oracle, MaskToSet(others, mask).With(source));
  }
  return total / static_cast<double>(count);
}

std::vector<double> ExactAttributionAll(const NodeOracle& oracle, int cap) {
  CheckCap(oracle.neighborhood().size(), cap);
  const NodeSet sources = oracle.sources();
  const size_t m = sources.size();
  const uint64_t count = 1ULL << m;
  const uint64_t full = count - 1;
  std::vector<double> value(count);
  for (uint64_t mask = 0; mask < count; ++mask) {
    value[mask] = oracle.Evaluate(MaskToSet(sources, mask));
  }
  std::vector<double> phi(m, 0.0);
  for (size_t j = 0; j < m; ++j) {
    const uint64_t bit = 1ULL << j;
    double total = 0.0;
    for (uint64_t mask = 0; mask < count; ++mask) {
      if (mask & bit) total += value[mask] - value[full ^ mask];
    }
    phi[j] = total / static_cast<double>(count >> 1);
  }
  return phi;
}

double ExactAttributionGraph(const GraphOracle& oracle, NodeId source, int cap) {
  const NodeSet& nodes = oracle.nodes();
  CheckCap(nodes.size(), cap);
  if (!nodes.Contains(source)) throw InvalidArgument("source is not in the graph");
  const NodeSet others = nodes.Without(source);
  const uint64_t count = 1ULL << others.size();
  double total = 0.0;
  for (uint64_t mask = 0; mask < count; ++mask) {
    const NodeSet s = MaskToSet(others, mask).With(source);
    total += oracle.Evaluate(s) - oracle.Evaluate(nodes.Difference(s));
  }
  return total / static_cast<double>(count);
}

std::vector<double> ExactAttributionGraphAll(const GraphOracle& oracle, int cap) {
  const NodeSet& nodes = oracle.nodes();
  CheckCap(nodes.size(), cap);
  const size_t m = nodes.size();
  const uint64_t count = 1ULL << m;
  const uint64_t full = count - 1;
  std::vector<double> value(count);
  for (uint64_t mask = 0; mask < count; ++mask) {
    value[mask] = oracle.Evaluate(MaskToSet(nodes, mask));
  }
  std::vector<double> phi(m, 0.0);
  for (size_t j = 0; j < m; ++j) {
    const uint64_t bit = 1ULL << j;
    double total = 0.0;
    for (uint64_t mask = 0; mask < count; ++mask) {
      if (mask & bit) total += value[mask] - value[full ^ mask];
    }
    phi[j] = total / static_cast<double>(count >> 1);
  }
  return phi;
}

AttributionEstimate McUpdate(const AttributionEstimate& estimate,
                             const DeltaSample& sample) {
  AttributionEstimate next = estimate;
  next.samples_seen = estimate.samples_seen + 1;
  const double t = static_cast<double>(next.samples_seen);
  next.value = (1.0 - 1.0 / t) * estimate.value + sample.delta / t;
  return next;
}

DeltaSample SampleDelta(const NodeOracle& oracle, NodeId source, Rng& rng) {
  DeltaSample sample;
  sample.subset =
      SampleSubsetWithAnchor(rng, oracle.neighborhood(), source).With(oracle.target());
  sample.delta = SubsetDelta(oracle, sample.subset);
  return sample;
}

std::vector<double> PartitionDeltas(const NodeOracle& oracle, Rng& rng) {
  const NodeSet sources = oracle.sources();
  std::vector<bool> in_first;
  NodeSet first, second;
  RandomSplit(sources, rng, &in_first, &first, &second);
  const double delta = oracle.Evaluate(first) - oracle.Evaluate(second);
  std::vector<double> out(sources.size());
  for (size_t k = 0; k < sources.size(); ++k) out[k] = in_first[k] ? delta : -delta;
  return out;
}

std::vector<double> GraphPartitionDeltas(const GraphOracle& oracle, Rng& rng) {
  std::vector<bool> in_first;
  NodeSet first, second;
  RandomSplit(oracle.nodes(), rng, &in_first, &first, &second);
  const double delta = oracle.Evaluate(first) - oracle.Evaluate(second);
  std::vector<double> out(oracle.nodes().size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = in_first[k] ? delta : -delta;
  return out;
}

double MiValue(const NodeOracle& oracle, const NodeSet& subset) {
  if (subset.empty()) throw InvalidArgument("MI value of an empty set");
  const Vector& reference = oracle.full_prediction().probabilities;
  const Vector perturbed = oracle.Distribution(subset).probabilities;
  double total = 0.0;
  for (Eigen::Index y = 0; y < reference.size(); ++y) {
    total -= reference(y) * std::log(std::clamp(perturbed(y), kProbabilityFloor, 1.0));
  }
  return total;
}

double MiSample(const NodeOracle& oracle, NodeId source, Rng& rng) {
  const NodeSet subset = SampleSubsetWithAnchor(rng, oracle.neighborhood(), source);
  return MiIntegrand(oracle.full_prediction().probabilities,
                     oracle.Distribution(subset).probabilities);
}

std::vector<double> PartitionMiSamples(const NodeOracle& oracle, Rng& rng) {
  const NodeSet sources = oracle.sources();
  std::vector<bool> in_first;
  NodeSet first, second;
  RandomSplit(sources, rng, &in_first, &first, &second);
  const Vector& reference = oracle.full_prediction().probabilities;
  const double a = MiIntegrand(reference, oracle.Distribution(first).probabilities);
  const double b = MiIntegrand(reference, oracle.Distribution(second).probabilities);
  std::vector<double> out(sources.size());
  for (size_t k = 0; k < sources.size(); ++k) out[k] = in_first[k] ? a : b;
  return out;
}

std::vector<double> GraphPartitionMiSamples(const GraphOracle& oracle, Rng& rng) {
  std::vector<bool> in_first;
  NodeSet first, second;
  RandomSplit(oracle.nodes(), rng, &in_first, &first, &second);
  const Vector& reference = oracle.full_prediction().probabilities;
  const double a = MiIntegrand(reference, oracle.Distribution(first).probabilities);
  const double b = MiIntegrand(reference, oracle.Distribution(second).probabilities);
  std::vector<double> out(oracle.nodes().size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = in_first[k] ? a : b;
  return out;
}

double RemovalScore(const NodeOracle& oracle, const NodeSet& subset) {
  if (subset.empty()) throw InvalidArgument("removal score of an empty set");
  const NodeSet& n = oracle.neighborhood();
  if (!subset.IsSubsetOf(n)) {
    throw InvalidArgument("subset is not within the K-hop neighbourhood");
  }
  double total = 0.0;
  for (NodeId j : subset) {
    total += oracle.Evaluate(NodeSet{j}) - oracle.Evaluate(n.Without(j));
  }
  return total / static_cast<double>(subset.size());
}

void WriteAttributionJsonl(std::ostream& out,
                           const std::vector<AttributionRecord>& records) {
  for (const AttributionRecord& r : records) {
    nlohmann::json line = {{"target", r.target}, {"source", r.source},
                           {"phi", r.phi},       {"method", r.method},
                           {"samples", r.samples}};
    out << line.dump() << '\n';
  }
}

std::vector<AttributionRecord> ReadAttributionJsonl(std::istream& in) {
  std::vector<AttributionRecord> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      AttributionRecord r;
      r.target = j.at("target").get<int64_t>();
      r.source = j.at("source").get<NodeId>();
      r.phi = j.at("phi").get<double>();
      r.method = j.at("method").get<std::string>();
      r.samples = j.at("samples").get<int64_t>();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("attribution line " + std::to_string(line_number) + ": " +
                      e.what());
    }
  }
  return records;
}

}  // namespace amortex
