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

#include "amortex/datasets.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "amortex/error.h"
#include "amortex/gcn.h"
#include "amortex/random.h"

namespace amortex {
namespace {

using nlohmann::json;

Matrix Ones(NodeId n) { return Matrix::Ones(n, kSyntheticFeatureDim); }

// Unit constants leave a max-pooled GCN stuck at chance on BA-2Motifs.
constexpr double kMotifFeatureValue = 0.1;

// Edge list under construction with a running node count.
struct Builder {
  NodeId num_nodes = 0;
  std::vector<Edge> edges;

  NodeId AddNodes(NodeId count) {
    const NodeId first = num_nodes;
    num_nodes += count;
    return first;
  }
  void Link(NodeId u, NodeId v) { edges.emplace_back(std::min(u, v), std::max(u, v)); }
};

// House on five fresh nodes: bottom b0 b1, middle m0 m1, roof r. Returns b0.
NodeId AddHouse(Builder& b, std::vector<int>& labels, std::vector<int>& mask,
                int label_offset) {
  const NodeId b0 = b.AddNodes(5);
  const NodeId b1 = b0 + 1, m0 = b0 + 2, m1 = b0 + 3, r = b0 + 4;
  b.Link(b0, b1);
  b.Link(b0, m0);
  b.Link(b1, m1);
  b.Link(m0, m1);
  b.Link(m0, r);
  b.Link(m1, r);
  for (int label : {1, 1, 2, 2, 3}) labels.push_back(label + label_offset);
  mask.insert(mask.end(), 5, 1);
  return b0;
}

// Closed ring on `size` fresh nodes. Returns the first node.
NodeId AddCycle(Builder& b, int size) {
  const NodeId first = b.AddNodes(size);
  for (int k = 0; k < size; ++k) b.Link(first + k, first + (k + 1) % size);
  return first;
}

struct ShapesPart {
  Builder builder;
  std::vector<int> labels;
  std::vector<int> mask;
};

ShapesPart BuildShapes(Rng& rng, int label_offset) {
  constexpr NodeId kBase = 300;
  constexpr int kHouses = 80;
  ShapesPart part;
  part.builder.edges = BaEdges(kBase, 5, rng);
  part.builder.num_nodes = kBase;
  part.labels.assign(kBase, label_offset);
  part.mask.assign(kBase, 0);
  for (int h = 0; h < kHouses; ++h) {
    const NodeId b0 = AddHouse(part.builder, part.labels, part.mask, label_offset);
    part.builder.Link(b0, static_cast<NodeId>(rng.UniformInt(kBase)));
  }
  return part;
}

std::string FieldPath(size_t index, const std::string& field) {
  return "graph[" + std::to_string(index) + "]." + field;
}

json SplitToJson(const SplitMasks& s) {
  return json{{"train", s.train.ids()}, {"valid", s.valid.ids()}, {"test", s.test.ids()}};
}

SplitMasks SplitFromJson(const json& j, const std::string& where) {
  if (!j.is_object()) throw DataError(where + ": expected an object");
  SplitMasks s;
  auto read = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      throw DataError(where + "." + key + ": expected an array of ids");
    }
    std::vector<NodeId> ids;
    for (const json& v : j.at(key)) {
      if (!v.is_number_integer()) throw DataError(where + "." + key + ": non-integer id");
      ids.push_back(v.get<NodeId>());
    }
    return NodeSet::FromUnsorted(std::move(ids));
  };
  s.train = read("train");
  s.valid = read("valid");
  s.test = read("test");
  return s;
}

json GraphToJson(const Graph& g) {
  json j;
  j["num_nodes"] = g.num_nodes();
  json edges = json::array();
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.Neighbors(u)) edges.push_back({u, v});
  }
  j["edges"] = std::move(edges);
  json features = json::array();
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    std::vector<double> row(g.features().row(v).data(),
                            g.features().row(v).data() + g.feature_dim());
    features.push_back(std::move(row));
  }
  j["features"] = std::move(features);
  j["node_labels"] = g.node_labels() ? json(*g.node_labels()) : json(nullptr);
  j["graph_label"] = g.graph_label() ? json(*g.graph_label()) : json(nullptr);
  j["masks"] = g.masks() ? SplitToJson(*g.masks()) : json(nullptr);
  return j;
}

Graph GraphFromJson(const json& j, size_t index) {
  if (!j.is_object()) throw DataError(FieldPath(index, "") + " expected an object");
  auto require = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw DataError(FieldPath(index, key) + ": missing field");
    return j.at(key);
  };
  const json& jn = require("num_nodes");
  if (!jn.is_number_integer() || jn.get<int64_t>() < 0) {
    throw DataError(FieldPath(index, "num_nodes") + ": expected a non-negative integer");
  }
  const NodeId n = jn.get<NodeId>();

  const json& je = require("edges");
  if (!je.is_array()) throw DataError(FieldPath(index, "edges") + ": expected an array");
  std::set<Edge> directed;
  for (size_t k = 0; k < je.size(); ++k) {
    const json& e = je[k];
    const std::string where = FieldPath(index, "edges[" + std::to_string(k) + "]");
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw DataError(where + ": expected [u, v]");
    }
    const NodeId u = e[0].get<NodeId>(), v = e[1].get<NodeId>();
    if (u < 0 || v < 0 || u >= n || v >= n) throw DataError(where + ": endpoint out of range");
    if (u == v) throw DataError(where + ": self-loop");
    if (!directed.emplace(u, v).second) throw DataError(where + ": duplicate edge");
  }
  std::vector<Edge> edges;
  for (const auto& [u, v] : directed) {
    if (!directed.count({v, u})) {
      throw DataError(FieldPath(index, "edges") + ": edge [" + std::to_string(u) + ", " +
                      std::to_string(v) + "] has no reverse entry (asymmetric adjacency)");
    }
    if (u < v) edges.emplace_back(u, v);
  }

  const json& jf = require("features");
  if (!jf.is_array() || static_cast<NodeId>(jf.size()) != n) {
    throw DataError(FieldPath(index, "features") + ": expected one row per node");
  }
  const size_t dim = n > 0 && jf[0].is_array() ? jf[0].size() : 0;
  if (n > 0 && dim == 0) throw DataError(FieldPath(index, "features") + ": empty rows");
  Matrix features(n, static_cast<Eigen::Index>(dim));
  for (NodeId v = 0; v < n; ++v) {
    const json& row = jf[v];
    if (!row.is_array() || row.size() != dim) {
      throw DataError(FieldPath(index, "features[" + std::to_string(v) + "]") +
                      ": expected " + std::to_string(dim) + " values");
    }
    for (size_t c = 0; c < dim; ++c) {
      if (!row[c].is_number()) {
        throw DataError(FieldPath(index, "features[" + std::to_string(v) + "]") +
                        ": non-numeric value");
      }
      features(v, c) = row[c].get<double>();
    }
  }

  std::optional<std::vector<int>> labels;
  if (j.contains("node_labels") && !j.at("node_labels").is_null()) {
    const json& jl = j.at("node_labels");
    if (!jl.is_array()) throw DataError(FieldPath(index, "node_labels") + ": expected an array");
    labels.emplace();
    for (const json& l : jl) {
      if (!l.is_number_integer()) {
        throw DataError(FieldPath(index, "node_labels") + ": non-integer label");
      }
      labels->push_back(l.get<int>());
    }
  }
  std::optional<int> graph_label;
  if (j.contains("graph_label") && !j.at("graph_label").is_null()) {
    if (!j.at("graph_label").is_number_integer()) {
      throw DataError(FieldPath(index, "graph_label") + ": expected an integer");
    }
    graph_label = j.at("graph_label").get<int>();
  }
  std::optional<SplitMasks> masks;
  if (j.contains("masks") && !j.at("masks").is_null()) {
    masks = SplitFromJson(j.at("masks"), FieldPath(index, "masks"));
  }
  try {
    return Graph(n, edges, std::move(features), std::move(labels), graph_label,
                 std::move(masks));
  } catch (const Error& e) {
    throw DataError(FieldPath(index, "") + " " + e.what());
  }
}

GeneratedDataset SingleGraphDataset(std::string name, Graph g, std::vector<int> mask,
                                    int num_classes, uint64_t seed) {
  GeneratedDataset d;
  d.name = std::move(name);
  d.task = TaskKind::kNode;
  d.num_classes = num_classes;
  d.graphs.push_back(std::move(g));
  d.motif_masks.push_back(std::move(mask));
  d.seed = seed;
  return d;
}

}  // namespace

std::vector<Edge> BaEdges(NodeId n, int m, Rng& rng) {
  if (m < 1 || n <= m) throw InvalidArgument("BA graph needs n > m >= 1");
  std::vector<Edge> edges;
  std::vector<NodeId> endpoints;  // each node once per incident edge
  for (NodeId u = 0; u <= m; ++u) {
    for (NodeId v = u + 1; v <= m; ++v) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<NodeId> chosen;
  for (NodeId v = m + 1; v < n; ++v) {
    chosen.clear();
    while (static_cast<int>(chosen.size()) < m) {
      const NodeId u = endpoints[rng.UniformInt(endpoints.size())];
      if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) chosen.push_back(u);
    }
    for (NodeId u : chosen) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  return edges;
}

Graph GenBa(NodeId n, int m, uint64_t seed) {
  Rng rng(DeriveSeed(seed, "ba"));
  return Graph(n, BaEdges(n, m, rng), Ones(n));
}

SplitMasks SeededSplit(NodeId n, uint64_t seed) {
  std::vector<NodeId> ids = NodeSet::Range(n).ids();
  Rng rng(DeriveSeed(seed, "split"));
  rng.Shuffle(ids);
  const size_t n_train = static_cast<size_t>(std::llround(0.8 * n));
  const size_t n_valid = static_cast<size_t>(std::llround(0.1 * n));
  SplitMasks s;
  s.train = NodeSet::FromUnsorted({ids.begin(), ids.begin() + n_train});
  s.valid = NodeSet::FromUnsorted({ids.begin() + n_train, ids.begin() + n_train + n_valid});
  s.test = NodeSet::FromUnsorted({ids.begin() + n_train + n_valid, ids.end()});
  return s;
}

GeneratedDataset GenBaShapes(uint64_t seed) {
  Rng rng(DeriveSeed(seed, "ba-shapes"));
  ShapesPart part = BuildShapes(rng, 0);
  const NodeId n = part.builder.num_nodes;
  Graph g(n, part.builder.edges, Ones(n), part.labels, std::nullopt,
          SeededSplit(n, seed));
  GeneratedDataset d = SingleGraphDataset("ba-shapes", std::move(g), part.mask, 4, seed);
  d.params = {{"base_nodes", 300}, {"base_m", 5}, {"houses", 80}};
  d.notes.push_back("features: constant all-ones, 10 dims");
  d.notes.push_back("labels: base 0, house bottom 1, middle 2, roof 3");
  return d;
}

GeneratedDataset GenBaCommunity(uint64_t seed, int inter_edges) {
  if (inter_edges < 0) throw InvalidArgument("inter_edges must be >= 0");
  Rng rng(DeriveSeed(seed, "ba-community"));
  ShapesPart first = BuildShapes(rng, 0);
  ShapesPart second = BuildShapes(rng, 4);
  const NodeId half = first.builder.num_nodes;
  const NodeId n = 2 * half;
  std::set<Edge> edges(first.builder.edges.begin(), first.builder.edges.end());
  for (const auto& [u, v] : second.builder.edges) edges.emplace(u + half, v + half);
  if (static_cast<int64_t>(inter_edges) > static_cast<int64_t>(half) * half) {
    throw InvalidArgument("more inter-community edges than node pairs");
  }
  int added = 0;
  while (added < inter_edges) {
    const NodeId u = static_cast<NodeId>(rng.UniformInt(half));
    const NodeId v = static_cast<NodeId>(rng.UniformInt(half)) + half;
    added += edges.emplace(u, v).second;
  }
  Matrix features(n, kSyntheticFeatureDim);
  for (NodeId v = 0; v < n; ++v) {
    const double mean = v < half ? 0.0 : 1.0;
    for (int c = 0; c < kSyntheticFeatureDim; ++c) features(v, c) = mean + rng.Normal();
  }
  std::vector<int> labels = first.labels;
  labels.insert(labels.end(), second.labels.begin(), second.labels.end());
  std::vector<int> mask = first.mask;
  mask.insert(mask.end(), second.mask.begin(), second.mask.end());
  Graph g(n, {edges.begin(), edges.end()}, std::move(features), labels, std::nullopt,
          SeededSplit(n, seed));
  GeneratedDataset d = SingleGraphDataset("ba-community", std::move(g), mask, 8, seed);
  d.params = {{"inter_edges", inter_edges}};
  d.notes.push_back("features: N(0, 1) in the first half, N(1, 1) in the second");
  d.notes.push_back("inter_edges default matches the published edge count");
  return d;
}

GeneratedDataset GenTreeCycles(uint64_t seed, int levels, int n_motifs) {
  if (levels < 1 || levels > 20) throw InvalidArgument("levels must be in [1, 20]");
  if (n_motifs < 0) throw InvalidArgument("n_motifs must be >= 0");
  Rng rng(DeriveSeed(seed, "tree-cycles"));
  Builder b;
  const NodeId tree = (NodeId{1} << levels) - 1;
  b.AddNodes(tree);
  for (NodeId v = 1; v < tree; ++v) b.Link((v - 1) / 2, v);
  std::vector<int> labels(tree, 0);
  std::vector<int> mask(tree, 0);
  for (int k = 0; k < n_motifs; ++k) {
    const NodeId first = AddCycle(b, 6);
    labels.insert(labels.end(), 6, 1);
    mask.insert(mask.end(), 6, 1);
    b.Link(first, static_cast<NodeId>(rng.UniformInt(tree)));
  }
  Graph g(b.num_nodes, b.edges, Ones(b.num_nodes), labels, std::nullopt,
          SeededSplit(b.num_nodes, seed));
  GeneratedDataset d = SingleGraphDataset("tree-cycles", std::move(g), mask, 2, seed);
  d.params = {{"levels", levels}, {"n_motifs", n_motifs}};
  d.notes.push_back("features: constant all-ones, 10 dims");
  d.notes.push_back(
      "published node count 871 is not 255 + 6k; n_motifs = 102 gives 867 nodes");
  return d;
}

GeneratedDataset GenBa2Motifs(uint64_t seed, int n_graphs) {
  if (n_graphs < 2) throw InvalidArgument("n_graphs must be >= 2");
  Rng rng(DeriveSeed(seed, "ba-2motifs"));
  GeneratedDataset d;
  d.name = "ba-2motifs";
  d.task = TaskKind::kGraph;
  d.num_classes = 2;
  d.seed = seed;
  constexpr NodeId kBase = 20;
  for (int k = 0; k < n_graphs; ++k) {
    const int label = k % 2;
    Builder b;
    b.edges = BaEdges(kBase, 1, rng);
    b.num_nodes = kBase;
    std::vector<int> mask(kBase, 0);
    NodeId anchor;
    if (label == 0) {
      std::vector<int> unused;
      anchor = AddHouse(b, unused, mask, 0);
    } else {
      anchor = AddCycle(b, 5);
      mask.insert(mask.end(), 5, 1);
    }
    b.Link(anchor, static_cast<NodeId>(rng.UniformInt(kBase)));
    d.graphs.emplace_back(b.num_nodes, b.edges, kMotifFeatureValue * Ones(b.num_nodes),
                          std::nullopt, label);
    d.motif_masks.push_back(std::move(mask));
  }
  d.graph_split = SeededSplit(n_graphs, seed);
  d.params = {{"n_graphs", n_graphs}, {"base_nodes", kBase}, {"base_m", 1}};
  d.notes.push_back("features: constant 0.1, 10 dims");
  d.notes.push_back("label 0: house motif, label 1: pentagon motif");
  return d;
}

GeneratedDataset GenBigBa(NodeId n, int m, uint64_t seed, int num_classes) {
  if (num_classes < 2) throw InvalidArgument("num_classes must be >= 2");
  Rng rng(DeriveSeed(seed, "big-ba"));
  std::vector<Edge> edges = BaEdges(n, m, rng);
  Matrix features(n, kSyntheticFeatureDim);
  for (NodeId v = 0; v < n; ++v) {
    for (int c = 0; c < kSyntheticFeatureDim; ++c) features(v, c) = rng.Normal();
  }
  Graph unlabeled(n, edges, features);
  GcnSpec spec;
  spec.input_dim = kSyntheticFeatureDim;
  spec.layer_dims = {16, num_classes};
  const GcnModel teacher = GcnModel::Initialize(spec, DeriveSeed(seed, "teacher"));
  const Matrix logits =
      teacher.Forward(InducedSubgraph(unlabeled, NodeSet::Range(n)));
  std::vector<int> labels(n);
  for (NodeId v = 0; v < n; ++v) {
    Eigen::Index best = 0;
    logits.row(v).maxCoeff(&best);
    labels[v] = static_cast<int>(best);
  }
  Graph g(n, edges, std::move(features), labels, std::nullopt, SeededSplit(n, seed));
  GeneratedDataset d = SingleGraphDataset("big-ba", std::move(g),
                                          std::vector<int>(n, 0), num_classes, seed);
  d.params = {{"n", n}, {"m", m}, {"classes", num_classes}};
  d.notes.push_back("features: N(0, 1); labels: argmax of a random 2-layer GCN teacher");
  d.notes.push_back("no motifs; the mask is all zeros");
  return d;
}

std::vector<std::string> DatasetNames() {
  return {"ba", "ba-shapes", "ba-community", "tree-cycles", "ba-2motifs", "big-ba"};
}

GeneratedDataset Generate(const std::string& name, uint64_t seed,
                          const std::map<std::string, double>& params) {
  std::set<std::string> allowed;
  if (name == "ba") allowed = {"n", "m"};
  else if (name == "ba-community") allowed = {"inter_edges"};
  else if (name == "tree-cycles") allowed = {"levels", "n_motifs"};
  else if (name == "ba-2motifs") allowed = {"n_graphs"};
  else if (name == "big-ba") allowed = {"n", "m", "classes"};
  else if (name != "ba-shapes") {
    throw InvalidArgument("unknown dataset '" + name +
                          "' (expected ba, ba-shapes, ba-community, tree-cycles, "
                          "ba-2motifs or big-ba)");
  }
  for (const auto& [key, value] : params) {
    if (!allowed.count(key)) {
      throw InvalidArgument("dataset " + name + " takes no parameter '" + key + "'");
    }
  }
  auto get = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto as_int = [&](const std::string& key, double fallback) {
    const double v = get(key, fallback);
    if (v != std::floor(v)) throw InvalidArgument("parameter " + key + " must be an integer");
    return static_cast<int>(v);
  };
  if (name == "ba") {
    const NodeId n = as_int("n", 300);
    const int m = as_int("m", 5);
    Graph g = GenBa(n, m, seed);
    GeneratedDataset d = SingleGraphDataset("ba", std::move(g), std::vector<int>(n, 0), 0, seed);
    d.params = {{"n", n}, {"m", m}};
    return d;
  }
  if (name == "ba-shapes") return GenBaShapes(seed);
  if (name == "ba-community") return GenBaCommunity(seed, as_int("inter_edges", 370));
  if (name == "tree-cycles") {
    return GenTreeCycles(seed, as_int("levels", 8), as_int("n_motifs", 102));
  }
  if (name == "ba-2motifs") return GenBa2Motifs(seed, as_int("n_graphs", 1000));
  return GenBigBa(as_int("n", 100000), as_int("m", 3), seed, as_int("classes", 4));
}

std::string GraphsToJson(const std::vector<Graph>& graphs, bool as_array) {
  if (!as_array) {
    if (graphs.size() != 1) throw InvalidArgument("single-graph output needs one graph");
    return GraphToJson(graphs.front()).dump() + "\n";
  }
  json all = json::array();
  for (const Graph& g : graphs) all.push_back(GraphToJson(g));
  return all.dump() + "\n";
}

std::vector<Graph> GraphsFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed graph JSON: ") + e.what());
  }
  std::vector<Graph> graphs;
  if (j.is_array()) {
    for (size_t k = 0; k < j.size(); ++k) graphs.push_back(GraphFromJson(j[k], k));
  } else {
    graphs.push_back(GraphFromJson(j, 0));
  }
  return graphs;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

void SaveGraphs(const std::string& path, const std::vector<Graph>& graphs,
                bool as_array) {
  WriteTextFile(path, GraphsToJson(graphs, as_array));
}

std::vector<Graph> LoadGraphs(const std::string& path) {
  return GraphsFromJson(ReadTextFile(path));
}

std::string MetadataToJson(const GeneratedDataset& d) {
  json j;
  j["generator"] = d.name;
  j["task"] = ToString(d.task);
  j["num_classes"] = d.num_classes;
  j["seed"] = d.seed;
  j["params"] = d.params;
  j["notes"] = d.notes;
  j["motif_mask"] = d.motif_masks;
  j["graph_split"] = d.graph_split ? SplitToJson(*d.graph_split) : json(nullptr);
  return j.dump(1) + "\n";
}

DatasetMetadata MetadataFromJson(const std::string& text) {
  DatasetMetadata m;
  try {
    const json j = json::parse(text);
    m.name = j.at("generator").get<std::string>();
    m.task = ParseTaskKind(j.at("task").get<std::string>());
    m.num_classes = j.at("num_classes").get<int>();
    m.motif_masks = j.at("motif_mask").get<std::vector<std::vector<int>>>();
    if (!j.at("graph_split").is_null()) {
      m.graph_split = SplitFromJson(j.at("graph_split"), "graph_split");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed dataset metadata: ") + e.what());
  }
  return m;
}

DatasetMetadata LoadMetadata(const std::string& path) {
  return MetadataFromJson(ReadTextFile(path));
}

std::string MetadataPathFor(const std::string& graph_path) {
  const std::string suffix = ".json";
  std::string stem = graph_path;
  if (stem.size() >= suffix.size() &&
      stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
    stem.resize(stem.size() - suffix.size());
  }
  return stem + ".meta.json";
}

std::string SaveDataset(const std::string& path, const GeneratedDataset& dataset) {
  SaveGraphs(path, dataset.graphs, dataset.task == TaskKind::kGraph);
  const std::string meta = MetadataPathFor(path);
  WriteTextFile(meta, MetadataToJson(dataset));
  return meta;
}

}  // namespace amortex
