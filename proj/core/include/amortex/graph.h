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

// Immutable attributed graphs, node sets, and node-induced subgraphs.
//
// Graphs are undirected and simple. Node removal everywhere in this library
// means node-induced deletion: a removed node disappears together with all of
// its incident edges.

#ifndef AMORTEX_GRAPH_H_
#define AMORTEX_GRAPH_H_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amortex/random.h"

namespace amortex {

using NodeId = int32_t;
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Sorted, duplicate-free list of node ids.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(std::initializer_list<NodeId> ids);

  static NodeSet FromUnsorted(std::vector<NodeId> ids);
  // {0, 1, ..., n - 1}.
  static NodeSet Range(NodeId n);

  size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  NodeId operator[](size_t i) const { return ids_[i]; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<NodeId>& ids() const { return ids_; }

  bool Contains(NodeId v) const;
  // Position of `v` in the sorted list, or -1.
  int64_t IndexOf(NodeId v) const;
  bool IsSubsetOf(const NodeSet& other) const;

  NodeSet Union(const NodeSet& other) const;
  NodeSet Difference(const NodeSet& other) const;
  NodeSet Intersection(const NodeSet& other) const;
  NodeSet With(NodeId v) const;
  NodeSet Without(NodeId v) const;

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<NodeId> ids_;
};

// Train / validation / test membership. Holds node ids for node-level tasks
// and graph indices for graph-level datasets.
struct SplitMasks {
  NodeSet train;
  NodeSet valid;
  NodeSet test;
};

using Edge = std::pair<NodeId, NodeId>;

class Graph {
 public:
  // `edges` are unordered pairs; each undirected edge must appear once.
  // Throws Error(kData) when an invariant does not hold.
  Graph(NodeId num_nodes, const std::vector<Edge>& edges, Matrix features,
        std::optional<std::vector<int>> node_labels = std::nullopt,
        std::optional<int> graph_label = std::nullopt,
        std::optional<SplitMasks> masks = std::nullopt);

  NodeId num_nodes() const { return num_nodes_; }
  // Number of undirected edges.
  int64_t num_edges() const {
    return static_cast<int64_t>(adjacency_.size()) / 2;
  }
  int feature_dim() const { return static_cast<int>(features_.cols()); }

  std::span<const NodeId> Neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v],
            adjacency_.data() + offsets_[v + 1]};
  }
  int Degree(NodeId v) const {
    return static_cast<int>(offsets_[v + 1] - offsets_[v]);
  }
  bool HasEdge(NodeId u, NodeId v) const;
  bool IsValid(NodeId v) const { return v >= 0 && v < num_nodes_; }

  const Matrix& features() const { return features_; }
  const std::optional<std::vector<int>>& node_labels() const {
    return node_labels_;
  }
  std::optional<int> graph_label() const { return graph_label_; }
  const std::optional<SplitMasks>& masks() const { return masks_; }

  // Edges as (u, v) with u < v, sorted lexicographically.
  std::vector<Edge> Edges() const;

 private:
  NodeId num_nodes_;
  std::vector<int64_t> offsets_;
  std::vector<NodeId> adjacency_;
  Matrix features_;
  std::optional<std::vector<int>> node_labels_;
  std::optional<int> graph_label_;
  std::optional<SplitMasks> masks_;
};

// Node-induced subgraph with a local id space [0, kept.size()). Local id `k`
// corresponds to parent node `kept[k]`. Holds a pointer to the parent, which
// must outlive the subgraph.
class InducedSubgraph {
 public:
  InducedSubgraph(const Graph& parent, NodeSet kept);

  const Graph& parent() const { return *parent_; }
  const NodeSet& kept() const { return kept_; }
  NodeId num_nodes() const { return static_cast<NodeId>(kept_.size()); }
  int64_t num_edges() const {
    return static_cast<int64_t>(adjacency_.size()) / 2;
  }

  NodeId ParentId(NodeId local) const { return kept_[local]; }
  // Local id of a parent node, or -1 when the node was not kept.
  NodeId LocalId(NodeId parent_id) const {
    if (whole_) {
      return parent_id >= 0 && parent_id < num_nodes() ? parent_id : -1;
    }
    return static_cast<NodeId>(kept_.IndexOf(parent_id));
  }

  std::span<const NodeId> Neighbors(NodeId local) const {
    return {adjacency_.data() + offsets_[local],
            adjacency_.data() + offsets_[local + 1]};
  }
  int Degree(NodeId local) const {
    return static_cast<int>(offsets_[local + 1] - offsets_[local]);
  }
  const Matrix& features() const { return features_; }

  // Standalone copy with local ids. Node labels are carried over; split
  // masks are dropped.
  Graph ToGraph() const;

 private:
  const Graph* parent_;
  NodeSet kept_;
  // Every parent node is kept, so local and parent ids coincide.
  bool whole_ = false;
  std::vector<int64_t> offsets_;
  std::vector<NodeId> adjacency_;
  Matrix features_;
};

// All nodes at shortest-path distance <= k from v, v included.
NodeSet KhopNeighbors(const Graph& g, NodeId v, int k);

// Union of the k-hop balls around every source.
NodeSet KhopUnion(const Graph& g, const NodeSet& sources, int k);

// Shortest-path hop distance from `v` to every node; -1 when unreachable or
// farther than `max_depth`.
std::vector<int> HopDistances(const Graph& g, NodeId v, int max_depth);

// G_keep. Throws on an empty or invalid keep set.
InducedSubgraph Induce(const Graph& g, NodeSet keep);

// G_{(scope \ removed) U forced}. `removed` and `forced` must lie in scope.
InducedSubgraph RemoveNodes(const Graph& g, const NodeSet& scope,
                            const NodeSet& removed, const NodeSet& forced);

// Uniform draw over the subsets of `pool` that contain `anchor`: every other
// member is kept independently with probability 1/2.
NodeSet SampleSubsetWithAnchor(Rng& rng, const NodeSet& pool, NodeId anchor);

}  // namespace amortex

#endif  // AMORTEX_GRAPH_H_
