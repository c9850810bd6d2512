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

#include "amortex/graph.h"

#include <algorithm>
#include <iterator>
#include <string>

#include "amortex/error.h"

namespace amortex {

NodeSet::NodeSet(std::initializer_list<NodeId> ids)
    : NodeSet(FromUnsorted(std::vector<NodeId>(ids))) {}

NodeSet NodeSet::FromUnsorted(std::vector<NodeId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  NodeSet result;
  result.ids_ = std::move(ids);
  return result;
}

NodeSet NodeSet::Range(NodeId n) {
  NodeSet result;
  result.ids_.resize(std::max<NodeId>(n, 0));
  for (NodeId i = 0; i < n; ++i) result.ids_[i] = i;
  return result;
}

bool NodeSet::Contains(NodeId v) const {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

int64_t NodeSet::IndexOf(NodeId v) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
  if (it == ids_.end() || *it != v) return -1;
  return it - ids_.begin();
}

bool NodeSet::IsSubsetOf(const NodeSet& other) const {
  return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(),
                       ids_.end());
}

NodeSet NodeSet::Union(const NodeSet& other) const {
  NodeSet result;
  result.ids_.reserve(ids_.size() + other.ids_.size());
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                 other.ids_.end(), std::back_inserter(result.ids_));
  return result;
}

NodeSet NodeSet::Difference(const NodeSet& other) const {
  NodeSet result;
  result.ids_.reserve(ids_.size());
  std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(),
                      other.ids_.end(), std::back_inserter(result.ids_));
  return result;
}

NodeSet NodeSet::Intersection(const NodeSet& other) const {
  NodeSet result;
  std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(),
                        other.ids_.end(), std::back_inserter(result.ids_));
  return result;
}

NodeSet NodeSet::With(NodeId v) const {
  NodeSet result = *this;
  const auto it = std::lower_bound(result.ids_.begin(), result.ids_.end(), v);
  if (it == result.ids_.end() || *it != v) result.ids_.insert(it, v);
  return result;
}

NodeSet NodeSet::Without(NodeId v) const {
  NodeSet result = *this;
  const auto it = std::lower_bound(result.ids_.begin(), result.ids_.end(), v);
  if (it != result.ids_.end() && *it == v) result.ids_.erase(it);
  return result;
}

Graph::Graph(NodeId num_nodes, const std::vector<Edge>& edges, Matrix features,
             std::optional<std::vector<int>> node_labels,
             std::optional<int> graph_label, std::optional<SplitMasks> masks)
    : num_nodes_(num_nodes),
      features_(std::move(features)),
      node_labels_(std::move(node_labels)),
      graph_label_(graph_label),
      masks_(std::move(masks)) {
  if (num_nodes_ < 0) throw DataError("negative node count");
  if (features_.rows() != num_nodes_) {
    throw DataError("feature rows (" + std::to_string(features_.rows()) +
                    ") != num_nodes (" + std::to_string(num_nodes_) + ")");
  }
  if (num_nodes_ > 0 && features_.cols() == 0) {
    throw DataError("feature dimension must be positive");
  }
  if (!features_.allFinite()) throw DataError("non-finite node features");
  if (node_labels_ && static_cast<NodeId>(node_labels_->size()) != num_nodes_) {
    throw DataError("node_labels length != num_nodes");
  }

  std::vector<int64_t> degree(num_nodes_ + 1, 0);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_) {
      throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") has an endpoint outside [0, " +
                      std::to_string(num_nodes_) + ")");
    }
    if (u == v) {
      throw DataError("self-loop on node " + std::to_string(u));
    }
    ++degree[u];
    ++degree[v];
  }
  offsets_.assign(num_nodes_ + 1, 0);
  for (NodeId v = 0; v < num_nodes_; ++v) {
    offsets_[v + 1] = offsets_[v] + degree[v];
  }
  adjacency_.resize(offsets_[num_nodes_]);
  std::vector<int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    adjacency_[cursor[u]++] = v;
    adjacency_[cursor[v]++] = u;
  }
  for (NodeId v = 0; v < num_nodes_; ++v) {
    auto first = adjacency_.begin() + offsets_[v];
    auto last = adjacency_.begin() + offsets_[v + 1];
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw DataError("duplicate edge at node " + std::to_string(v));
    }
  }

  if (masks_) {
    for (const NodeSet* part : {&masks_->train, &masks_->valid, &masks_->test}) {
      for (NodeId v : *part) {
        if (!IsValid(v)) throw DataError("split mask references invalid node");
      }
    }
  }
}

bool Graph::HasEdge(NodeId u, NodeId v) const {
  if (!IsValid(u) || !IsValid(v)) return false;
  const auto nbrs = Neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<Edge> Graph::Edges() const {
  std::vector<Edge> edges;
  edges.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes_; ++u) {
    for (NodeId v : Neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return edges;
}

InducedSubgraph::InducedSubgraph(const Graph& parent, NodeSet kept)
    : parent_(&parent), kept_(std::move(kept)) {
  if (kept_.empty()) throw InvalidArgument("cannot induce on an empty node set");
  for (NodeId v : kept_) {
    if (!parent.IsValid(v)) {
      throw InvalidArgument("induce: invalid node id " + std::to_string(v));
    }
  }
  const NodeId n = num_nodes();
  offsets_.assign(n + 1, 0);
  adjacency_.reserve(static_cast<size_t>(n) * 4);
  whole_ = n == parent.num_nodes();
  const bool whole = whole_;
  for (NodeId local = 0; local < n; ++local) {
    for (NodeId nbr : parent.Neighbors(kept_[local])) {
      const NodeId nbr_local = whole ? nbr : LocalId(nbr);
      if (nbr_local >= 0) adjacency_.push_back(nbr_local);
    }
    offsets_[local + 1] = static_cast<int64_t>(adjacency_.size());
  }
  features_.resize(n, parent.feature_dim());
  for (NodeId local = 0; local < n; ++local) {
    features_.row(local) = parent.features().row(kept_[local]);
  }
}

Graph InducedSubgraph::ToGraph() const {
  std::vector<Edge> edges;
  edges.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : Neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  std::optional<std::vector<int>> labels;
  if (parent_->node_labels()) {
    labels.emplace(num_nodes());
    for (NodeId u = 0; u < num_nodes(); ++u) {
      (*labels)[u] = (*parent_->node_labels())[kept_[u]];
    }
  }
  return Graph(num_nodes(), edges, features_, std::move(labels),
               parent_->graph_label());
}

namespace {

void CheckNode(const Graph& g, NodeId v) {
  if (!g.IsValid(v)) {
    throw InvalidArgument("invalid node id " + std::to_string(v));
  }
}

// Multi-source BFS truncated at depth k. Returns visited nodes in BFS order.
std::vector<NodeId> Bfs(const Graph& g, const NodeSet& sources, int k,
                        std::vector<int>* depth_out) {
  // Reused across calls so a small ball costs O(ball), not O(num_nodes).
  // Every entry is -1 between calls.
  thread_local std::vector<int> depth;
  if (depth.size() < static_cast<size_t>(g.num_nodes())) {
    depth.resize(g.num_nodes(), -1);
  }
  std::vector<NodeId> order;
  for (NodeId s : sources) {
    CheckNode(g, s);
    depth[s] = 0;
    order.push_back(s);
  }
  for (size_t head = 0; head < order.size(); ++head) {
    const NodeId u = order[head];
    if (depth[u] >= k) continue;
    for (NodeId w : g.Neighbors(u)) {
      if (depth[w] < 0) {
        depth[w] = depth[u] + 1;
        order.push_back(w);
      }
    }
  }
  if (depth_out != nullptr) {
    depth_out->assign(g.num_nodes(), -1);
    for (NodeId u : order) (*depth_out)[u] = depth[u];
  }
  for (NodeId u : order) depth[u] = -1;
  return order;
}

}  // namespace

NodeSet KhopNeighbors(const Graph& g, NodeId v, int k) {
  CheckNode(g, v);
  if (k < 0) throw InvalidArgument("hop count must be non-negative");
  return NodeSet::FromUnsorted(Bfs(g, NodeSet{v}, k, nullptr));
}

NodeSet KhopUnion(const Graph& g, const NodeSet& sources, int k) {
  if (k < 0) throw InvalidArgument("hop count must be non-negative");
  return NodeSet::FromUnsorted(Bfs(g, sources, k, nullptr));
}

std::vector<int> HopDistances(const Graph& g, NodeId v, int max_depth) {
  CheckNode(g, v);
  std::vector<int> depth;
  Bfs(g, NodeSet{v}, max_depth, &depth);
  return depth;
}

InducedSubgraph Induce(const Graph& g, NodeSet keep) {
  return InducedSubgraph(g, std::move(keep));
}

InducedSubgraph RemoveNodes(const Graph& g, const NodeSet& scope,
                            const NodeSet& removed, const NodeSet& forced) {
  if (!removed.IsSubsetOf(scope)) {
    throw InvalidArgument("remove_nodes: removed set is not within scope");
  }
  if (!forced.IsSubsetOf(scope)) {
    throw InvalidArgument("remove_nodes: forced set is not within scope");
  }
  NodeSet keep = scope.Difference(removed).Union(forced);
  if (keep.empty()) {
    throw InvalidArgument("remove_nodes: nothing left after removal");
  }
  return InducedSubgraph(g, std::move(keep));
}

NodeSet SampleSubsetWithAnchor(Rng& rng, const NodeSet& pool, NodeId anchor) {
  if (!pool.Contains(anchor)) {
    throw InvalidArgument("anchor " + std::to_string(anchor) +
                          " is not in the sampling pool");
  }
  std::vector<NodeId> chosen;
  chosen.reserve(pool.size());
  for (NodeId v : pool) {
    if (v == anchor || rng.Coin()) chosen.push_back(v);
  }
  return NodeSet::FromUnsorted(std::move(chosen));
}

}  // namespace amortex
