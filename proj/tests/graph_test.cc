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

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include <gtest/gtest.h>

#include "amortex/datasets.h"
#include "amortex/error.h"
#include "amortex/graph.h"
#include "test_util.h"

namespace amortex {
namespace {

using testing::PathGraph;
using testing::RandomGraph;

// Distances by repeated frontier expansion over the edge list.
std::vector<int> ReferenceDistances(const Graph& g, NodeId v) {
  std::vector<int> dist(g.num_nodes(), -1);
  dist[v] = 0;
  const auto edges = g.Edges();
  for (int level = 0;; ++level) {
    bool grew = false;
    for (const auto& [a, b] : edges) {
      if (dist[a] == level && dist[b] < 0) dist[b] = level + 1, grew = true;
      if (dist[b] == level && dist[a] < 0) dist[a] = level + 1, grew = true;
    }
    if (!grew) break;
  }
  return dist;
}

NodeSet ReferenceBall(const Graph& g, NodeId v, int k) {
  const auto dist = ReferenceDistances(g, v);
  std::vector<NodeId> out;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (dist[u] >= 0 && dist[u] <= k) out.push_back(u);
  }
  return NodeSet::FromUnsorted(out);
}

TEST(NodeSetTest, SortsAndDeduplicates) {
  const NodeSet s = NodeSet::FromUnsorted({5, 1, 3, 1, 5});
  EXPECT_EQ(s.ids(), (std::vector<NodeId>{1, 3, 5}));
  EXPECT_TRUE(s.Contains(3));
  EXPECT_FALSE(s.Contains(2));
  EXPECT_EQ(s.IndexOf(5), 2);
  EXPECT_EQ(s.IndexOf(4), -1);
}

TEST(NodeSetTest, SetAlgebra) {
  const NodeSet a{1, 2, 3};
  const NodeSet b{3, 4};
  EXPECT_EQ(a.Union(b), (NodeSet{1, 2, 3, 4}));
  EXPECT_EQ(a.Difference(b), (NodeSet{1, 2}));
  EXPECT_EQ(a.Intersection(b), (NodeSet{3}));
  EXPECT_EQ(a.With(0), (NodeSet{0, 1, 2, 3}));
  EXPECT_EQ(a.Without(2), (NodeSet{1, 3}));
  EXPECT_TRUE((NodeSet{1, 3}).IsSubsetOf(a));
  EXPECT_FALSE(b.IsSubsetOf(a));
  EXPECT_EQ(NodeSet::Range(3), (NodeSet{0, 1, 2}));
}

TEST(GraphTest, AdjacencyIsSymmetricAndHandshakeHolds) {
  const Graph g = RandomGraph(30, 0.2, 3, 1);
  int64_t degree_sum = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    degree_sum += g.Degree(u);
    for (NodeId v : g.Neighbors(u)) EXPECT_TRUE(g.HasEdge(v, u));
  }
  EXPECT_EQ(degree_sum, 2 * g.num_edges());
}

TEST(GraphTest, RejectsSelfLoopsDuplicatesAndBadIds) {
  const Matrix x = Matrix::Ones(3, 1);
  EXPECT_THROW(Graph(3, {{0, 0}}, x), Error);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}, x), Error);
  EXPECT_THROW(Graph(3, {{0, 3}}, x), Error);
  EXPECT_THROW(Graph(3, {}, Matrix::Ones(2, 1)), Error);
}

TEST(KhopTest, PathGraphExamples) {
  const Graph g = PathGraph(4);
  EXPECT_EQ(KhopNeighbors(g, 0, 0), (NodeSet{0}));
  EXPECT_EQ(KhopNeighbors(g, 0, 2), (NodeSet{0, 1, 2}));
  EXPECT_EQ(KhopNeighbors(g, 1, 1), (NodeSet{0, 1, 2}));
  EXPECT_THROW(KhopNeighbors(g, 4, 1), Error);
  EXPECT_THROW(KhopNeighbors(g, 0, -1), Error);
}

TEST(KhopTest, MatchesReferenceOnRandomGraphs) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const Graph g = RandomGraph(40, 0.06, 1, seed);
    for (NodeId v = 0; v < g.num_nodes(); v += 3) {
      for (int k = 0; k <= 4; ++k) {
        EXPECT_EQ(KhopNeighbors(g, v, k), ReferenceBall(g, v, k));
      }
      const auto depth = HopDistances(g, v, 3);
      const auto ref = ReferenceDistances(g, v);
      for (NodeId u = 0; u < g.num_nodes(); ++u) {
        EXPECT_EQ(depth[u], ref[u] >= 0 && ref[u] <= 3 ? ref[u] : -1);
      }
    }
  }
}

TEST(KhopTest, ScratchStateDoesNotLeakAcrossGraphs) {
  const Graph big = RandomGraph(60, 0.1, 1, 3);
  const Graph small = PathGraph(5);
  for (int rep = 0; rep < 3; ++rep) {
    EXPECT_EQ(KhopNeighbors(big, 7, 2), ReferenceBall(big, 7, 2));
    EXPECT_EQ(KhopNeighbors(small, 2, 1), (NodeSet{1, 2, 3}));
  }
}

TEST(KhopTest, UnionMatchesUnionOfBalls) {
  const Graph g = GenBa(200, 2, 4);
  const NodeSet sources{3, 50, 120};
  NodeSet expected;
  for (NodeId s : sources) expected = expected.Union(ReferenceBall(g, s, 2));
  EXPECT_EQ(KhopUnion(g, sources, 2), expected);
  EXPECT_EQ(KhopUnion(g, sources, 0), sources);
}

TEST(KhopTest, BaShapesHouseNodeReachesWholeHouse) {
  const GeneratedDataset d = GenBaShapes(0);
  const Graph& g = d.graphs[0];
  // Houses occupy ids 300.. in blocks of five.
  for (NodeId house = 0; house < 80; house += 13) {
    const NodeId first = 300 + 5 * house;
    const NodeSet ball = KhopNeighbors(g, first, 3);
    for (NodeId u = first; u < first + 5; ++u) EXPECT_TRUE(ball.Contains(u));
  }
}

TEST(InduceTest, Examples) {
  const Graph tri(3, {{0, 1}, {1, 2}, {0, 2}}, Matrix::Ones(3, 1));
  const InducedSubgraph two = Induce(tri, {0, 1});
  EXPECT_EQ(two.num_nodes(), 2);
  EXPECT_EQ(two.num_edges(), 1);
  const InducedSubgraph one = Induce(tri, {2});
  EXPECT_EQ(one.num_edges(), 0);
  const InducedSubgraph all = Induce(tri, NodeSet::Range(3));
  EXPECT_EQ(all.num_edges(), 3);
  EXPECT_THROW(Induce(tri, {}), Error);
  EXPECT_THROW(Induce(tri, {5}), Error);
}

TEST(InduceTest, EdgesAreExactlyThoseWithinKeep) {
  const Graph g = RandomGraph(25, 0.25, 2, 9);
  const NodeSet keep{0, 2, 3, 7, 11, 12, 20};
  const InducedSubgraph sg = Induce(g, keep);
  std::set<std::pair<NodeId, NodeId>> got;
  for (NodeId u = 0; u < sg.num_nodes(); ++u) {
    for (NodeId v : sg.Neighbors(u)) got.emplace(sg.ParentId(u), sg.ParentId(v));
  }
  std::set<std::pair<NodeId, NodeId>> want;
  for (const auto& [a, b] : g.Edges()) {
    if (keep.Contains(a) && keep.Contains(b)) want.emplace(a, b), want.emplace(b, a);
  }
  EXPECT_EQ(got, want);
  for (NodeId u = 0; u < sg.num_nodes(); ++u) {
    EXPECT_EQ(sg.LocalId(sg.ParentId(u)), u);
    EXPECT_EQ(sg.features().row(u), g.features().row(sg.ParentId(u)));
  }
  EXPECT_EQ(sg.LocalId(1), -1);
}

TEST(InduceTest, WholeGraphUsesParentIds) {
  const Graph g = RandomGraph(10, 0.3, 1, 2);
  const InducedSubgraph sg = Induce(g, NodeSet::Range(10));
  for (NodeId v = 0; v < 10; ++v) EXPECT_EQ(sg.LocalId(v), v);
  EXPECT_EQ(sg.LocalId(10), -1);
  EXPECT_EQ(sg.LocalId(-1), -1);
  EXPECT_EQ(sg.num_edges(), g.num_edges());
}

TEST(RemoveNodesTest, Examples) {
  const Graph g = PathGraph(4);
  const NodeSet scope{0, 1, 2};
  EXPECT_EQ(RemoveNodes(g, scope, {}, {}).kept(), scope);
  const InducedSubgraph lone = RemoveNodes(g, scope, {1, 2}, {0});
  EXPECT_EQ(lone.kept(), (NodeSet{0}));
  EXPECT_EQ(lone.num_edges(), 0);
  EXPECT_EQ(RemoveNodes(g, scope, scope, {1}).kept(), (NodeSet{1}));
  EXPECT_THROW(RemoveNodes(g, scope, {3}, {}), Error);
  EXPECT_THROW(RemoveNodes(g, scope, scope, {}), Error);
}

TEST(SampleSubsetTest, SingletonPoolAlwaysReturnsAnchor) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(SampleSubsetWithAnchor(rng, {4}, 4), (NodeSet{4}));
  }
}

TEST(SampleSubsetTest, UniformOverAdmissibleSubsets) {
  Rng rng(2);
  const NodeSet pool{1, 2, 3};
  std::map<std::vector<NodeId>, int> counts;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    const NodeSet s = SampleSubsetWithAnchor(rng, pool, 2);
    ASSERT_TRUE(s.Contains(2));
    ++counts[s.ids()];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [subset, c] : counts) {
    EXPECT_NEAR(static_cast<double>(c) / draws, 0.25, 0.01);
  }
  EXPECT_THROW(SampleSubsetWithAnchor(rng, pool, 7), Error);
}

TEST(RngTest, DeriveSeedIsStableAndSeparatesNames) {
  EXPECT_EQ(DeriveSeed(1, "a"), DeriveSeed(1, "a"));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(1, "b"));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(2, "a"));
  EXPECT_NE(DeriveSeed(1, uint64_t{3}), DeriveSeed(1, uint64_t{4}));
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, UniformIntCoversRangeEvenly) {
  Rng rng(3);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.UniformInt(5)];
  for (int c : counts) EXPECT_NEAR(c / 50000.0, 0.2, 0.01);
}

}  // namespace
}  // namespace amortex
