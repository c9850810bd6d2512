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

#include <cmath>
#include <functional>
#include <sstream>

#include <gtest/gtest.h>

#include "amortex/attribution.h"
#include "amortex/error.h"
#include "test_util.h"

namespace amortex {
namespace {

using testing::DenseNodeForward;
using testing::RandomFeatures;
using testing::RandomGraph;
using testing::RandomNodeModel;

// f(S) recomputed from the dense reference forward.
struct ReferenceF {
  const GcnModel& model;
  const Graph& g;
  NodeId target;
  int cls;

  Eigen::VectorXd Distribution(const NodeSet& kept) const {
    const InducedSubgraph sg(g, kept.With(target));
    const Eigen::RowVectorXd logits = DenseNodeForward(model, sg).row(sg.LocalId(target));
    const Eigen::RowVectorXd e = (logits.array() - logits.maxCoeff()).exp();
    return (e / e.sum()).transpose();
  }
  double operator()(const NodeSet& kept) const { return Distribution(kept)(cls); }
};

// A small graph where every target has a handful of neighbours.
Graph SmallGraph(uint64_t seed) { return RandomGraph(9, 0.3, 3, seed); }

// Exact phi by recursion over include/exclude decisions, a different order
// from the library's bitmask sweep.
double RecursivePhi(const ReferenceF& f, const NodeSet& hood, NodeId j) {
  const NodeSet others = hood.Without(f.target).Without(j);
  double sum = 0.0;
  int64_t count = 0;
  std::function<void(size_t, std::vector<NodeId>&)> rec = [&](size_t k,
                                                              std::vector<NodeId>& chosen) {
    if (k == others.size()) {
      const NodeSet s = NodeSet::FromUnsorted(chosen).With(j).With(f.target);
      sum += f(s) - f(hood.Difference(s).With(f.target));
      ++count;
      return;
    }
    chosen.push_back(others[k]);
    rec(k + 1, chosen);
    chosen.pop_back();
    rec(k + 1, chosen);
  };
  std::vector<NodeId> chosen;
  rec(0, chosen);
  return sum / static_cast<double>(count);
}

TEST(OracleTest, EvaluateMatchesReferenceForward) {
  const Graph g = SmallGraph(1);
  const GcnModel model = RandomNodeModel(3, {5, 3}, 2);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const NodeOracle oracle(model, g, i, 2);
    const ReferenceF f{model, g, i, oracle.predicted_class()};
    EXPECT_NEAR(oracle.full_value(), f(oracle.neighborhood()), 1e-12);
    EXPECT_NEAR(oracle.Evaluate({}), f({}), 1e-12);
    for (NodeId j : oracle.sources()) {
      EXPECT_NEAR(oracle.Evaluate({j}), f({j}), 1e-12);
    }
    EXPECT_NEAR(oracle.full_prediction().probabilities.sum(), 1.0, 1e-12);
  }
}

TEST(OracleTest, RejectsSetsOutsideTheNeighbourhood) {
  std::vector<Edge> edges;
  for (NodeId v = 0; v + 1 < 6; ++v) edges.emplace_back(v, v + 1);
  const Graph g(6, edges, Matrix::Ones(6, 3));
  const GcnModel model = RandomNodeModel(3, {3, 2}, 1);
  const NodeOracle oracle(model, g, 0, 2);
  EXPECT_THROW(oracle.Evaluate({5}), Error);
}

TEST(SubsetDeltaTest, FullNeighbourhoodAndAntisymmetry) {
  const Graph g = SmallGraph(2);
  const GcnModel model = RandomNodeModel(3, {4, 3}, 3);
  Rng rng(4);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const NodeOracle oracle(model, g, i, 2);
    const ReferenceF f{model, g, i, oracle.predicted_class()};
    EXPECT_NEAR(SubsetDelta(oracle, oracle.neighborhood()),
                f(oracle.neighborhood()) - f({}), 1e-12);
    for (int rep = 0; rep < 5; ++rep) {
      const NodeSet s = SampleSubsetWithAnchor(rng, oracle.neighborhood(), i);
      const NodeSet complement = oracle.neighborhood().Difference(s).With(i);
      EXPECT_NEAR(SubsetDelta(oracle, s), -SubsetDelta(oracle, complement), 1e-15);
      EXPECT_NEAR(SubsetDelta(oracle, s), f(s) - f(complement), 1e-12);
    }
  }
}

TEST(DeltaFidelityTest, EqualsSubsetDeltaAndTwoPathComputation) {
  Rng rng(5);
  for (uint64_t seed = 0; seed < 4; ++seed) {
    const Graph g = SmallGraph(seed + 10);
    const GcnModel model = RandomNodeModel(3, {4, 3}, seed);
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
      const NodeOracle oracle(model, g, i, 2);
      const ReferenceF f{model, g, i, oracle.predicted_class()};
      const NodeSet& n = oracle.neighborhood();
      for (int rep = 0; rep < 10; ++rep) {
        const NodeSet s = SampleSubsetWithAnchor(rng, n, i);
        EXPECT_LT(std::abs(DeltaFidelity(oracle, s) - SubsetDelta(oracle, s)), 1e-12);
        const double plus = f(n) - f(n.Difference(s).With(i));
        const double minus = f(n) - f(s);
        EXPECT_NEAR(FidelityPlus(oracle, s), plus, 1e-12);
        EXPECT_NEAR(FidelityMinus(oracle, s), minus, 1e-12);
        EXPECT_NEAR(DeltaFidelity(oracle, s), plus - minus, 1e-12);
      }
      EXPECT_EQ(FidelityMinus(oracle, n), 0.0);
      EXPECT_NEAR(DeltaFidelity(oracle, n), FidelityPlus(oracle, n), 1e-15);
    }
  }
}

TEST(ExactAttributionTest, MatchesIndependentEnumeration) {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    const Graph g = SmallGraph(seed + 20);
    const GcnModel model = RandomNodeModel(3, {4, 3}, seed + 1);
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
      const NodeOracle oracle(model, g, i, 2);
      if (oracle.neighborhood().size() > 10) continue;
      const ReferenceF f{model, g, i, oracle.predicted_class()};
      const std::vector<double> all = ExactAttributionAll(oracle);
      const NodeSet sources = oracle.sources();
      ASSERT_EQ(all.size(), sources.size());
      for (size_t k = 0; k < sources.size(); ++k) {
        const double want = RecursivePhi(f, oracle.neighborhood(), sources[k]);
        EXPECT_NEAR(ExactAttribution(oracle, sources[k]), want, 1e-12);
        EXPECT_NEAR(all[k], want, 1e-12);
      }
      EXPECT_EQ(ExactAttribution(oracle, i), 0.0);
    }
  }
}

TEST(ExactAttributionTest, IsolatedTargetAndConstantModel) {
  const Graph lone(3, {{1, 2}}, RandomFeatures(3, 3, 1));
  const GcnModel model = RandomNodeModel(3, {4, 3}, 2);
  const NodeOracle isolated(model, lone, 0, 2);
  EXPECT_EQ(isolated.neighborhood(), (NodeSet{0}));
  EXPECT_EQ(ExactAttribution(isolated, 0), 0.0);
  EXPECT_TRUE(ExactAttributionAll(isolated).empty());

  GcnModel constant = model;
  constant.SetParameters(Vector::Zero(constant.NumParameters()));
  const Graph g = SmallGraph(3);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const NodeOracle oracle(constant, g, i, 2);
    for (double phi : ExactAttributionAll(oracle)) EXPECT_EQ(phi, 0.0);
  }
}

TEST(ExactAttributionTest, FourNeighbourStarIsMeanOfEightSubsets) {
  const Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, RandomFeatures(5, 3, 3));
  const GcnModel model = RandomNodeModel(3, {4, 3}, 4);
  const NodeOracle oracle(model, star, 0, 1);
  const ReferenceF f{model, star, 0, oracle.predicted_class()};
  const NodeSet n = oracle.neighborhood();
  double sum = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    // Subsets of {2, 3, 4}, always with source 1 and target 0.
    std::vector<NodeId> s{0, 1};
    for (int b = 0; b < 3; ++b) {
      if (mask >> b & 1) s.push_back(2 + b);
    }
    const NodeSet set = NodeSet::FromUnsorted(s);
    sum += f(set) - f(n.Difference(set).With(0));
  }
  EXPECT_NEAR(ExactAttribution(oracle, 1), sum / 8.0, 1e-12);
}

TEST(ExactAttributionTest, CapIsEnforced) {
  std::vector<Edge> edges;
  for (NodeId v = 1; v < 16; ++v) edges.emplace_back(0, v);
  const Graph star(16, edges, Matrix::Ones(16, 3));
  const GcnModel model = RandomNodeModel(3, {3, 2}, 1);
  const NodeOracle oracle(model, star, 0, 1);
  EXPECT_THROW(ExactAttribution(oracle, 1), Error);
  EXPECT_THROW(ExactAttributionAll(oracle, 10), Error);
}

TEST(McTest, RunningMeanRecursion) {
  AttributionEstimate e;
  e = McUpdate(e, {{}, 0.2});
  EXPECT_EQ(e.value, 0.2);
  EXPECT_EQ(e.samples_seen, 1);
  e = McUpdate(e, {{}, 0.4});
  e = McUpdate(e, {{}, 0.6});
  EXPECT_NEAR(e.value, 0.4, 1e-15);
  EXPECT_EQ(e.samples_seen, 3);
}

TEST(McTest, ConvergesToExactAttribution) {
  const Graph g = SmallGraph(7);
  const GcnModel model = RandomNodeModel(3, {5, 3}, 8);
  Rng rng(9);
  int checked = 0;
  for (NodeId i = 0; i < g.num_nodes() && checked < 4; ++i) {
    const NodeOracle oracle(model, g, i, 2);
    const NodeSet sources = oracle.sources();
    if (sources.empty() || oracle.neighborhood().size() > 10) continue;
    ++checked;
    const std::vector<double> exact = ExactAttributionAll(oracle);
    for (size_t k = 0; k < sources.size(); ++k) {
      AttributionEstimate e;
      for (int t = 0; t < 2000; ++t) {
        const DeltaSample s = SampleDelta(oracle, sources[k], rng);
        ASSERT_TRUE(s.subset.Contains(sources[k]));
        ASSERT_TRUE(s.subset.Contains(i));
        e = McUpdate(e, s);
      }
      EXPECT_LE(std::abs(e.value - exact[k]), 0.05);
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(McTest, PartitionDeltasAreUnbiased) {
  const Graph g = SmallGraph(11);
  const GcnModel model = RandomNodeModel(3, {5, 3}, 12);
  Rng rng(13);
  for (NodeId i = 0; i < 3; ++i) {
    const NodeOracle oracle(model, g, i, 2);
    if (oracle.sources().empty() || oracle.neighborhood().size() > 10) continue;
    const std::vector<double> exact = ExactAttributionAll(oracle);
    std::vector<double> mean(exact.size(), 0.0);
    const int draws = 4000;
    for (int t = 0; t < draws; ++t) {
      const std::vector<double> d = PartitionDeltas(oracle, rng);
      for (size_t k = 0; k < d.size(); ++k) mean[k] += d[k] / draws;
    }
    for (size_t k = 0; k < exact.size(); ++k) EXPECT_NEAR(mean[k], exact[k], 0.04);
  }
}

TEST(GraphAttributionTest, ConstantModelAndTwoNodeGraph) {
  GcnSpec spec;
  spec.input_dim = 3;
  spec.layer_dims = {4};
  spec.head = Head::kGraph;
  spec.readout_dim = 2;
  spec.bias_init = 0.3;
  const GcnModel model = GcnModel::Initialize(spec, 2);
  const Graph pair(2, {{0, 1}}, RandomFeatures(2, 3, 5));
  const GraphOracle oracle(model, pair);
  // S in {{0}, {0, 1}}: d({0}) = f({0}) - f({1}), d({0, 1}) = f(V) - 1/C.
  const double want =
      0.5 * ((oracle.Evaluate({0}) - oracle.Evaluate({1})) + (oracle.full_value() - 0.5));
  EXPECT_NEAR(ExactAttributionGraph(oracle, 0), want, 1e-12);
  EXPECT_DOUBLE_EQ(oracle.Evaluate({}), 0.5);

  GcnModel constant = model;
  constant.SetParameters(Vector::Zero(constant.NumParameters()));
  const Graph g = SmallGraph(1);
  const GraphOracle flat(constant, g);
  for (double phi : ExactAttributionGraphAll(flat)) EXPECT_EQ(phi, 0.0);
}

TEST(GraphAttributionTest, AutomorphicNodesScoreEqually) {
  // A 6-cycle with identical features: every node is equivalent.
  std::vector<Edge> edges;
  for (NodeId v = 0; v < 6; ++v) edges.emplace_back(std::min(v, (v + 1) % 6),
                                                    std::max(v, (v + 1) % 6));
  const Graph cycle(6, edges, Matrix::Ones(6, 3));
  GcnSpec spec;
  spec.input_dim = 3;
  spec.layer_dims = {4, 4};
  spec.head = Head::kGraph;
  spec.readout_dim = 3;
  spec.bias_init = 0.3;
  const GcnModel model = GcnModel::Initialize(spec, 1);
  const GraphOracle oracle(model, cycle);
  const std::vector<double> phi = ExactAttributionGraphAll(oracle);
  for (double p : phi) EXPECT_NEAR(p, phi[0], 1e-9);
  for (NodeId v = 0; v < 6; ++v) EXPECT_NEAR(ExactAttributionGraph(oracle, v), phi[v], 1e-12);
}

TEST(MiTest, FullSetIsEntropyAndHandComputation) {
  const Graph g = SmallGraph(4);
  const GcnModel model = RandomNodeModel(3, {4, 3}, 5);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const NodeOracle oracle(model, g, i, 2);
    const ReferenceF f{model, g, i, oracle.predicted_class()};
    const Eigen::VectorXd p = f.Distribution(oracle.neighborhood());
    const double entropy = -(p.array() * p.array().log()).sum();
    EXPECT_NEAR(MiValue(oracle, oracle.neighborhood()), entropy, 1e-12);
    EXPECT_GE(MiValue(oracle, oracle.neighborhood()), 0.0);
    for (NodeId j : oracle.sources()) {
      const Eigen::VectorXd q = f.Distribution({j});
      EXPECT_NEAR(MiValue(oracle, {j}), -(p.array() * q.array().log()).sum(), 1e-12);
    }
  }
  const NodeOracle oracle(model, g, 0, 2);
  EXPECT_THROW(MiValue(oracle, {}), Error);
}

TEST(MiTest, UniformPerturbedDistributionGivesLogC) {
  // Zero weights except a biased last layer make the full prediction
  // non-uniform while a model without that bias is uniform everywhere.
  const Graph g = SmallGraph(5);
  GcnModel model = RandomNodeModel(3, {4, 3}, 1);
  model.SetParameters(Vector::Zero(model.NumParameters()));
  const NodeOracle oracle(model, g, 0, 2);
  EXPECT_NEAR(MiValue(oracle, oracle.neighborhood()), std::log(3.0), 1e-12);
}

TEST(RemovalScoreTest, MatchesDefinition) {
  const Graph g = SmallGraph(6);
  const GcnModel model = RandomNodeModel(3, {4, 3}, 7);
  const NodeOracle oracle(model, g, 1, 2);
  const ReferenceF f{model, g, 1, oracle.predicted_class()};
  const NodeSet n = oracle.neighborhood();
  double want = 0.0;
  for (NodeId j : n) want += f({j}) - f(n.Without(j));
  EXPECT_NEAR(RemovalScore(oracle, n), want / static_cast<double>(n.size()), 1e-12);
  EXPECT_THROW(RemovalScore(oracle, {}), Error);
}

TEST(AttributionJsonlTest, RoundTrip) {
  const std::vector<AttributionRecord> records = {{3, 4, 0.25, "exact", 0},
                                                  {3, 7, -1e-17, "mc", 2000}};
  std::stringstream io;
  WriteAttributionJsonl(io, records);
  const auto back = ReadAttributionJsonl(io);
  ASSERT_EQ(back.size(), 2u);
  for (size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].target, records[k].target);
    EXPECT_EQ(back[k].source, records[k].source);
    EXPECT_EQ(back[k].phi, records[k].phi);
    EXPECT_EQ(back[k].method, records[k].method);
    EXPECT_EQ(back[k].samples, records[k].samples);
  }
  std::stringstream bad("{\"target\": 1}\n");
  EXPECT_THROW(ReadAttributionJsonl(bad), Error);
}

}  // namespace
}  // namespace amortex
