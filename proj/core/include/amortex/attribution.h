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

// Removal-based attribution oracles for a black-box GCN.
//
// For a target node i with K-hop neighbourhood N (i included) and a trained
// node model f, the scalar f(S) is the probability that the model assigns at
// i, on the node-induced subgraph G_{S U {i}}, to the class it predicts on
// the whole of G_N. The target is kept on both sides of every difference.
//
//   subset delta     d(S)      = f(S) - f((N \ S) U {i})
//   fidelity+        Fid+(S)   = f(N) - f((N \ S) U {i})
//   fidelity-        Fid-(S)   = f(N) - f(S U {i})
//   attribution      phi_{j->i} = mean of d(S) over all S in N with j in S
//
// Fid+(S) - Fid-(S) == d(S) holds term by term since the f(N) terms cancel.
//
// The graph-level variants drop the forced target: f(S) is the probability of
// the full-graph class on G_S, and an empty S scores the uniform 1 / C.

#ifndef AMORTEX_ATTRIBUTION_H_
#define AMORTEX_ATTRIBUTION_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "amortex/gcn.h"
#include "amortex/graph.h"
#include "amortex/random.h"

namespace amortex {

inline constexpr int kDefaultEnumerationCap = 14;
inline constexpr double kProbabilityFloor = 1e-12;

// f(.) restricted to one target node of a node-classification model.
class NodeOracle {
 public:
  // Neighbourhood = KhopNeighbors(g, target, max_hop). Keeps references to
  // `model` and `g`.
  NodeOracle(const GcnModel& model, const Graph& g, NodeId target, int max_hop);

  NodeId target() const { return target_; }
  const NodeSet& neighborhood() const { return neighborhood_; }
  // Neighbourhood without the target: the nodes that can be attributed.
  NodeSet sources() const { return neighborhood_.Without(target_); }
  int predicted_class() const { return full_.predicted_class; }
  const PredictionVector& full_prediction() const { return full_; }
  double full_value() const { return full_.probabilities(full_.predicted_class); }

  // Class distribution at the target on G_{kept U {target}}. Throws when
  // `kept` leaves the neighbourhood.
  PredictionVector Distribution(const NodeSet& kept) const;
  // Probability of the predicted class on G_{kept U {target}}.
  double Evaluate(const NodeSet& kept) const;

 private:
  const GcnModel* model_;
  const Graph* graph_;
  NodeId target_;
  NodeSet neighborhood_;
  PredictionVector full_;
};

// f(.) of a graph-classification model on one graph.
class GraphOracle {
 public:
  GraphOracle(const GcnModel& model, const Graph& g);

  const NodeSet& nodes() const { return nodes_; }
  int predicted_class() const { return full_.predicted_class; }
  int num_classes() const { return static_cast<int>(full_.probabilities.size()); }
  double full_value() const { return full_.probabilities(full_.predicted_class); }
  const PredictionVector& full_prediction() const { return full_; }

  // Class distribution on G_kept; uniform for an empty set.
  PredictionVector Distribution(const NodeSet& kept) const;
  // Probability of the full-graph class on G_kept; 1 / C for an empty set.
  double Evaluate(const NodeSet& kept) const;

 private:
  const GcnModel* model_;
  const Graph* graph_;
  NodeSet nodes_;
  PredictionVector full_;
};

double SubsetDelta(const NodeOracle& oracle, const NodeSet& subset);
double FidelityPlus(const NodeOracle& oracle, const NodeSet& removed);
double FidelityMinus(const NodeOracle& oracle, const NodeSet& kept);
double DeltaFidelity(const NodeOracle& oracle, const NodeSet& subset);

// Exhaustive phi_{source -> target}. Subsets are visited in ascending bitmask
// order over the other neighbours (sorted by id). phi_{i->i} is 0 by the
// pairing S <-> (N \ S) U {i} and is returned as exactly 0. Throws when the
// neighbourhood holds more than `cap` nodes.
double ExactAttribution(const NodeOracle& oracle, NodeId source,
                        int cap = kDefaultEnumerationCap);

// phi for every source in oracle.sources(), in that order, sharing one pass
// over all 2^{|N|-1} subsets.
std::vector<double> ExactAttributionAll(const NodeOracle& oracle,
                                        int cap = kDefaultEnumerationCap);

// Graph-level counterparts: subsets S of the node set containing `source`,
// d(S) = f(S) - f(V \ S).
double ExactAttributionGraph(const GraphOracle& oracle, NodeId source,
                             int cap = kDefaultEnumerationCap);
std::vector<double> ExactAttributionGraphAll(const GraphOracle& oracle,
                                             int cap = kDefaultEnumerationCap);

// --- Monte-Carlo estimation ---------------------------------------------------

struct AttributionEstimate {
  double value = 0.0;
  int64_t samples_seen = 0;
  NodeId source = -1;
  // Target node id, or graph index for graph-level estimates.
  int64_t target = -1;
};

struct DeltaSample {
  NodeSet subset;
  double delta = 0.0;
};

// value_t = (1 - 1/t) value_{t-1} + delta / t.
AttributionEstimate McUpdate(const AttributionEstimate& estimate,
                             const DeltaSample& sample);

// S drawn uniformly among neighbourhood subsets containing `source` (and the
// target), paired with d(S).
DeltaSample SampleDelta(const NodeOracle& oracle, NodeId source, Rng& rng);

// One fresh sample of d(S_j) for every source j at the cost of two forwards:
// a uniform split of the sources into S and C gives d(S) to members of S and
// d(C) = -d(S) to members of C. Each entry is marginally an exact draw of
// SampleDelta. Entries follow oracle.sources().
std::vector<double> PartitionDeltas(const NodeOracle& oracle, Rng& rng);
std::vector<double> GraphPartitionDeltas(const GraphOracle& oracle, Rng& rng);

// --- Mutual-information scores ---------------------------------------------

// -sum_y p(y | N) log p(y | J U {i}), probabilities floored at 1e-12.
// Throws on an empty J.
double MiValue(const NodeOracle& oracle, const NodeSet& subset);

// One draw of -sum_y p(y | N) [log p(y | N) - log p(y | S)] with S a uniform
// subset containing `source`.
double MiSample(const NodeOracle& oracle, NodeId source, Rng& rng);

// Same integrand for every source from one random split (see PartitionDeltas).
std::vector<double> PartitionMiSamples(const NodeOracle& oracle, Rng& rng);

// Graph-level MI integrand, -sum_y p(y | V) [log p(y | V) - log p(y | S)].
std::vector<double> GraphPartitionMiSamples(const GraphOracle& oracle, Rng& rng);

// Single-node removal score of a set: mean over j in J of
// f({j, i}) - f(N \ {j}).
double RemovalScore(const NodeOracle& oracle, const NodeSet& subset);

// --- Export -----------------------------------------------------------------

struct AttributionRecord {
  int64_t target = 0;
  NodeId source = 0;
  double phi = 0.0;
  std::string method;  // exact | mc | mi | explainer
  int64_t samples = 0;
};

// One JSON object per line.
void WriteAttributionJsonl(std::ostream& out,
                           const std::vector<AttributionRecord>& records);
std::vector<AttributionRecord> ReadAttributionJsonl(std::istream& in);

}  // namespace amortex

#endif  // AMORTEX_ATTRIBUTION_H_
