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

// Seeded synthetic benchmarks with ground-truth motif masks, and the JSON
// graph file format.
//
// Graph file: {"num_nodes": n, "edges": [[u, v], ...], "features": [[...]],
// "node_labels": [...] | null, "graph_label": c | null,
// "masks": {"train": [...], "valid": [...], "test": [...]} | null}.
// Edges are listed in both directions. Multi-graph files hold a JSON array of
// such objects.

#ifndef AMORTEX_DATASETS_H_
#define AMORTEX_DATASETS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amortex/explainer.h"
#include "amortex/graph.h"

namespace amortex {

inline constexpr int kSyntheticFeatureDim = 10;

struct GeneratedDataset {
  std::string name;
  TaskKind task = TaskKind::kNode;
  int num_classes = 0;
  std::vector<Graph> graphs;
  // One 0/1 entry per node of each graph; 1 marks motif nodes.
  std::vector<std::vector<int>> motif_masks;
  // Train / valid / test graph indices for graph-level datasets.
  std::optional<SplitMasks> graph_split;
  std::map<std::string, double> params;
  std::vector<std::string> notes;
  uint64_t seed = 0;
};

// Preferential attachment on n nodes: a complete graph on m + 1 nodes, then
// every new node links to m distinct earlier nodes chosen with probability
// proportional to degree. Features are all-ones, no labels.
Graph GenBa(NodeId n, int m, uint64_t seed);
std::vector<Edge> BaEdges(NodeId n, int m, Rng& rng);

// 80 / 10 / 10 split of [0, n) by a seeded shuffle.
SplitMasks SeededSplit(NodeId n, uint64_t seed);

// 300-node BA (m = 5) base with 80 five-node houses, each bridged by one edge
// from a bottom node to a uniform base node. Labels: base 0, bottom 1,
// middle 2, roof 3.
GeneratedDataset GenBaShapes(uint64_t seed);

// Two independent BA-Shapes halves joined by `inter_edges` random edges.
// Labels of the second half are shifted by 4. Features are Gaussian with a
// per-half mean (0 or 1) and unit variance.
GeneratedDataset GenBaCommunity(uint64_t seed, int inter_edges = 370);

// Balanced binary tree with `levels` levels plus `n_motifs` six-node cycles,
// each bridged to a uniform tree node. Labels: tree 0, cycle 1.
GeneratedDataset GenTreeCycles(uint64_t seed, int levels = 8, int n_motifs = 102);

// `n_graphs` graphs of a 20-node BA tree (m = 1) plus a house (label 0) or a
// pentagon (label 1) attached by one bridge. Classes alternate by index.
GeneratedDataset GenBa2Motifs(uint64_t seed, int n_graphs = 1000);

// BA(n, m) with standard-normal features and labels from the argmax of a
// random two-layer GCN teacher.
GeneratedDataset GenBigBa(NodeId n, int m, uint64_t seed, int num_classes = 4);

// Dispatch by CLI name: ba, ba-shapes, ba-community, tree-cycles, ba-2motifs,
// big-ba. Unknown parameters or names throw InvalidArgument.
GeneratedDataset Generate(const std::string& name, uint64_t seed,
                          const std::map<std::string, double>& params = {});
std::vector<std::string> DatasetNames();

// --- Files ------------------------------------------------------------------

std::string GraphsToJson(const std::vector<Graph>& graphs, bool as_array);
// Accepts a single object or an array; throws DataError with the offending
// graph index and field.
std::vector<Graph> GraphsFromJson(const std::string& text);

void SaveGraphs(const std::string& path, const std::vector<Graph>& graphs,
                bool as_array);
std::vector<Graph> LoadGraphs(const std::string& path);

struct DatasetMetadata {
  std::string name;
  TaskKind task = TaskKind::kNode;
  int num_classes = 0;
  std::vector<std::vector<int>> motif_masks;
  std::optional<SplitMasks> graph_split;
};

// Sidecar metadata: generator, params, seed, task, classes, motif masks,
// graph split, notes.
std::string MetadataToJson(const GeneratedDataset& dataset);
DatasetMetadata MetadataFromJson(const std::string& text);
DatasetMetadata LoadMetadata(const std::string& path);

// Writes `<path>` and `<path minus .json>.meta.json`. Returns the metadata
// path.
std::string SaveDataset(const std::string& path, const GeneratedDataset& dataset);
std::string MetadataPathFor(const std::string& graph_path);

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace amortex

#endif  // AMORTEX_DATASETS_H_
