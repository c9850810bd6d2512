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

// JSON checkpoints.
//
// Model: {"head": "node"|"graph", "seed": s, "aggregation": name,
// "layers": [{"in", "out", "aggregate", "weight": row-major, "bias"}],
// "readout": layer | null}. A missing "aggregation" reads as sqrt-degree.
// Explainer: a model object plus "embedding_dim", "mode", "max_hop", "task".
// Unknown keys are ignored on load, so callers may attach a "config" block.

#ifndef AMORTEX_SERIALIZE_H_
#define AMORTEX_SERIALIZE_H_

#include <string>

#include "amortex/explainer.h"
#include "amortex/gcn.h"

namespace amortex {

std::string ModelToJson(const GcnModel& model);
GcnModel ModelFromJson(const std::string& text);

std::string ExplainerToJson(const ExplainerModel& explainer);
ExplainerModel ExplainerFromJson(const std::string& text);

}  // namespace amortex

#endif  // AMORTEX_SERIALIZE_H_
