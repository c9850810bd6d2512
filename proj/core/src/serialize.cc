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

#include "amortex/serialize.h"

#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "amortex/error.h"

namespace amortex {
namespace {

using nlohmann::json;

json LayerToJson(const Layer& layer) {
  const std::vector<double> weight(layer.weight.data(),
                                   layer.weight.data() + layer.weight.size());
  const std::vector<double> bias(layer.bias.data(), layer.bias.data() + layer.bias.size());
  return json{{"in", layer.weight.rows()},
              {"out", layer.weight.cols()},
              {"aggregate", layer.aggregate},
              {"weight", weight},
              {"bias", bias}};
}

Layer LayerFromJson(const json& j) {
  Layer layer;
  const int64_t in = j.at("in").get<int64_t>();
  const int64_t out = j.at("out").get<int64_t>();
  if (in < 1 || out < 1) throw DataError("layer dimensions must be positive");
  layer.aggregate = j.at("aggregate").get<bool>();
  const auto weight = j.at("weight").get<std::vector<double>>();
  const auto bias = j.at("bias").get<std::vector<double>>();
  if (static_cast<int64_t>(weight.size()) != in * out) {
    throw DataError("weight array has " + std::to_string(weight.size()) +
                    " values, expected " + std::to_string(in * out));
  }
  if (static_cast<int64_t>(bias.size()) != out) throw DataError("bias length mismatch");
  layer.weight = Eigen::Map<const Matrix>(weight.data(), in, out);
  layer.bias = Eigen::Map<const Vector>(bias.data(), out);
  return layer;
}

json ModelObject(const GcnModel& model) {
  json layers = json::array();
  for (const Layer& layer : model.layers()) layers.push_back(LayerToJson(layer));
  return json{{"head", model.head() == Head::kNode ? "node" : "graph"},
              {"seed", model.seed()},
              {"aggregation", ToString(model.aggregation())},
              {"layers", std::move(layers)},
              {"readout", model.readout() ? LayerToJson(*model.readout()) : json(nullptr)}};
}

GcnModel ModelFromObject(const json& j) {
  const std::string head = j.at("head").get<std::string>();
  if (head != "node" && head != "graph") throw DataError("unknown head '" + head + "'");
  std::vector<Layer> layers;
  for (const json& l : j.at("layers")) layers.push_back(LayerFromJson(l));
  std::optional<Layer> readout;
  if (j.contains("readout") && !j.at("readout").is_null()) {
    readout = LayerFromJson(j.at("readout"));
  }
  try {
    const Aggregation aggregation =
        j.contains("aggregation")
            ? ParseAggregation(j.at("aggregation").get<std::string>())
            : Aggregation::kSqrtDegree;
    return GcnModel(std::move(layers), head == "node" ? Head::kNode : Head::kGraph,
                    std::move(readout), j.at("seed").get<uint64_t>(), aggregation);
  } catch (const Error& e) {
    throw DataError(std::string("invalid model checkpoint: ") + e.what());
  }
}

json Parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

}  // namespace

std::string ModelToJson(const GcnModel& model) {
  return ModelObject(model).dump() + "\n";
}

GcnModel ModelFromJson(const std::string& text) {
  const json j = Parse(text, "model");
  try {
    return ModelFromObject(j);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid model checkpoint: ") + e.what());
  }
}

std::string ExplainerToJson(const ExplainerModel& explainer) {
  json j = ModelObject(explainer.backbone());
  j["embedding_dim"] = explainer.embedding_dim();
  j["mode"] = ToString(explainer.mode());
  j["max_hop"] = explainer.max_hop();
  j["task"] = ToString(explainer.task());
  return j.dump() + "\n";
}

ExplainerModel ExplainerFromJson(const std::string& text) {
  const json j = Parse(text, "explainer");
  try {
    return ExplainerModel(ModelFromObject(j), j.at("embedding_dim").get<int>(),
                          ParseEmbeddingMode(j.at("mode").get<std::string>()),
                          j.at("max_hop").get<int>(),
                          ParseTaskKind(j.at("task").get<std::string>()));
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid explainer checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kData) throw;
    throw DataError(std::string("invalid explainer checkpoint: ") + e.what());
  }
}

}  // namespace amortex
