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

// amortex: command-line pipeline over the amortex core library.
//
// Every subcommand reads and writes files only. Relative paths resolve
// against $AMORTEX_DATA_DIR when it is set. A --config JSON file may hold
// top-level keys for global options and one object per subcommand, e.g.
// {"workers": 1, "train-explainer": {"mode": "mi"}}; flags override it.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "amortex/attribution.h"
#include "amortex/datasets.h"
#include "amortex/error.h"
#include "amortex/eval.h"
#include "amortex/explainer.h"
#include "amortex/gcn.h"
#include "amortex/serialize.h"

namespace amortex {
namespace {

using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Reads {"key": value, "subcommand": {"key": value}} into CLI11 items.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ParseError(std::string("malformed config JSON: ") + e.what(),
                            CLI::ExitCodes::ConversionError);
    }
    if (!j.is_object()) {
      throw CLI::ParseError("config file must hold a JSON object",
                            CLI::ExitCodes::ConversionError);
    }
    std::vector<CLI::ConfigItem> items;
    Collect(j, {}, items);
    return items;
  }

 private:
  static void Collect(const json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        std::vector<std::string> inner = parents;
        inner.push_back(key);
        Collect(value, inner, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const json& v : value) item.inputs.push_back(Scalar(v));
      } else {
        item.inputs.push_back(Scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string Scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }
};

std::filesystem::path Resolve(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("AMORTEX_DATA_DIR"); dir != nullptr && *dir) {
      return std::filesystem::path(dir) / p;
    }
  }
  return p;
}

std::string ReadInput(const std::string& path) {
  return ReadTextFile(Resolve(path).string());
}

void WriteOutput(const std::string& path, const std::string& text) {
  const std::filesystem::path p = Resolve(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  WriteTextFile(p.string(), text);
}

json ParseJson(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("malformed " + what + ": " + e.what());
  }
}

// Value of every option of `app` after defaults, config file and flags.
json ResolvedOptions(const CLI::App& app) {
  json out = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::vector<std::string> values = opt->results();
    if (values.empty() && !opt->get_default_str().empty()) {
      values = {opt->get_default_str()};
    }
    auto typed = [](const std::string& s) {
      json v = json::parse(s, nullptr, false);
      return v.is_discarded() || v.is_object() ? json(s) : v;
    };
    if (values.empty()) {
      out[name] = nullptr;
    } else if (opt->get_items_expected_max() > 1) {
      json arr = json::array();
      for (const auto& v : values) arr.push_back(typed(v));
      out[name] = arr;
    } else {
      out[name] = typed(values.back());
    }
  }
  return out;
}

struct Context {
  const CLI::App* root = nullptr;
  const CLI::App* command = nullptr;
  int workers = 1;

  json Config() const {
    json j = ResolvedOptions(*root);
    j["command"] = command->get_name();
    j["options"] = ResolvedOptions(*command);
    return j;
  }
};

struct LoadedData {
  std::vector<Graph> graphs;
  DatasetMetadata meta;
};

LoadedData LoadData(const std::string& path) {
  const std::string resolved = Resolve(path).string();
  LoadedData data{LoadGraphs(resolved), LoadMetadata(MetadataPathFor(resolved))};
  if (data.graphs.empty()) throw DataError("dataset " + path + " holds no graphs");
  if (data.meta.task == TaskKind::kNode && data.graphs.size() != 1) {
    throw DataError("node datasets must hold exactly one graph");
  }
  return data;
}

NodeSet SelectTargets(const LoadedData& data, const std::string& which) {
  if (which == "all") {
    return NodeSet::Range(data.meta.task == TaskKind::kNode
                              ? data.graphs[0].num_nodes()
                              : static_cast<NodeId>(data.graphs.size()));
  }
  const std::optional<SplitMasks>& split = data.meta.task == TaskKind::kNode
                                               ? data.graphs[0].masks()
                                               : data.meta.graph_split;
  if (!split) throw DataError("dataset has no train/valid/test split");
  if (which == "train") return split->train;
  if (which == "valid") return split->valid;
  if (which == "test") return split->test;
  throw InvalidArgument("unknown target set '" + which + "' (expected train|valid|test|all)");
}

int ProbeMaxHop(const GcnModel& model, const Graph& g, const NodeSet& probes,
                int k_max) {
  const MaxHopResult r = EstimateMaxHop(model, g, probes, k_max);
  if (!r.converged) {
    std::cerr << "warning: max-hop probe did not converge below " << k_max << "\n";
  }
  return r.max_hop;
}

// --- Explanation files -----------------------------------------------------
//
// Line 1: {"config": ..., "method": m, "task": t, "max_hop": k}.
// Then one {"target": t, "sources": [[node, score], ...]} per target, sources
// in rank order.

struct ExplanationFile {
  std::string method;
  TaskKind task = TaskKind::kNode;
  int max_hop = 0;
  std::vector<Explanation> explanations;
};

std::string ExplanationsToJsonl(const ExplanationFile& file, const json& config) {
  std::ostringstream out;
  out << json{{"config", config},
              {"method", file.method},
              {"task", ToString(file.task)},
              {"max_hop", file.max_hop}}
             .dump()
      << "\n";
  for (const Explanation& e : file.explanations) {
    json sources = json::array();
    for (const ScoredNode& s : e.sources) sources.push_back({s.node, s.score});
    out << json{{"target", e.target}, {"sources", std::move(sources)}}.dump() << "\n";
  }
  return out.str();
}

ExplanationFile ExplanationsFromJsonl(const std::string& path) {
  std::istringstream in(ReadInput(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty explanation file");
  ExplanationFile file;
  try {
    const json header = ParseJson(line, "explanation header");
    file.method = header.at("method").get<std::string>();
    file.task = ParseTaskKind(header.at("task").get<std::string>());
    file.max_hop = header.at("max_hop").get<int>();
    int64_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = ParseJson(line, "explanation line " + std::to_string(line_no));
      Explanation e;
      e.target = j.at("target").get<int64_t>();
      for (const json& s : j.at("sources")) {
        e.sources.push_back({s.at(0).get<NodeId>(), s.at(1).get<double>()});
      }
      file.explanations.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kData) throw;
    throw DataError(path + ": " + e.what());
  }
  return file;
}

// Orders explanations by target to match the sorted target list.
std::vector<Explanation> SortedByTarget(std::vector<Explanation> explanations) {
  std::sort(explanations.begin(), explanations.end(),
            [](const Explanation& a, const Explanation& b) { return a.target < b.target; });
  return explanations;
}

std::string WithConfig(const std::string& object_json, const json& config,
                       const json& extra = json::object()) {
  json j = ParseJson(object_json, "serialised object");
  j["config"] = config;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j.dump() + "\n";
}

std::string Fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

// --- gen-data --------------------------------------------------------------

struct GenDataOptions {
  std::string name;
  uint64_t seed = 0;
  std::string out;
  std::vector<std::string> params;
};

void RunGenData(const Context& ctx, const GenDataOptions& o) {
  std::map<std::string, double> params;
  for (const std::string& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("parameter '" + kv + "' is not key=value");
    try {
      params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("parameter '" + kv + "' has a non-numeric value");
    }
  }
  const GeneratedDataset d = Generate(o.name, o.seed, params);
  const std::string out = o.out.empty() ? o.name + "-s" + std::to_string(o.seed) + ".json" : o.out;
  const std::string path = Resolve(out).string();
  if (std::filesystem::path(path).has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
  }
  const std::string meta_path = SaveDataset(path, d);
  WriteTextFile(meta_path, WithConfig(ReadTextFile(meta_path), ctx.Config()));
  int64_t nodes = 0, edges = 0;
  for (const Graph& g : d.graphs) {
    nodes += g.num_nodes();
    edges += g.num_edges();
  }
  std::cout << "gen-data: " << d.name << " seed " << o.seed << ": " << d.graphs.size()
            << " graph(s), " << nodes << " nodes, " << edges << " edges -> " << path << "\n";
}

// --- train-target ----------------------------------------------------------

struct TrainTargetOptions {
  std::string data;
  std::string out = "target.json";
  uint64_t seed = 0;
  int layers = 3;
  int hidden = 20;
  double lr = -1.0;
  int epochs = -1;
  int restarts = -1;
};

void RunTrainTarget(const Context& ctx, const TrainTargetOptions& o) {
  const LoadedData data = LoadData(o.data);
  const Head head = data.meta.task == TaskKind::kNode ? Head::kNode : Head::kGraph;
  const GcnSpec spec = TargetSpec(data.graphs[0].feature_dim(), data.meta.num_classes,
                                  head, o.layers, o.hidden);
  TrainConfig cfg = TargetTrainDefaults(head);
  cfg.seed = o.seed;
  if (o.lr > 0) cfg.learning_rate = o.lr;
  if (o.epochs > 0) cfg.epochs = o.epochs;
  if (o.restarts > 0) cfg.restarts = o.restarts;
  TrainResult r = [&] {
    if (head == Head::kNode) return TrainNodeClassifier(data.graphs[0], spec, cfg);
    if (!data.meta.graph_split) throw DataError("graph dataset has no split");
    return TrainGraphClassifier(data.graphs, *data.meta.graph_split, spec, cfg);
  }();
  const json accuracy{{"train", r.accuracy.train},
                      {"valid", r.accuracy.valid},
                      {"test", r.accuracy.test}};
  WriteOutput(o.out, WithConfig(ModelToJson(r.model), ctx.Config(),
                                {{"accuracy", accuracy},
                                 {"final_loss", r.final_loss},
                                 {"attempts", r.attempts}}));
  std::cout << "train-target: " << data.meta.name << " accuracy train "
            << Fixed(r.accuracy.train) << " valid " << Fixed(r.accuracy.valid)
            << " test " << Fixed(r.accuracy.test) << " (" << r.attempts
            << " attempt(s)) -> " << Resolve(o.out).string() << "\n";
}

// --- probe-maxhop ----------------------------------------------------------

struct ProbeOptions {
  std::string data;
  std::string model;
  std::string targets = "train";
  int k_max = 6;
  std::string out;
};

void RunProbe(const Context& ctx, const ProbeOptions& o) {
  const LoadedData data = LoadData(o.data);
  if (data.meta.task != TaskKind::kNode) {
    throw InvalidArgument("probe-maxhop applies to node datasets");
  }
  const GcnModel model = ModelFromJson(ReadInput(o.model));
  const MaxHopResult r =
      EstimateMaxHop(model, data.graphs[0], SelectTargets(data, o.targets), o.k_max);
  if (!o.out.empty()) {
    WriteOutput(o.out, json{{"config", ctx.Config()},
                            {"max_hop", r.max_hop},
                            {"converged", r.converged}}
                               .dump() + "\n");
  }
  std::cout << "K=" << r.max_hop << (r.converged ? "" : " (not converged)") << "\n";
}

// --- train-explainer -------------------------------------------------------

struct TrainExplainerOptions {
  std::string data;
  std::string model;
  std::string out = "explainer.json";
  std::string mode = "removal";
  std::string embedding = "bidirectional";
  std::string weighting = "per-pair";
  int max_hop = -1;
  int dim = 20;
  int hidden = 20;
  int layers = -1;
  double lr = -1.0;
  int batch_size = 64;
  int epochs = 200;
  int patience = 10;
  uint64_t seed = 0;
};

void RunTrainExplainer(const Context& ctx, const TrainExplainerOptions& o) {
  const LoadedData data = LoadData(o.data);
  const GcnModel target = ModelFromJson(ReadInput(o.model));
  ExplainerConfig cfg;
  cfg.objective = ParseObjective(o.mode);
  cfg.mode = ParseEmbeddingMode(o.embedding);
  cfg.weighting = ParsePairWeighting(o.weighting);
  cfg.max_hop = o.max_hop;
  cfg.embedding_dim = o.dim;
  cfg.hidden_dim = o.hidden;
  cfg.num_layers = o.layers;
  cfg.learning_rate = o.lr;
  cfg.batch_size = o.batch_size;
  cfg.max_epochs = o.epochs;
  cfg.patience = o.patience;
  cfg.seed = o.seed;
  cfg.workers = ctx.workers;
  const NodeSet train = SelectTargets(data, "train");
  const NodeSet valid = SelectTargets(data, "valid");
  ExplainerTrainResult r =
      data.meta.task == TaskKind::kNode
          ? TrainExplainer(target, data.graphs[0], train, valid, cfg)
          : TrainGraphExplainer(target, data.graphs, train, valid, cfg);
  const json trace{{"train_loss", r.trace.train_loss},
                   {"valid_loss", r.trace.valid_loss},
                   {"initial_valid_loss", r.trace.initial_valid_loss},
                   {"best_epoch", r.trace.best_epoch},
                   {"max_hop", r.trace.max_hop},
                   {"max_hop_converged", r.trace.max_hop_converged}};
  WriteOutput(o.out, WithConfig(ExplainerToJson(r.model), ctx.Config(), {{"trace", trace}}));
  const double best = r.trace.best_epoch == 0
                          ? r.trace.initial_valid_loss
                          : r.trace.valid_loss[r.trace.best_epoch - 1];
  std::cout << "train-explainer: " << o.mode << "/" << o.embedding << " K="
            << r.trace.max_hop << " epochs " << r.trace.train_loss.size()
            << " valid loss " << Fixed(r.trace.initial_valid_loss, 5) << " -> "
            << Fixed(best, 5) << " -> " << Resolve(o.out).string() << "\n";
}

// --- explain ---------------------------------------------------------------

struct ExplainOptions {
  std::string data;
  std::string method = "explainer";
  std::string explainer;
  std::string model;
  std::string targets = "test";
  int max_hop = -1;
  uint64_t seed = 0;
  std::string out = "explanations.jsonl";
};

void RunExplain(const Context& ctx, const ExplainOptions& o) {
  const LoadedData data = LoadData(o.data);
  const NodeSet targets = SelectTargets(data, o.targets);
  ExplanationFile file;
  file.method = o.method;
  file.task = data.meta.task;
  const bool node = data.meta.task == TaskKind::kNode;
  if (o.method == "explainer") {
    if (o.explainer.empty()) throw InvalidArgument("--explainer is required for method explainer");
    const ExplainerModel em = ExplainerFromJson(ReadInput(o.explainer));
    if (em.task() != data.meta.task) throw DataError("explainer task does not match the dataset");
    file.max_hop = em.max_hop();
    file.explanations = node ? Explain(em, data.graphs[0], targets)
                             : ExplainGraphs(em, data.graphs, targets);
  } else if (o.method == "random" || o.method == "exact") {
    if (node) {
      file.max_hop = o.max_hop;
      if (file.max_hop < 1) {
        if (o.model.empty()) throw InvalidArgument("--max-hop or --model is required");
        file.max_hop = ProbeMaxHop(ModelFromJson(ReadInput(o.model)), data.graphs[0],
                                   SelectTargets(data, "train"), 6);
      }
    }
    if (o.method == "random") {
      file.explanations = node ? RandomExplanations(data.graphs[0], targets, file.max_hop, o.seed)
                               : RandomGraphExplanations(data.graphs, targets, o.seed);
    } else {
      if (o.model.empty()) throw InvalidArgument("--model is required for method exact");
      const GcnModel model = ModelFromJson(ReadInput(o.model));
      if (node) {
        file.explanations =
            ExactExplanations(model, data.graphs[0], targets, file.max_hop, ctx.workers);
      } else {
        for (NodeId idx : targets) {
          const GraphOracle oracle(model, data.graphs[idx]);
          const std::vector<double> phi = ExactAttributionGraphAll(oracle);
          Explanation e;
          e.target = idx;
          for (NodeId v = 0; v < data.graphs[idx].num_nodes(); ++v) e.sources.push_back({v, phi[v]});
          SortSources(e.sources);
          file.explanations.push_back(std::move(e));
        }
      }
    }
  } else {
    throw InvalidArgument("unknown method '" + o.method + "' (expected explainer|random|exact)");
  }
  WriteOutput(o.out, ExplanationsToJsonl(file, ctx.Config()));
  std::cout << "explain: " << o.method << " ranked " << file.explanations.size()
            << " target(s) -> " << Resolve(o.out).string() << "\n";
}

// --- eval-fidelity ---------------------------------------------------------

struct EvalFidelityOptions {
  std::string data;
  std::string model;
  std::vector<std::string> explanations;
  std::string csv = "fidelity.csv";
  std::string out = "fidelity.json";
};

void RunEvalFidelity(const Context& ctx, const EvalFidelityOptions& o) {
  const LoadedData data = LoadData(o.data);
  const GcnModel model = ModelFromJson(ReadInput(o.model));
  std::vector<FidelityReport> reports;
  for (const std::string& path : o.explanations) {
    ExplanationFile file = ExplanationsFromJsonl(path);
    if (file.task != data.meta.task) throw DataError(path + ": task does not match the dataset");
    const std::vector<Explanation> sorted = SortedByTarget(std::move(file.explanations));
    reports.push_back(
        data.meta.task == TaskKind::kNode
            ? EvaluateFidelity(model, data.graphs[0], file.max_hop, sorted,
                               DefaultSparsityGrid(), file.method, ctx.workers)
            : EvaluateGraphFidelity(model, data.graphs, sorted, DefaultSparsityGrid(),
                                    file.method, ctx.workers));
  }
  const json config = ctx.Config();
  std::ostringstream csv;
  csv << "# config: " << config.dump() << "\n";
  WriteFidelityCsv(csv, reports);
  WriteOutput(o.csv, csv.str());
  json j{{"config", config}, {"reports", json::array()}};
  for (const FidelityReport& r : reports) {
    json rj = ParseJson(FidelityReportJson(r), "fidelity report");
    const auto [plus, minus] = MeanFidelity(r);
    rj["mean_fid_plus"] = plus;
    rj["mean_fid_minus"] = minus;
    j["reports"].push_back(std::move(rj));
  }
  WriteOutput(o.out, j.dump(2) + "\n");
  std::cout << "eval-fidelity:";
  for (const FidelityReport& r : reports) {
    const auto [plus, minus] = MeanFidelity(r);
    std::cout << " " << r.method << " Fid+ " << Fixed(plus) << " Fid- " << Fixed(minus) << ";";
  }
  std::cout << " -> " << Resolve(o.csv).string() << "\n";
}

// --- eval-auc --------------------------------------------------------------

struct EvalAucOptions {
  std::string data;
  std::string explanations;
  std::string out = "auc.json";
};

void RunEvalAuc(const Context& ctx, const EvalAucOptions& o) {
  const LoadedData data = LoadData(o.data);
  const ExplanationFile file = ExplanationsFromJsonl(o.explanations);
  if (data.meta.motif_masks.size() != data.graphs.size()) {
    throw DataError("dataset metadata has no motif masks");
  }
  const double auc = data.meta.task == TaskKind::kNode
                         ? AucNodes(file.explanations, data.meta.motif_masks[0])
                         : AucGraphs(file.explanations, data.meta.motif_masks);
  WriteOutput(o.out, json{{"config", ctx.Config()},
                          {"method", file.method},
                          {"auc", auc},
                          {"n_targets", file.explanations.size()}}
                             .dump(2) + "\n");
  std::cout << "eval-auc: " << file.method << " AUC " << Fixed(auc, 4) << " over "
            << file.explanations.size() << " target(s)\n";
}

// --- correlate -------------------------------------------------------------

struct CorrelateOptions {
  std::string data;
  std::string model;
  std::string method = "removal";
  int pairs = 100;
  int max_hop = -1;
  uint64_t seed = 0;
  std::string out = "correlation.csv";
};

void RunCorrelate(const Context& ctx, const CorrelateOptions& o) {
  const LoadedData data = LoadData(o.data);
  if (data.meta.task != TaskKind::kNode) throw InvalidArgument("correlate applies to node datasets");
  const GcnModel model = ModelFromJson(ReadInput(o.model));
  const int k = o.max_hop > 0 ? o.max_hop
                              : ProbeMaxHop(model, data.graphs[0], SelectTargets(data, "train"), 6);
  const CorrelationStudy study =
      RunCorrelationStudy(model, data.graphs[0], k, o.method, o.pairs, o.seed);
  std::ostringstream csv;
  json config = ctx.Config();
  config["max_hop"] = k;
  config["pearson_r"] = study.r ? json(*study.r) : json(nullptr);
  csv << "# config: " << config.dump() << "\n";
  WriteCorrelationCsv(csv, study);
  WriteOutput(o.out, csv.str());
  std::cout << "correlate: " << o.method << " " << study.points.size() << " pairs r = "
            << (study.r ? Fixed(*study.r, 4) : std::string("undefined")) << " -> "
            << Resolve(o.out).string() << "\n";
}

// --- bench -----------------------------------------------------------------

struct BenchOptions {
  std::string data;
  std::string model;
  std::string explainer;
  std::string targets = "test";
  int warmup = 1;
  int repeats = 3;
  std::string out = "bench.json";
};

json ThroughputJson(const ThroughputReport& r) {
  return json{{"method", r.method},         {"n_instances", r.n_instances},
              {"seconds", r.seconds},       {"throughput", r.throughput},
              {"repeat_seconds", r.repeat_seconds}, {"workers", r.workers},
              {"hardware", r.hardware}};
}

void RunBench(const Context& ctx, const BenchOptions& o) {
  const LoadedData data = LoadData(o.data);
  if (data.meta.task != TaskKind::kNode) throw InvalidArgument("bench applies to node datasets");
  const Graph& g = data.graphs[0];
  const GcnModel model = ModelFromJson(ReadInput(o.model));
  const ExplainerModel em = ExplainerFromJson(ReadInput(o.explainer));
  const int k = em.max_hop();
  // The exact oracle only runs where enumeration is within the cap.
  std::vector<NodeId> ids;
  for (NodeId v : SelectTargets(data, o.targets)) {
    if (KhopNeighbors(g, v, k).size() <= static_cast<size_t>(kDefaultEnumerationCap)) ids.push_back(v);
  }
  const NodeSet targets = NodeSet::FromUnsorted(std::move(ids));
  if (targets.empty()) throw DataError("no target has an enumerable neighbourhood");
  const auto n = static_cast<int64_t>(targets.size());
  ThroughputReport amortised = BenchThroughput(
      "explainer", [&] { Explain(em, g, targets); }, n, o.warmup, o.repeats);
  ThroughputReport exact = BenchThroughput(
      "exact", [&] { ExactExplanations(model, g, targets, k, ctx.workers); }, n, o.warmup,
      o.repeats);
  exact.workers = ctx.workers;
  const double speedup = amortised.throughput / exact.throughput;
  WriteOutput(o.out, json{{"config", ctx.Config()},
                          {"max_hop", k},
                          {"reports", {ThroughputJson(amortised), ThroughputJson(exact)}},
                          {"speedup", speedup}}
                             .dump(2) + "\n");
  std::cout << "bench: " << n << " targets, explainer " << Fixed(amortised.throughput, 1)
            << "/s, exact " << Fixed(exact.throughput, 1) << "/s, speedup "
            << Fixed(speedup, 1) << "x\n";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return kExitUsage;
    case ErrorKind::kData:
      return kExitData;
    case ErrorKind::kNumeric:
      return kExitNumeric;
  }
  return kExitData;
}

int Main(int argc, char** argv) {
  CLI::App app{"Removal-based GNN attribution and amortised explanation"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (defaults < file < flags)");
  app.allow_config_extras(CLI::config_extras_mode::ignore);
  app.option_defaults()->always_capture_default();
  Context ctx;
  ctx.root = &app;
  app.add_option("--workers", ctx.workers, "Worker threads for parallel paths")
      ->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  GenDataOptions gen_o;
  gen->add_option("name", gen_o.name, "Dataset name")->required();
  gen->add_option("--seed", gen_o.seed, "Generator seed");
  gen->add_option("--out", gen_o.out, "Output graph file (default <name>-s<seed>.json)");
  gen->add_option("--param", gen_o.params, "Generator parameter key=value");

  auto* tt = app.add_subcommand("train-target", "Train the target GCN");
  TrainTargetOptions tt_o;
  tt->add_option("--data", tt_o.data, "Dataset file")->required();
  tt->add_option("--out", tt_o.out, "Model checkpoint");
  tt->add_option("--seed", tt_o.seed, "Training seed");
  tt->add_option("--layers", tt_o.layers, "GCN layers")->check(CLI::PositiveNumber);
  tt->add_option("--hidden", tt_o.hidden, "Hidden width")->check(CLI::PositiveNumber);
  tt->add_option("--lr", tt_o.lr, "Learning rate (<= 0 keeps the default schedule)");
  tt->add_option("--epochs", tt_o.epochs, "Epochs (<= 0 keeps the default schedule)");
  tt->add_option("--restarts", tt_o.restarts, "Initialisations to try (<= 0 keeps the default)");

  auto* pr = app.add_subcommand("probe-maxhop", "Estimate the receptive field K");
  ProbeOptions pr_o;
  pr->add_option("--data", pr_o.data, "Dataset file")->required();
  pr->add_option("--model", pr_o.model, "Target checkpoint")->required();
  pr->add_option("--targets", pr_o.targets, "Probe nodes: train|valid|test|all");
  pr->add_option("--k-max", pr_o.k_max, "Largest radius to try")->check(CLI::PositiveNumber);
  pr->add_option("--out", pr_o.out, "Optional JSON report");

  auto* te = app.add_subcommand("train-explainer", "Train the amortised explainer");
  TrainExplainerOptions te_o;
  te->add_option("--data", te_o.data, "Dataset file")->required();
  te->add_option("--model", te_o.model, "Target checkpoint")->required();
  te->add_option("--out", te_o.out, "Explainer checkpoint");
  te->add_option("--mode", te_o.mode, "Training signal")
      ->check(CLI::IsMember({"removal", "mi"}));
  te->add_option("--embedding", te_o.embedding, "Embedding scheme")
      ->check(CLI::IsMember({"bidirectional", "single"}));
  te->add_option("--weighting", te_o.weighting, "Loss weighting over pairs")
      ->check(CLI::IsMember({"per-pair", "per-target"}));
  te->add_option("--max-hop", te_o.max_hop, "Radius K (-1 probes it)");
  te->add_option("--dim", te_o.dim, "Embedding width")->check(CLI::PositiveNumber);
  te->add_option("--hidden", te_o.hidden, "Backbone width")->check(CLI::PositiveNumber);
  te->add_option("--layers", te_o.layers, "Backbone layers (-1 uses K)");
  te->add_option("--lr", te_o.lr, "Learning rate (-1 picks by task)");
  te->add_option("--batch-size", te_o.batch_size, "Targets per step")->check(CLI::PositiveNumber);
  te->add_option("--epochs", te_o.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  te->add_option("--patience", te_o.patience, "Early-stopping patience")->check(CLI::PositiveNumber);
  te->add_option("--seed", te_o.seed, "Training seed");

  auto* ex = app.add_subcommand("explain", "Rank the neighbours of each target");
  ExplainOptions ex_o;
  ex->add_option("--data", ex_o.data, "Dataset file")->required();
  ex->add_option("--method", ex_o.method, "explainer|random|exact")
      ->check(CLI::IsMember({"explainer", "random", "exact"}));
  ex->add_option("--explainer", ex_o.explainer, "Explainer checkpoint");
  ex->add_option("--model", ex_o.model, "Target checkpoint (exact, or to probe K)");
  ex->add_option("--targets", ex_o.targets, "train|valid|test|all");
  ex->add_option("--max-hop", ex_o.max_hop, "Radius K for random and exact");
  ex->add_option("--seed", ex_o.seed, "Seed of the random ranking");
  ex->add_option("--out", ex_o.out, "JSONL output");

  auto* ef = app.add_subcommand("eval-fidelity", "Fidelity over the sparsity grid");
  EvalFidelityOptions ef_o;
  ef->add_option("--data", ef_o.data, "Dataset file")->required();
  ef->add_option("--model", ef_o.model, "Target checkpoint")->required();
  ef->add_option("--explanations", ef_o.explanations, "Explanation files")->required();
  ef->add_option("--csv", ef_o.csv, "CSV output");
  ef->add_option("--out", ef_o.out, "JSON output");

  auto* ea = app.add_subcommand("eval-auc", "ROC-AUC against motif masks");
  EvalAucOptions ea_o;
  ea->add_option("--data", ea_o.data, "Dataset file")->required();
  ea->add_option("--explanations", ea_o.explanations, "Explanation file")->required();
  ea->add_option("--out", ea_o.out, "JSON output");

  auto* co = app.add_subcommand("correlate", "Attribution score versus Fidelity+");
  CorrelateOptions co_o;
  co->add_option("--data", co_o.data, "Dataset file")->required();
  co->add_option("--model", co_o.model, "Target checkpoint")->required();
  co->add_option("--method", co_o.method, "removal|mi")->check(CLI::IsMember({"removal", "mi"}));
  co->add_option("--pairs", co_o.pairs, "Sampled pairs")->check(CLI::PositiveNumber);
  co->add_option("--max-hop", co_o.max_hop, "Radius K (-1 probes it)");
  co->add_option("--seed", co_o.seed, "Sampling seed");
  co->add_option("--out", co_o.out, "CSV output");

  auto* be = app.add_subcommand("bench", "Explainer versus exact-oracle throughput");
  BenchOptions be_o;
  be->add_option("--data", be_o.data, "Dataset file")->required();
  be->add_option("--model", be_o.model, "Target checkpoint")->required();
  be->add_option("--explainer", be_o.explainer, "Explainer checkpoint")->required();
  be->add_option("--targets", be_o.targets, "train|valid|test|all");
  be->add_option("--warmup", be_o.warmup, "Untimed runs");
  be->add_option("--repeats", be_o.repeats, "Timed runs (>= 3)");
  be->add_option("--out", be_o.out, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    ctx.command = app.get_subcommands().front();
    if (gen->parsed()) RunGenData(ctx, gen_o);
    if (tt->parsed()) RunTrainTarget(ctx, tt_o);
    if (pr->parsed()) RunProbe(ctx, pr_o);
    if (te->parsed()) RunTrainExplainer(ctx, te_o);
    if (ex->parsed()) RunExplain(ctx, ex_o);
    if (ef->parsed()) RunEvalFidelity(ctx, ef_o);
    if (ea->parsed()) RunEvalAuc(ctx, ea_o);
    if (co->parsed()) RunCorrelate(ctx, co_o);
    if (be->parsed()) RunBench(ctx, be_o);
  } catch (const Error& e) {
    std::cerr << "error (" << (e.kind() == ErrorKind::kInvalidArgument ? "usage"
                               : e.kind() == ErrorKind::kData          ? "data"
                                                                       : "numeric")
              << "): " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error (data): " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}

}  // namespace
}  // namespace amortex

int main(int argc, char** argv) { return amortex::Main(argc, argv); }
