#include "genclass/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "genclass/errors.hpp"
#include "genclass/util.hpp"

namespace genclass {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json parse_json(const std::string& text, const std::string& what) {
  ordered_json j = ordered_json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorKind::Io, "malformed JSON in " + what);
  return j;
}

// Applies fn to every non-empty line. Line numbers are 1-based for messages.
void for_each_jsonl(const std::string& path,
                    const std::function<void(const ordered_json&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open file: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_view(line).empty()) continue;
    fn(parse_json(line, path + ":" + std::to_string(lineno)), lineno);
  }
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw Error(ErrorKind::Io, "cannot write file: " + path);
  }
  void row(const ordered_json& j) { out_ << j.dump() << '\n'; }
  ~JsonlWriter() { out_.flush(); }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace

LabelSchema schema_from_json_text(const std::string& text) {
  ordered_json j = parse_json(text, "schema");
  LabelSchema schema;
  if (!j.contains("labels") || !j["labels"].is_array()) {
    throw Error(ErrorKind::Io, "schema needs a \"labels\" array");
  }
  for (const auto& label : j["labels"]) {
    schema.labels.push_back(trim(label.get<std::string>()));
  }
  if (j.contains("definitions")) {
    for (const auto& [label, definition] : j["definitions"].items()) {
      schema.definitions[label] = definition.get<std::string>();
    }
  }
  if (j.contains("uncertain_label") && !j["uncertain_label"].is_null()) {
    schema.uncertain_label = j["uncertain_label"].get<std::string>();
  }
  return schema;
}

LabelSchema load_schema(const std::string& path) {
  return schema_from_json_text(read_file(path));
}

std::string schema_to_json_text(const LabelSchema& schema) {
  ordered_json j;
  j["labels"] = schema.labels;
  if (!schema.definitions.empty()) {
    ordered_json defs = ordered_json::object();
    // Definition order follows label order for readable files.
    for (const auto& label : schema.labels) {
      auto it = schema.definitions.find(label);
      if (it != schema.definitions.end()) defs[label] = it->second;
    }
    j["definitions"] = defs;
  }
  if (schema.uncertain_label) j["uncertain_label"] = *schema.uncertain_label;
  return j.dump(2) + "\n";
}

void save_schema(const LabelSchema& schema, const std::string& path) {
  write_file(path, schema_to_json_text(schema));
}

Dataset load_dataset(const std::string& path, Split split) {
  Dataset dataset;
  dataset.name = std::filesystem::path(path).stem().string();
  dataset.split = split;
  for_each_jsonl(path, [&](const ordered_json& j, size_t lineno) {
    Example ex;
    if (!j.contains("id") || !j.contains("slots") || !j.contains("gold")) {
      throw Error(ErrorKind::Io, path + ":" + std::to_string(lineno) +
                                     ": example needs id, slots and gold");
    }
    ex.id = j["id"].get<std::string>();
    for (const auto& [name, text] : j["slots"].items()) {
      ex.slots[name] = text.get<std::string>();
    }
    ex.gold = j["gold"].get<std::string>();
    dataset.examples.push_back(std::move(ex));
  });
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  JsonlWriter out(path);
  for (const auto& ex : dataset.examples) {
    ordered_json j;
    j["id"] = ex.id;
    j["slots"] = ex.slots;
    j["gold"] = ex.gold;
    out.row(j);
  }
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::vector<Prediction> predictions;
  for_each_jsonl(path, [&](const ordered_json& j, size_t) {
    Prediction p;
    p.example_id = j.at("example_id").get<std::string>();
    p.raw_output = j.value("raw_output", std::string{});
    p.format_ok = j.at("format_ok").get<bool>();
    if (j.contains("parsed_label") && !j["parsed_label"].is_null()) {
      p.parsed_label = j["parsed_label"].get<std::string>();
    }
    if (j.contains("confidence") && !j["confidence"].is_null()) {
      p.confidence = j["confidence"].get<double>();
    }
    predictions.push_back(std::move(p));
  });
  return predictions;
}

void save_predictions(const std::vector<Prediction>& predictions,
                      const std::string& path) {
  JsonlWriter out(path);
  for (const auto& p : predictions) {
    ordered_json j;
    j["example_id"] = p.example_id;
    j["raw_output"] = p.raw_output;
    j["format_ok"] = p.format_ok;
    if (p.parsed_label) j["parsed_label"] = *p.parsed_label;
    if (p.confidence) j["confidence"] = *p.confidence;
    out.row(j);
  }
}

std::map<std::string, Prediction> predictions_by_id(
    const std::vector<Prediction>& predictions) {
  std::map<std::string, Prediction> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.example_id, p).second) {
      throw Error(ErrorKind::DuplicateId,
                  "duplicate prediction for example: " + p.example_id);
    }
  }
  return by_id;
}

EmbeddingStore load_embeddings(const std::string& path) {
  EmbeddingStore store;
  for_each_jsonl(path, [&](const ordered_json& j, size_t) {
    store.add(j.at("id").get<std::string>(),
              j.at("vector").get<std::vector<double>>());
  });
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::string& path) {
  JsonlWriter out(path);
  for (const auto& [id, vec] : store.entries()) {
    ordered_json j;
    j["id"] = id;
    j["vector"] = vec;
    out.row(j);
  }
}

std::vector<TrainingRecord> load_corpus(const std::string& path) {
  std::vector<TrainingRecord> records;
  for_each_jsonl(path, [&](const ordered_json& j, size_t) {
    TrainingRecord r;
    r.example_id = j.at("example_id").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.prompt = j.at("prompt").get<std::string>();
    r.target = j.at("target").get<std::string>();
    if (j.contains("token_length") && !j["token_length"].is_null()) {
      r.token_length = j["token_length"].get<size_t>();
    }
    records.push_back(std::move(r));
  });
  return records;
}

void save_corpus(const std::vector<TrainingRecord>& records,
                 const std::string& path) {
  JsonlWriter out(path);
  for (const auto& r : records) {
    ordered_json j;
    j["example_id"] = r.example_id;
    j["strategy"] = r.strategy;
    j["prompt"] = r.prompt;
    j["target"] = r.target;
    if (r.token_length) j["token_length"] = *r.token_length;
    out.row(j);
  }
}

std::vector<Pack> load_packs(const std::string& path) {
  std::vector<Pack> packs;
  for_each_jsonl(path, [&](const ordered_json& j, size_t) {
    Pack p;
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "standard") {
      p.mode = PackMode::Standard;
    } else if (mode == "neat") {
      p.mode = PackMode::Neat;
    } else {
      throw Error(ErrorKind::Io, "unknown pack mode: " + mode);
    }
    p.max_len = j.at("max_len").get<size_t>();
    p.total_length = j.at("total_length").get<size_t>();
    for (const auto& seg : j.at("segments")) {
      p.segments.push_back({seg.at("example_id").get<std::string>(),
                            seg.at("offset").get<size_t>(),
                            seg.at("length").get<size_t>()});
    }
    packs.push_back(std::move(p));
  });
  return packs;
}

void save_packs(const std::vector<Pack>& packs, const std::string& path) {
  JsonlWriter out(path);
  for (const auto& p : packs) {
    ordered_json j;
    j["mode"] = p.mode == PackMode::Standard ? "standard" : "neat";
    j["max_len"] = p.max_len;
    ordered_json segments = ordered_json::array();
    for (const auto& seg : p.segments) {
      segments.push_back({{"example_id", seg.example_id},
                          {"offset", seg.offset},
                          {"length", seg.length}});
    }
    j["segments"] = segments;
    j["total_length"] = p.total_length;
    out.row(j);
  }
}

std::vector<ReasonTriple> load_reason_triples(const std::string& path) {
  std::vector<ReasonTriple> triples;
  for_each_jsonl(path, [&](const ordered_json& j, size_t) {
    ReasonTriple t;
    t.example_id = j.at("example_id").get<std::string>();
    if (j.contains("think") && !j["think"].is_null()) {
      t.think = j["think"].get<std::string>();
    }
    t.reason = j.at("reason").get<std::string>();
    t.class_label = j.at("class").get<std::string>();
    triples.push_back(std::move(t));
  });
  return triples;
}

void save_reason_triples(const std::vector<ReasonTriple>& triples,
                         const std::string& path) {
  JsonlWriter out(path);
  for (const auto& t : triples) {
    ordered_json j;
    j["example_id"] = t.example_id;
    if (t.think) j["think"] = *t.think;
    j["reason"] = t.reason;
    j["class"] = t.class_label;
    out.row(j);
  }
}

std::string metrics_to_json_text(const MetricsReport& report) {
  ordered_json j;
  j["n_total"] = report.n_total;
  j["n_format_ok"] = report.n_format_ok;
  j["n_correct"] = report.n_correct;
  j["fmt_suc_ratio"] = report.fmt_suc_ratio;
  j["fmt_suc_acc"] = report.fmt_suc_acc;
  j["fmt_suc_macro_f1"] = report.fmt_suc_macro_f1;
  j["overall_acc"] = report.overall_acc;
  j["overall_macro_f1"] = report.overall_macro_f1;
  j["fmt_subset_empty"] = report.fmt_subset_empty;
  return j.dump();
}

MetricsReport metrics_from_json_text(const std::string& text) {
  ordered_json j = parse_json(text, "metrics report");
  MetricsReport r;
  r.n_total = j.at("n_total").get<size_t>();
  r.n_format_ok = j.at("n_format_ok").get<size_t>();
  r.n_correct = j.at("n_correct").get<size_t>();
  r.fmt_suc_ratio = j.at("fmt_suc_ratio").get<double>();
  r.fmt_suc_acc = j.at("fmt_suc_acc").get<double>();
  r.fmt_suc_macro_f1 = j.at("fmt_suc_macro_f1").get<double>();
  r.overall_acc = j.at("overall_acc").get<double>();
  r.overall_macro_f1 = j.at("overall_macro_f1").get<double>();
  r.fmt_subset_empty = j.value("fmt_subset_empty", false);
  return r;
}

}  // namespace genclass
