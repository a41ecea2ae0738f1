#pragma once

#include <map>
#include <string>
#include <vector>

#include "genclass/corpus.hpp"
#include "genclass/retrieval.hpp"
#include "genclass/types.hpp"

namespace genclass {

// Schema files: JSON {"labels": [...], "definitions": {...}?, "uncertain_label": ...?}.
// The numeric map is positional and never stored.
LabelSchema load_schema(const std::string& path);
LabelSchema schema_from_json_text(const std::string& text);
std::string schema_to_json_text(const LabelSchema& schema);
void save_schema(const LabelSchema& schema, const std::string& path);

// Dataset files: JSON Lines {"id", "slots": {...}, "gold"}.
Dataset load_dataset(const std::string& path, Split split);
void save_dataset(const Dataset& dataset, const std::string& path);

// Prediction logs: JSON Lines {"example_id","raw_output","format_ok",
// "parsed_label"?,"confidence"?}.
std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::vector<Prediction>& predictions,
                      const std::string& path);
std::map<std::string, Prediction> predictions_by_id(
    const std::vector<Prediction>& predictions);

// Embedding files: JSON Lines {"id", "vector": [...]}; dim inferred from the
// first record and enforced thereafter.
EmbeddingStore load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingStore& store, const std::string& path);

// SFT corpus files: JSON Lines {"example_id","strategy","prompt","target",
// "token_length"?}.
std::vector<TrainingRecord> load_corpus(const std::string& path);
void save_corpus(const std::vector<TrainingRecord>& records,
                 const std::string& path);

// Pack files: JSON Lines {"mode","max_len","segments":[{"example_id","offset",
// "length"}],"total_length"}.
std::vector<Pack> load_packs(const std::string& path);
void save_packs(const std::vector<Pack>& packs, const std::string& path);

// Reason-triple files: JSON Lines {"example_id","think"?,"reason","class"}.
std::vector<ReasonTriple> load_reason_triples(const std::string& path);
void save_reason_triples(const std::vector<ReasonTriple>& triples,
                         const std::string& path);

std::string metrics_to_json_text(const MetricsReport& report);
MetricsReport metrics_from_json_text(const std::string& text);

}  // namespace genclass
