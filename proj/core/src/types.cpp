#include "genclass/types.hpp"

#include <set>

#include "genclass/errors.hpp"
#include "genclass/util.hpp"

namespace genclass {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::InsufficientExamples: return "insufficient-examples";
    case ErrorKind::UnknownId: return "unknown-id";
    case ErrorKind::DuplicateId: return "duplicate-id";
    case ErrorKind::UnknownLabel: return "unknown-label";
    case ErrorKind::MissingDefinitions: return "missing-definitions";
    case ErrorKind::ShotCountMismatch: return "shot-count-mismatch";
    case ErrorKind::MissingPrediction: return "missing-prediction";
    case ErrorKind::MissingConfidence: return "missing-confidence";
    case ErrorKind::MissingUncertainLabel: return "missing-uncertain-label";
    case ErrorKind::MissingTokenLength: return "missing-token-length";
    case ErrorKind::RecordExceedsMaxLen: return "record-exceeds-max-len";
    case ErrorKind::EmptySequence: return "empty-sequence";
    case ErrorKind::ZeroVector: return "zero-vector";
    case ErrorKind::DimMismatch: return "dim-mismatch";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::BackendApi: return "backend-api";
    case ErrorKind::ScoringUnsupported: return "backend-lacks-scoring";
  }
  return "unknown";
}

std::optional<size_t> LabelSchema::index_of(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  return std::nullopt;
}

bool LabelSchema::has_definitions() const {
  if (definitions.empty()) return false;
  for (const auto& label : labels) {
    if (!definitions.contains(label)) return false;
  }
  return true;
}

const char* to_string(Split split) {
  return split == Split::Train ? "train" : "test";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw Error(ErrorKind::Validation, "unknown split: " + s);
}

const Example* Dataset::find(const std::string& id) const {
  for (const auto& ex : examples) {
    if (ex.id == id) return &ex;
  }
  return nullptr;
}

ValidationReport validate_schema(const LabelSchema& schema) {
  ValidationReport report;
  if (schema.labels.empty()) report.fail("schema has no labels");

  std::set<std::string> seen;
  for (const auto& label : schema.labels) {
    std::string trimmed = trim(label);
    if (trimmed.empty()) report.fail("empty label");
    if (trimmed != label) report.fail("label not trimmed: '" + label + "'");
    if (!seen.insert(trimmed).second) report.fail("duplicate label: " + trimmed);
  }

  for (const auto& [label, definition] : schema.definitions) {
    if (!schema.has_label(label)) report.fail("definition for unknown label: " + label);
    if (trim(definition).empty()) report.fail("empty definition for label: " + label);
  }

  if (schema.uncertain_label) {
    if (trim(*schema.uncertain_label).empty()) {
      report.fail("uncertain_label is empty");
    } else if (schema.has_label(*schema.uncertain_label)) {
      report.fail("uncertain_label collides with class label: " + *schema.uncertain_label);
    }
  }
  return report;
}

ValidationReport validate_dataset(const Dataset& dataset, const LabelSchema& schema) {
  ValidationReport report;
  std::set<std::string> ids;
  for (const auto& ex : dataset.examples) {
    if (ex.id.empty()) report.fail("example with empty id");
    if (!ids.insert(ex.id).second) report.fail("duplicate example id: " + ex.id);
    if (ex.slots.empty()) report.fail("example " + ex.id + " has no slots");
    bool gold_ok = schema.has_label(ex.gold) ||
                   (schema.uncertain_label && ex.gold == *schema.uncertain_label);
    if (!gold_ok) report.fail("example " + ex.id + " has unknown gold label: " + ex.gold);
  }
  return report;
}

}  // namespace genclass
