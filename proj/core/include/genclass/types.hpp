#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace genclass {

/// Ordered class labels with optional per-class definitions. The numeric map
/// is always the 0-based position of a label in `labels`; it is derived, never
/// stored.
struct LabelSchema {
  std::vector<std::string> labels;
  std::map<std::string, std::string> definitions;
  std::optional<std::string> uncertain_label;

  // Label -> 0-based index, or nullopt for non-members.
  std::optional<size_t> index_of(const std::string& label) const;
  bool has_label(const std::string& label) const { return index_of(label).has_value(); }
  bool has_definitions() const;
};

enum class Split { Train, Test };

const char* to_string(Split split);
Split split_from_string(const std::string& s);

/// One identified text record. `slots` keeps named text fields so single-text
/// and sentence-pair tasks share the type.
struct Example {
  std::string id;
  std::map<std::string, std::string> slots;
  std::string gold;
};

struct Dataset {
  std::string name;
  Split split = Split::Train;
  std::vector<Example> examples;
  std::string schema_ref;

  const Example* find(const std::string& id) const;
};

/// Parse outcome for one test example. `parsed_label` is present exactly when
/// `format_ok` is true. `confidence` is the mean token log-probability of the
/// emitted label tokens when the backend supplied logprobs.
struct Prediction {
  std::string example_id;
  std::string raw_output;
  bool format_ok = false;
  std::optional<std::string> parsed_label;
  std::optional<double> confidence;
};

/// The five-metric report plus its underlying counts. All fractions are raw
/// (not percentages).
struct MetricsReport {
  size_t n_total = 0;
  size_t n_format_ok = 0;
  size_t n_correct = 0;
  double fmt_suc_ratio = 0.0;
  double fmt_suc_acc = 0.0;
  double fmt_suc_macro_f1 = 0.0;
  double overall_acc = 0.0;
  double overall_macro_f1 = 0.0;
  // True when no output parsed; the fmt-suc metrics are then 0 by convention.
  bool fmt_subset_empty = false;

  bool operator==(const MetricsReport&) const = default;
};

/// Pass/fail report; a violation entry per broken invariant.
struct ValidationReport {
  std::vector<std::string> violations;

  bool pass() const { return violations.empty(); }
  void fail(std::string message) { violations.push_back(std::move(message)); }
};

ValidationReport validate_schema(const LabelSchema& schema);
ValidationReport validate_dataset(const Dataset& dataset, const LabelSchema& schema);

}  // namespace genclass
