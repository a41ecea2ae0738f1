#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genclass/types.hpp"

namespace genclass {

/// Per-label confusion counts, indexed like the label set they were computed
/// over. An absent prediction contributes a false negative for its gold class
/// and a false positive for nothing.
struct ConfusionCounts {
  std::vector<size_t> tp;
  std::vector<size_t> fp;
  std::vector<size_t> fn;
};

ConfusionCounts confusion_counts(
    const std::vector<std::string>& gold,
    const std::vector<std::optional<std::string>>& pred,
    const std::vector<std::string>& label_set);

/// Mean per-class F1 over the full declared label set; classes with
/// P + R = 0 contribute 0.
double macro_f1(const std::vector<std::string>& gold,
                const std::vector<std::optional<std::string>>& pred,
                const std::vector<std::string>& label_set);

/// The five-metric report. fmt-suc accuracy and macro-F1 are computed on the
/// format-matched subset only; the overall metrics score format failures as
/// wrong (absent) predictions.
MetricsReport evaluate(const std::vector<Prediction>& predictions,
                       const Dataset& test, const LabelSchema& schema);

// Fraction -> percent with half-up rounding to 2 decimals, the table format.
double round_percent(double fraction);
std::string format_percent(double fraction);

}  // namespace genclass
