#include "genclass/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "genclass/errors.hpp"

namespace genclass {

ConfusionCounts confusion_counts(
    const std::vector<std::string>& gold,
    const std::vector<std::optional<std::string>>& pred,
    const std::vector<std::string>& label_set) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorKind::Validation, "gold/pred length mismatch");
  }
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < label_set.size(); ++i) index[label_set[i]] = i;

  ConfusionCounts counts;
  counts.tp.assign(label_set.size(), 0);
  counts.fp.assign(label_set.size(), 0);
  counts.fn.assign(label_set.size(), 0);

  for (size_t i = 0; i < gold.size(); ++i) {
    auto g = index.find(gold[i]);
    if (g == index.end()) {
      throw Error(ErrorKind::UnknownLabel, "gold label not in label set: " + gold[i]);
    }
    if (!pred[i]) {
      counts.fn[g->second] += 1;
      continue;
    }
    auto p = index.find(*pred[i]);
    if (p == index.end()) {
      throw Error(ErrorKind::UnknownLabel,
                  "predicted label not in label set: " + *pred[i]);
    }
    if (p->second == g->second) {
      counts.tp[g->second] += 1;
    } else {
      counts.fp[p->second] += 1;
      counts.fn[g->second] += 1;
    }
  }
  return counts;
}

double macro_f1(const std::vector<std::string>& gold,
                const std::vector<std::optional<std::string>>& pred,
                const std::vector<std::string>& label_set) {
  if (label_set.empty()) return 0.0;
  ConfusionCounts c = confusion_counts(gold, pred, label_set);
  double sum = 0.0;
  for (size_t i = 0; i < label_set.size(); ++i) {
    double tp = static_cast<double>(c.tp[i]);
    double precision_den = tp + static_cast<double>(c.fp[i]);
    double recall_den = tp + static_cast<double>(c.fn[i]);
    double precision = precision_den > 0 ? tp / precision_den : 0.0;
    double recall = recall_den > 0 ? tp / recall_den : 0.0;
    double pr = precision + recall;
    sum += pr > 0 ? 2.0 * precision * recall / pr : 0.0;
  }
  return sum / static_cast<double>(label_set.size());
}

MetricsReport evaluate(const std::vector<Prediction>& predictions,
                       const Dataset& test, const LabelSchema& schema) {
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.example_id, &p).second) {
      throw Error(ErrorKind::Validation,
                  "duplicate prediction for example: " + p.example_id);
    }
  }
  if (by_id.size() != test.examples.size()) {
    throw Error(ErrorKind::Validation,
                "prediction coverage mismatch: " + std::to_string(by_id.size()) +
                    " predictions for " + std::to_string(test.examples.size()) +
                    " examples");
  }

  MetricsReport report;
  report.n_total = test.examples.size();

  std::vector<std::string> gold_all, gold_fmt;
  std::vector<std::optional<std::string>> pred_all, pred_fmt;
  gold_all.reserve(report.n_total);
  pred_all.reserve(report.n_total);

  for (const auto& ex : test.examples) {
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::Validation, "missing prediction for example: " + ex.id);
    }
    const Prediction& p = *it->second;
    gold_all.push_back(ex.gold);
    if (p.format_ok && p.parsed_label) {
      pred_all.push_back(p.parsed_label);
      gold_fmt.push_back(ex.gold);
      pred_fmt.push_back(p.parsed_label);
      report.n_format_ok += 1;
      if (*p.parsed_label == ex.gold) report.n_correct += 1;
    } else {
      pred_all.push_back(std::nullopt);
    }
  }

  double n = static_cast<double>(report.n_total);
  report.fmt_suc_ratio = n > 0 ? static_cast<double>(report.n_format_ok) / n : 0.0;
  report.overall_acc = n > 0 ? static_cast<double>(report.n_correct) / n : 0.0;
  report.overall_macro_f1 = n > 0 ? macro_f1(gold_all, pred_all, schema.labels) : 0.0;

  if (report.n_format_ok == 0) {
    report.fmt_subset_empty = true;
    report.fmt_suc_acc = 0.0;
    report.fmt_suc_macro_f1 = 0.0;
  } else {
    report.fmt_suc_acc = static_cast<double>(report.n_correct) /
                         static_cast<double>(report.n_format_ok);
    report.fmt_suc_macro_f1 = macro_f1(gold_fmt, pred_fmt, schema.labels);
  }
  return report;
}

double round_percent(double fraction) {
  double percent = fraction * 100.0;
  return std::floor(percent * 100.0 + 0.5) / 100.0;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round_percent(fraction));
  return buf;
}

}  // namespace genclass
