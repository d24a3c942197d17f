#include "rda/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rda/errors.hpp"

namespace rda {

double f1_score(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  EvalReport r{tp, fp, tn, fn};
  auto ratio = [&r](std::size_t num, std::size_t den) {
    if (den == 0) {
      r.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.recall = ratio(tp, tp + fn);
  r.precision = ratio(tp, tp + fp);
  r.specificity = ratio(tn, tn + fp);
  r.accuracy = ratio(tp + tn, tp + fp + tn + fn);
  if (r.precision + r.recall == 0.0) r.degenerate = true;
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

EvalReport confusion_metrics(std::span<const Label> labels, std::span<const Label> predictions, Label positive) {
  if (labels.size() != predictions.size()) {
    throw InputError("got " + std::to_string(labels.size()) + " labels but " + std::to_string(predictions.size()) +
                     " predictions");
  }
  if (labels.empty()) throw InputError("cannot evaluate an empty prediction set");
  if (positive == Label::Unlabeled) throw InputError("positive class must be ID or OOD");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::Unlabeled || predictions[i] == Label::Unlabeled) {
      throw InputError("unlabeled entry at index " + std::to_string(i));
    }
    const bool actual = labels[i] == positive;
    const bool predicted = predictions[i] == positive;
    if (actual && predicted) {
      ++tp;
    } else if (!actual && predicted) {
      ++fp;
    } else if (!actual) {
      ++tn;
    } else {
      ++fn;
    }
  }
  return metrics_from_counts(tp, fp, tn, fn);
}

std::vector<SweepPoint> sweep_thresholds(std::span<const double> diffs, std::span<const Label> labels,
                                         std::span<const double> grid) {
  if (diffs.size() != labels.size()) throw InputError("one label per score is required");
  if (grid.empty()) throw InputError("threshold grid is empty");
  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  std::vector<Label> predictions(diffs.size());
  for (double thr : grid) {
    for (std::size_t i = 0; i < diffs.size(); ++i) predictions[i] = diffs[i] > thr ? Label::Ood : Label::Id;
    out.push_back({thr, confusion_metrics(labels, predictions)});
  }
  return out;
}

double roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InputError("one label per score is required");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney U from average ranks.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      const Label l = labels[order[k]];
      if (l == Label::Ood) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      } else if (l == Label::Id) {
        ++n_neg;
      } else {
        throw InputError("unlabeled entry in AUC input");
      }
    }
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw InputError("AUC needs both ID and OOD samples");
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json doc;
  doc["f1"] = r.f1;
  doc["recall"] = r.recall;
  doc["precision"] = r.precision;
  doc["specificity"] = r.specificity;
  doc["accuracy"] = r.accuracy;
  doc["tp"] = r.tp;
  doc["fp"] = r.fp;
  doc["tn"] = r.tn;
  doc["fn"] = r.fn;
  doc["degenerate"] = r.degenerate;
  return doc.dump(2) + "\n";
}

namespace {

constexpr const char* kColumns[] = {"F1", "Recall", "Precision", "Specificity", "Accuracy"};

std::string metric_row(const std::string& name, std::size_t name_width, const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %8.4f  %9.4f  %11.4f  %8.4f", static_cast<int>(name_width),
                name.c_str(), r.f1, r.recall, r.precision, r.specificity, r.accuracy);
  return buf;
}

std::string header_row(const std::string& first, std::size_t name_width) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %9s  %11s  %8s", static_cast<int>(name_width), first.c_str(),
                kColumns[0], kColumns[1], kColumns[2], kColumns[3], kColumns[4]);
  return buf;
}

}  // namespace

std::string report_table(const EvalReport& report, const std::string& row_name) {
  const std::size_t width = std::max<std::size_t>(row_name.size(), 5);
  std::ostringstream out;
  out << header_row("", width) << '\n' << metric_row(row_name, width, report) << '\n';
  return out.str();
}

std::string sweep_table(std::span<const SweepPoint> sweep) {
  std::vector<std::string> names;
  std::size_t width = 9;
  for (const auto& p : sweep) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", p.threshold);
    names.emplace_back(buf);
    width = std::max(width, names.back().size());
  }
  std::ostringstream out;
  out << header_row("threshold", width) << '\n';
  for (std::size_t i = 0; i < sweep.size(); ++i) out << metric_row(names[i], width, sweep[i].report) << '\n';
  return out.str();
}

}  // namespace rda
