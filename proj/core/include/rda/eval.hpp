#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rda/feature_io.hpp"

namespace rda {

/// Confusion counts with OOD as the positive class (by default) and the five
/// reported metrics. Ratios with a zero denominator are 0 and set
/// `degenerate`.
struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double f1 = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
  bool degenerate = false;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall) noexcept;

EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

/// Throws InputError on length mismatch, empty input, or an Unlabeled entry.
EvalReport confusion_metrics(std::span<const Label> labels, std::span<const Label> predictions,
                             Label positive = Label::Ood);

struct SweepPoint {
  double threshold = 0.0;
  EvalReport report;
};

/// One report per grid threshold, classifying diff > threshold as OOD.
std::vector<SweepPoint> sweep_thresholds(std::span<const double> diffs, std::span<const Label> labels,
                                         std::span<const double> grid);

/// Probability that a random OOD score exceeds a random ID score (ties count
/// one half). Throws InputError if either class is absent.
double roc_auc(std::span<const double> scores, std::span<const Label> labels);

std::string report_to_json(const EvalReport& report);
/// Aligned text table, columns F1, Recall, Precision, Specificity, Accuracy.
std::string report_table(const EvalReport& report, const std::string& row_name = "model");
std::string sweep_table(std::span<const SweepPoint> sweep);

}  // namespace rda
