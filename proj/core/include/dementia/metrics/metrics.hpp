#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace dementia::metrics {

/// Demented is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Labels must be 0 or 1 and the spans equally long.
ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth);

/// A ratio whose denominator was zero reads 0 with `degenerate` set.
struct Ratio {
  double value = 0.0;
  bool degenerate = false;
};

struct Summary {
  Ratio accuracy, precision, recall, f1;
};

Summary summarize(const ConfusionMatrix& cm);

struct RocPoint {
  double threshold;  // predict positive when score >= threshold
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;
};

/// Sweeps every distinct score as a threshold, highest first, and integrates
/// with the trapezoid rule. Tied scores form a single step, which makes the
/// area equal the pairwise concordance with ties counted as one half.
/// Throws std::invalid_argument unless both classes are present.
RocCurve roc(std::span<const double> scores, std::span<const int> truth);

/// Header `threshold,fpr,tpr`.
void write_roc_csv(std::ostream& out, const RocCurve& curve);

/// One row of a multi-epoch performance report.
struct ReportRow {
  std::size_t epoch = 0;
  ConfusionMatrix cm;
  Summary summary;
  std::optional<double> auc;  // absent when only one class is present
};

/// Scores are thresholded at > 0.5.
ReportRow report_row(std::size_t epoch, std::span<const double> scores, std::span<const int> truth);

/// Header `epoch,accuracy,precision,recall,f1,auc,tp,tn,fp,fn`; a missing
/// AUC is an empty cell.
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);

}  // namespace dementia::metrics
