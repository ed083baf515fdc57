#include "dementia/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dementia::metrics {

namespace {

void check_binary(std::span<const int> labels) {
  for (int v : labels)
    if (v != 0 && v != 1) throw std::invalid_argument("labels must be 0 or 1");
}

Ratio ratio(double num, double den) { return den > 0 ? Ratio{num / den, false} : Ratio{0.0, true}; }

}  // namespace

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("confusion: length mismatch");
  check_binary(predicted);
  check_binary(truth);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) (predicted[i] == 1 ? cm.tp : cm.fn)++;
    else (predicted[i] == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

Summary summarize(const ConfusionMatrix& cm) {
  Summary s;
  s.accuracy = ratio(static_cast<double>(cm.tp + cm.tn), static_cast<double>(cm.total()));
  s.precision = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  s.recall = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
  s.f1 = ratio(2.0 * s.precision.value * s.recall.value, s.precision.value + s.recall.value);
  s.f1.degenerate = s.f1.degenerate || s.precision.degenerate || s.recall.degenerate;
  return s;
}

RocCurve roc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw std::invalid_argument("roc: length mismatch");
  check_binary(truth);
  const auto pos = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1));
  const std::size_t neg = truth.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc: both classes must be present");
  for (double s : scores)
    if (std::isnan(s)) throw std::invalid_argument("roc: NaN score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (truth[order[i]] == 1 ? tp : fp)++;
    const RocPoint& prev = curve.points.back();
    const RocPoint next{threshold, static_cast<double>(fp) / neg, static_cast<double>(tp) / pos};
    curve.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    curve.points.push_back(next);
  }
  return curve;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  const auto prev = out.precision(10);
  for (const auto& p : curve.points) out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
  out.precision(prev);
}

ReportRow report_row(std::size_t epoch, std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw std::invalid_argument("report_row: scores and labels differ in length");
  std::vector<int> predicted(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] > 0.5 ? 1 : 0;
  ReportRow row{epoch, confusion(predicted, truth), {}, std::nullopt};
  row.summary = summarize(row.cm);
  if (row.cm.tp + row.cm.fn > 0 && row.cm.tn + row.cm.fp > 0) row.auc = roc(scores, truth).auc;
  return row;
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << "epoch,accuracy,precision,recall,f1,auc,tp,tn,fp,fn\n";
  const auto prev = out.precision(10);
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.summary.accuracy.value << ',' << r.summary.precision.value << ','
        << r.summary.recall.value << ',' << r.summary.f1.value << ',';
    if (r.auc) out << *r.auc;
    out << ',' << r.cm.tp << ',' << r.cm.tn << ',' << r.cm.fp << ',' << r.cm.fn << '\n';
  }
  out.precision(prev);
}

}  // namespace dementia::metrics
