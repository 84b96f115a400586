#include "impact/roc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "impact/error.hpp"

namespace impact {

double RocCurve::trapezoid_area() const {
  double area = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  }
  return area;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc: scores and labels differ in length");
  RocCurve curve;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(scores[i])) throw ValidationError("roc: NaN score");
    labels[i] > 0 ? ++curve.positives : ++curve.negatives;
  }
  if (curve.positives == 0 || curve.negatives == 0) throw ValidationError("roc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const double P = static_cast<double>(curve.positives);
  const double N = static_cast<double>(curve.negatives);
  curve.points.push_back({0.0, 0.0, INFINITY});
  std::uint64_t tp = 0, fp = 0;
  // Twice the area in units of one (positive, negative) cell.
  std::uint64_t twice_area = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    std::uint64_t dtp = 0, dfp = 0;
    while (i < order.size() && scores[order[i]] == s) {
      labels[order[i]] > 0 ? ++dtp : ++dfp;
      ++i;
    }
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    curve.points.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P, s});
  }
  curve.auc = static_cast<double>(twice_area) / (2.0 * P * N);
  return curve;
}

double auc_score(std::span<const double> scores, std::span<const int> labels) { return roc_auc(scores, labels).auc; }

}  // namespace impact
