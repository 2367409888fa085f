#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"

namespace jointsel {

/// Positive class is +1 (severe). Sensitivity / specificity are empty when
/// the corresponding class is absent from y_true.
struct ConfusionMetrics {
  double accuracy = 0.0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

inline ConfusionMetrics confusion_metrics(const LabelVector& y_true, const LabelVector& y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::kDimensionMismatch, "y_true and y_pred differ in length");
  if (y_true.size() == 0) throw Error(ErrorCode::kInvalidArgument, "no samples");
  long tp = 0, tn = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    const bool truth = y_true[i] > 0;
    const bool pred = y_pred[i] > 0;
    if (truth && pred) ++tp;
    else if (truth) ++fn;
    else if (pred) ++fp;
    else ++tn;
  }
  ConfusionMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(y_true.size());
  if (tp + fn > 0) m.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (tn + fp > 0) m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return m;
}

/// Mann-Whitney AUC via mid-ranks: (R+ - n+(n+ + 1)/2) / (n+ n-), which is the
/// number of (positive, negative) pairs ordered correctly plus half the ties.
inline std::optional<double> auc(const LabelVector& y_true, const Vector& scores) {
  if (y_true.size() != scores.size())
    throw Error(ErrorCode::kDimensionMismatch, "labels and scores differ in length");
  const auto n = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)];
  });

  double positive_rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    const double value = scores[static_cast<Eigen::Index>(order[start])];
    while (end < n && scores[static_cast<Eigen::Index>(order[end])] == value) ++end;
    // Ranks are 1-based; the tie block [start, end) shares their mean.
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t r = start; r < end; ++r) {
      if (y_true[static_cast<Eigen::Index>(order[r])] > 0) {
        positive_rank_sum += mid_rank;
        n_pos += 1.0;
      }
    }
    start = end;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;
  return (positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

/// Pearson correlation; empty when either input has zero variance or fewer
/// than two entries.
inline std::optional<double> pearson_cc(const Vector& z_true, const Vector& z_pred) {
  if (z_true.size() != z_pred.size())
    throw Error(ErrorCode::kDimensionMismatch, "inputs differ in length");
  if (z_true.size() < 2) return std::nullopt;
  const Eigen::ArrayXd a = z_true.array() - z_true.mean();
  const Eigen::ArrayXd b = z_pred.array() - z_pred.mean();
  const double saa = (a * a).sum();
  const double sbb = (b * b).sum();
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp((a * b).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline std::optional<double> rmse(const Vector& z_true, const Vector& z_pred) {
  if (z_true.size() != z_pred.size())
    throw Error(ErrorCode::kDimensionMismatch, "inputs differ in length");
  if (z_true.size() == 0) return std::nullopt;
  return std::sqrt((z_true - z_pred).squaredNorm() / static_cast<double>(z_true.size()));
}

}  // namespace jointsel
