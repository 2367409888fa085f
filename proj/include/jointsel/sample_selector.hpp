#pragma once

// Per-class hard sample selection: within each class keep the k samples with
// the smallest current loss (weight 1) and drop the rest (weight 0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/logistic_newton.hpp"

namespace jointsel {

struct ClasswiseLosses {
  const Vector& losses;  // may contain +inf sentinels
  const LabelVector& labels;
};

struct Selection {
  Vector weights;  // 0/1, length n
  SelectionMask mask;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::size_t> smallest_k(const Vector& losses, const LabelVector& labels,
                                           int cls, int k, std::vector<std::string>& warnings) {
  std::vector<std::size_t> eligible;
  std::size_t class_size = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != cls) continue;
    ++class_size;
    if (std::isfinite(losses[i])) eligible.push_back(static_cast<std::size_t>(i));
  }
  // Index order within equal losses is preserved by the stable sort.
  std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
    return losses[static_cast<Eigen::Index>(a)] < losses[static_cast<Eigen::Index>(b)];
  });
  const auto want = static_cast<std::size_t>(k);
  if (eligible.size() < want) {
    warnings.push_back("class " + std::string(cls > 0 ? "+1" : "-1") + ": only " +
                       std::to_string(eligible.size()) + " of " + std::to_string(class_size) +
                       " samples eligible, fewer than k=" + std::to_string(k));
  }
  eligible.resize(std::min(eligible.size(), want));
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

}  // namespace detail

inline Selection per_class_topk(const ClasswiseLosses& cl, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (cl.losses.size() != cl.labels.size())
    throw Error(ErrorCode::kDimensionMismatch, "losses and labels differ in length");
  Selection out;
  out.weights = Vector::Zero(cl.losses.size());
  out.mask.kept_negative = detail::smallest_k(cl.losses, cl.labels, -1, k, out.warnings);
  out.mask.kept_positive = detail::smallest_k(cl.losses, cl.labels, +1, k, out.warnings);
  for (auto i : out.mask.kept_negative) out.weights[static_cast<Eigen::Index>(i)] = 1.0;
  for (auto i : out.mask.kept_positive) out.weights[static_cast<Eigen::Index>(i)] = 1.0;
  return out;
}

/// Unweighted per-sample logistic loss softplus(-y_i w'x_i).
inline Vector classification_losses(const Vector& w, const Matrix& features,
                                    const LabelVector& labels) {
  if (w.size() != features.rows())
    throw Error(ErrorCode::kDimensionMismatch, "w length must equal feature count");
  const Vector margins = features.transpose() * w;
  Vector out(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i)
    out[i] = softplus(-static_cast<double>(labels[i]) * margins[i]);
  return out;
}

inline Vector classification_losses(const Vector& w, const Dataset& ds) {
  return classification_losses(w, ds.features, ds.labels);
}

/// The mask with every eligible sample kept (used when selection is disabled).
inline SelectionMask full_mask(const Vector& weights, const LabelVector& labels) {
  SelectionMask mask;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    (labels[i] > 0 ? mask.kept_positive : mask.kept_negative).push_back(static_cast<std::size_t>(i));
  }
  return mask;
}

}  // namespace jointsel
