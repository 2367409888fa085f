#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "jointsel/error.hpp"

namespace jointsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using LabelVector = Eigen::VectorXi;

/// Tabular samples. Features are stored column-per-sample (d x n), labels are
/// -1 (non-severe) / +1 (severe), and times are days to severe conversion.
/// Entries of `times` where `time_present` is false carry no meaning and are
/// conventionally 0.
struct Dataset {
  Matrix features;
  LabelVector labels;
  Vector times;
  std::vector<bool> time_present;
  std::vector<std::string> feature_names;  // empty or length d
  std::vector<std::string> ids;            // empty or length n

  std::size_t n_samples() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.rows()); }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
           a.features == b.features && a.labels.size() == b.labels.size() &&
           a.labels == b.labels && a.times.size() == b.times.size() && a.times == b.times &&
           a.time_present == b.time_present && a.feature_names == b.feature_names &&
           a.ids == b.ids;
  }
};

struct Hyperparams {
  double lambda = 1.0;
  int k = 50;
  int max_outer_iters = 100;
  int max_newton_iters = 50;
  double outer_tol = 1e-6;
  double eps_row_norm = 1e-8;
  double gamma_max = 1e8;
  bool standardize = true;
  bool sample_selection_enabled = true;
  /// Appends a constant feature (exempt from standardization).
  bool fit_intercept = false;
  /// Draws the initial reweighting diagonal uniformly from [0.5, 1.5] instead
  /// of using the identity.
  bool random_init_d = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw Error(ErrorCode::kInvalidArgument, "lambda must be positive and finite");
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
    if (max_outer_iters < 1 || max_newton_iters < 1)
      throw Error(ErrorCode::kInvalidArgument, "iteration caps must be >= 1");
    if (!(outer_tol > 0.0) || !(eps_row_norm > 0.0) || !(gamma_max > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "tolerances must be positive");
  }
};

/// Per-feature affine map applied before fitting and prediction.
struct Standardization {
  static constexpr double kScaleFloor = 1e-12;

  Vector mean;   // length d
  Vector scale;  // length d
  bool intercept = false;

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t model_dim() const { return input_dim() + (intercept ? 1 : 0); }

  static Standardization identity(std::size_t d, bool intercept) {
    return {Vector::Zero(static_cast<Eigen::Index>(d)), Vector::Ones(static_cast<Eigen::Index>(d)),
            intercept};
  }

  /// Population mean / standard deviation per feature row.
  static Standardization fit(const Matrix& features, bool intercept) {
    const auto d = features.rows();
    const auto n = features.cols();
    Standardization s{Vector::Zero(d), Vector::Ones(d), intercept};
    if (n == 0) return s;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double mu = features.row(j).mean();
      const double var = (features.row(j).array() - mu).square().sum() / static_cast<double>(n);
      s.mean[j] = mu;
      s.scale[j] = std::max(std::sqrt(var), kScaleFloor);
    }
    return s;
  }

  Matrix apply(const Matrix& features) const {
    if (static_cast<std::size_t>(features.rows()) != input_dim())
      throw Error(ErrorCode::kDimensionMismatch,
                  "expected " + std::to_string(input_dim()) + " features, got " +
                      std::to_string(features.rows()));
    Matrix out(static_cast<Eigen::Index>(model_dim()), features.cols());
    const auto d = features.rows();
    out.topRows(d) = (features.colwise() - mean).array().colwise() / scale.array();
    if (intercept) out.row(d).setOnes();
    return out;
  }

  Vector apply(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != input_dim())
      throw Error(ErrorCode::kDimensionMismatch,
                  "expected " + std::to_string(input_dim()) + " features, got " +
                      std::to_string(x.size()));
    Vector out(static_cast<Eigen::Index>(model_dim()));
    out.head(x.size()) = (x - mean).array() / scale.array();
    if (intercept) out[x.size()] = 1.0;
    return out;
  }
};

/// Fitted parameters and the state of the alternating scheme at exit.
struct ModelState {
  Vector w;       // classifier coefficients
  Vector v;       // regressor coefficients
  Vector alpha;   // 0/1 sample weights, classification
  Vector beta;    // 0/1 sample weights, regression
  double gamma = 1.0;
  Vector d_diag;  // reweighting diagonal
  std::vector<double> objective_trace;
  Standardization standardization;
  std::vector<std::string> feature_names;

  friend bool operator==(const ModelState& a, const ModelState& b) {
    auto same = [](const Vector& x, const Vector& y) { return x.size() == y.size() && x == y; };
    return same(a.w, b.w) && same(a.v, b.v) && same(a.alpha, b.alpha) &&
           same(a.beta, b.beta) && a.gamma == b.gamma && same(a.d_diag, b.d_diag) &&
           a.objective_trace == b.objective_trace &&
           same(a.standardization.mean, b.standardization.mean) &&
           same(a.standardization.scale, b.standardization.scale) &&
           a.standardization.intercept == b.standardization.intercept &&
           a.feature_names == b.feature_names;
  }
};

/// Indices retained by one per-class selection step.
struct SelectionMask {
  std::vector<std::size_t> kept_negative;
  std::vector<std::size_t> kept_positive;

  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;
};

/// Checks every Dataset invariant; returns the input unchanged on success.
inline Dataset validate_dataset(Dataset raw) {
  const std::size_t n = raw.n_samples();
  const std::size_t d = raw.n_features();
  if (static_cast<std::size_t>(raw.labels.size()) != n)
    throw Error(ErrorCode::kDimensionMismatch,
                "labels has length " + std::to_string(raw.labels.size()) + ", expected " +
                    std::to_string(n),
                std::min<std::size_t>(n, static_cast<std::size_t>(raw.labels.size())));
  if (static_cast<std::size_t>(raw.times.size()) != n)
    throw Error(ErrorCode::kDimensionMismatch,
                "times has length " + std::to_string(raw.times.size()) + ", expected " +
                    std::to_string(n),
                std::min<std::size_t>(n, static_cast<std::size_t>(raw.times.size())));
  if (raw.time_present.size() != n)
    throw Error(ErrorCode::kDimensionMismatch,
                "time_present has length " + std::to_string(raw.time_present.size()) +
                    ", expected " + std::to_string(n),
                std::min(n, raw.time_present.size()));
  if (!raw.feature_names.empty() && raw.feature_names.size() != d)
    throw Error(ErrorCode::kDimensionMismatch,
                "feature_names has length " + std::to_string(raw.feature_names.size()) +
                    ", expected " + std::to_string(d));
  if (!raw.ids.empty() && raw.ids.size() != n)
    throw Error(ErrorCode::kDimensionMismatch,
                "ids has length " + std::to_string(raw.ids.size()) + ", expected " +
                    std::to_string(n));

  bool seen_negative = false;
  bool seen_positive = false;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = raw.labels[static_cast<Eigen::Index>(i)];
    if (label != -1 && label != 1)
      throw Error(ErrorCode::kInvalidLabel,
                  "label " + std::to_string(label) + " at sample " + std::to_string(i) +
                      " is not -1 or +1",
                  i);
    seen_negative |= label == -1;
    seen_positive |= label == 1;
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(raw.features(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))))
        throw Error(ErrorCode::kNonFiniteValue,
                    "feature " + std::to_string(j) + " of sample " + std::to_string(i) +
                        " is not finite",
                    i);
    }
    if (raw.time_present[i] && !std::isfinite(raw.times[static_cast<Eigen::Index>(i)]))
      throw Error(ErrorCode::kNonFiniteValue,
                  "time of sample " + std::to_string(i) + " is not finite", i);
  }
  if (!seen_negative || !seen_positive)
    throw Error(ErrorCode::kSingleClass,
                std::string("dataset has no ") + (seen_negative ? "positive" : "negative") +
                    " samples");
  return raw;
}

/// Returns the sub-dataset made of the given sample columns, in order.
inline Dataset subset(const Dataset& ds, const std::vector<std::size_t>& columns) {
  Dataset out;
  const auto m = static_cast<Eigen::Index>(columns.size());
  out.features.resize(ds.features.rows(), m);
  out.labels.resize(m);
  out.times.resize(m);
  out.time_present.resize(columns.size());
  out.feature_names = ds.feature_names;
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto i = static_cast<Eigen::Index>(columns[static_cast<std::size_t>(c)]);
    out.features.col(c) = ds.features.col(i);
    out.labels[c] = ds.labels[i];
    out.times[c] = ds.times[i];
    out.time_present[static_cast<std::size_t>(c)] = ds.time_present[static_cast<std::size_t>(i)];
    if (!ds.ids.empty()) out.ids.push_back(ds.ids[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace jointsel
