#pragma once

// Joint sparse classification + regression by alternating minimization.
//
// Objective over (w, v, alpha, beta):
//
//   J = sum_i alpha_i softplus(-y_i w'x_i)
//     + sqrt( sum_i beta_i (v'x_i - z_i)^2 )
//     + lambda * sum_j || (w_j, v_j) ||_2
//
// subject to alpha and beta keeping exactly k samples per class. Each outer
// sweep updates, in order: w (damped Newton), v (closed form), alpha, beta
// (per-class top-k), the reweighting diagonal D, and the task weight gamma.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/logistic_newton.hpp"
#include "jointsel/ridge_solver.hpp"
#include "jointsel/sample_selector.hpp"

namespace jointsel {

/// Rows of [w, v] with Euclidean norm above this count as selected features.
inline constexpr double kSelectedRowThreshold = 1e-6;

struct FitReport {
  ModelState model;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
  std::vector<double> objective_trace;  // iterations + 1 entries
  /// (alpha mask, beta mask) after each sweep.
  std::vector<std::pair<SelectionMask, SelectionMask>> selection_history;
};

/// d_j = 1 / (2 (||(w_j, v_j)||_2 + eps)); a zero row gets 1 / (2 eps).
inline Vector update_D(const Vector& w, const Vector& v, double eps) {
  if (w.size() != v.size()) throw Error(ErrorCode::kDimensionMismatch, "w and v differ in length");
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  Vector out(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j)
    out[j] = 1.0 / (2.0 * (std::hypot(w[j], v[j]) + eps));
  return out;
}

/// sqrt( sum_i beta_i (v'x_i - z_i)^2 ) over a design matrix.
inline double weighted_residual_norm(const Vector& v, const Matrix& features, const Vector& times,
                                     const Vector& beta) {
  const Vector pred = features.transpose() * v;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (beta[i] == 0.0) continue;
    const double r = pred[i] - times[i];
    ss += beta[i] * r * r;
  }
  return std::sqrt(ss);
}

/// gamma = 1 / (2 r), r the beta-weighted residual norm; gamma_max when r = 0,
/// and never above gamma_max.
inline double update_gamma(const Vector& v, const Matrix& features, const Vector& times,
                           const Vector& beta, double gamma_max) {
  const double r = weighted_residual_norm(v, features, times, beta);
  if (r == 0.0) return gamma_max;
  return std::min(1.0 / (2.0 * r), gamma_max);
}

inline double update_gamma(const Vector& v, const Dataset& ds, const Vector& beta,
                           double gamma_max) {
  return update_gamma(v, ds.features, ds.times, beta, gamma_max);
}

/// sum_j ||(w_j, v_j)||_2, unsmoothed.
inline double l21_norm(const Vector& w, const Vector& v) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) total += std::hypot(w[j], v[j]);
  return total;
}

/// The joint objective on an already-transformed design matrix.
inline double joint_objective(const Vector& w, const Vector& v, const Vector& alpha,
                              const Vector& beta, const Matrix& design, const LabelVector& labels,
                              const Vector& times, double lambda) {
  const Vector margins = design.transpose() * w;
  double logistic_term = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    logistic_term += alpha[i] * softplus(-static_cast<double>(labels[i]) * margins[i]);
  }
  return logistic_term + weighted_residual_norm(v, design, times, beta) + lambda * l21_norm(w, v);
}

/// The joint objective of a fitted model on `dataset` (raw features; the
/// model's stored standardization is applied). The model's alpha and beta must
/// index the samples of `dataset`.
inline double joint_objective(const ModelState& model, const Dataset& dataset, double lambda) {
  if (model.alpha.size() != dataset.labels.size() || model.beta.size() != dataset.labels.size())
    throw Error(ErrorCode::kDimensionMismatch, "model sample weights do not match the dataset");
  const Matrix design = model.standardization.apply(dataset.features);
  return joint_objective(model.w, model.v, model.alpha, model.beta, design, dataset.labels,
                         dataset.times, lambda);
}

namespace detail {

inline void add_warnings(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& w : from)
    if (std::find(into.begin(), into.end(), w) == into.end()) into.push_back(w);
}

}  // namespace detail

inline FitReport fit(const Dataset& dataset, const Hyperparams& hp) {
  hp.validate();
  validate_dataset(dataset);

  const Eigen::Index n = dataset.features.cols();
  Standardization standardization =
      hp.standardize ? Standardization::fit(dataset.features, hp.fit_intercept)
                     : Standardization::identity(dataset.n_features(), hp.fit_intercept);
  const Matrix design = standardization.apply(dataset.features);
  const Eigen::Index dim = design.rows();

  FitReport report;
  ModelState& model = report.model;
  model.standardization = std::move(standardization);
  model.feature_names = dataset.feature_names;

  model.w = Vector::Zero(dim);
  model.v = Vector::Zero(dim);
  model.alpha = Vector::Ones(n);
  model.beta = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (dataset.time_present[static_cast<std::size_t>(i)]) model.beta[i] = 1.0;
  model.gamma = 1.0;
  if (hp.random_init_d) {
    std::mt19937_64 rng(hp.seed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    model.d_diag.resize(dim);
    for (Eigen::Index j = 0; j < dim; ++j) model.d_diag[j] = unif(rng);
  } else {
    model.d_diag = Vector::Ones(dim);
  }

  auto objective = [&] {
    return joint_objective(model.w, model.v, model.alpha, model.beta, design, dataset.labels,
                           dataset.times, hp.lambda);
  };
  const NewtonOptions newton{hp.max_newton_iters, 1e-6, 30};
  auto update_wv = [&](int iter) {
    try {
      const LogisticSubproblem wsub{design, dataset.labels, model.alpha, model.d_diag, hp.lambda};
      model.w = solve_w(wsub, model.w, newton).w;

      const RidgeSubproblem vsub{design,       dataset.times, dataset.time_present, model.beta,
                                 model.d_diag, hp.lambda,     model.gamma};
      const WeightedSystem sys = build_weighted_system(vsub);
      model.v = solve_v(sys.g, sys.m, model.d_diag, hp.lambda, model.gamma);
    } catch (const Error& e) {
      throw Error(e.code(), "outer iteration " + std::to_string(iter) + ": " + e.what(), e.index());
    }
  };

  // Warm start: one w/v solve under the initial D and gamma, then D and gamma
  // re-derived from that state. From here on D and gamma always match the
  // current (w, v, beta), so each sweep minimizes a majorizer of J that is
  // tight at the current point.
  update_wv(0);
  model.d_diag = update_D(model.w, model.v, hp.eps_row_norm);
  model.gamma = update_gamma(model.v, design, dataset.times, model.beta, hp.gamma_max);
  report.objective_trace.push_back(objective());

  for (int iter = 1; iter <= hp.max_outer_iters; ++iter) {
    update_wv(iter);

    SelectionMask alpha_mask;
    SelectionMask beta_mask;
    if (hp.sample_selection_enabled) {
      const Vector l1 = classification_losses(model.w, design, dataset.labels);
      Selection a = per_class_topk({l1, dataset.labels}, hp.k);
      const Vector l2 = regression_losses(model.v, design, dataset.times, dataset.time_present);
      Selection b = per_class_topk({l2, dataset.labels}, hp.k);
      model.alpha = std::move(a.weights);
      model.beta = std::move(b.weights);
      alpha_mask = std::move(a.mask);
      beta_mask = std::move(b.mask);
      detail::add_warnings(report.warnings, a.warnings);
      detail::add_warnings(report.warnings, b.warnings);
    } else {
      alpha_mask = full_mask(model.alpha, dataset.labels);
      beta_mask = full_mask(model.beta, dataset.labels);
    }
    report.selection_history.emplace_back(std::move(alpha_mask), std::move(beta_mask));

    model.d_diag = update_D(model.w, model.v, hp.eps_row_norm);
    model.gamma = update_gamma(model.v, design, dataset.times, model.beta, hp.gamma_max);

    const double previous = report.objective_trace.back();
    const double current = objective();
    report.objective_trace.push_back(current);
    report.iterations = iter;
    if (std::abs(previous - current) / std::max(1.0, std::abs(previous)) < hp.outer_tol) {
      report.converged = true;
      break;
    }
  }

  model.objective_trace = report.objective_trace;
  return report;
}

struct ClassPrediction {
  int label;     // -1 or +1
  double score;  // h_w(x) in (0, 1)
};

/// Label +1 iff the score is at least 0.5 (w'x >= 0).
inline ClassPrediction predict_class(const ModelState& model, const Vector& x) {
  const Vector xs = model.standardization.apply(x);
  const double margin = model.w.dot(xs);
  return {margin >= 0.0 ? 1 : -1, sigmoid_score(model.w, xs)};
}

/// v'x on the standardized input, in days.
inline double predict_time(const ModelState& model, const Vector& x) {
  const Vector xs = model.standardization.apply(x);
  if (xs.size() != model.v.size())
    throw Error(ErrorCode::kDimensionMismatch, "model and input dimension differ");
  return model.v.dot(xs);
}

struct RankedFeature {
  std::size_t index;
  std::string name;
  double norm;
};

/// Every feature ordered by ||(w_j, v_j)||_2, descending; ties keep index order.
inline std::vector<RankedFeature> feature_ranking(const ModelState& model) {
  std::vector<RankedFeature> out;
  out.reserve(static_cast<std::size_t>(model.w.size()));
  for (Eigen::Index j = 0; j < model.w.size(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    std::string name;
    if (idx < model.feature_names.size()) name = model.feature_names[idx];
    else if (model.standardization.intercept && idx == model.standardization.input_dim())
      name = "(intercept)";
    else name = "f_" + std::to_string(idx + 1);
    out.push_back({idx, std::move(name), std::hypot(model.w[j], model.v[j])});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.norm > b.norm; });
  return out;
}

/// Number of rows of [w, v] with norm above kSelectedRowThreshold.
inline std::size_t count_selected_features(const ModelState& model,
                                           double threshold = kSelectedRowThreshold) {
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < model.w.size(); ++j)
    if (std::hypot(model.w[j], model.v[j]) > threshold) ++count;
  return count;
}

}  // namespace jointsel
