#pragma once

// Repeated stratified k-fold cross-validation over a lambda grid.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/joint_optimizer.hpp"
#include "jointsel/metrics.hpp"
#include "jointsel/text_format.hpp"

namespace jointsel {

struct CvCell {
  double lambda = 0.0;
  int repeat = 0;
  int fold = 0;
  double accuracy = 0.0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> auc;
  std::optional<double> cc;
  std::optional<double> rmse;
  std::optional<double> time_mae_severe;
  std::size_t n_selected_features = 0;

  friend bool operator==(const CvCell&, const CvCell&) = default;
};

struct MeanSd {
  std::optional<double> mean;
  std::optional<double> sd;
  std::size_t count = 0;  // cells where the metric was defined

  friend bool operator==(const MeanSd&, const MeanSd&) = default;
};

struct CvAggregate {
  double lambda = 0.0;
  MeanSd accuracy, sensitivity, specificity, auc, cc, rmse, time_mae_severe, n_selected_features;

  friend bool operator==(const CvAggregate&, const CvAggregate&) = default;
};

struct CvReport {
  int folds = 0;
  int repeats = 0;
  std::vector<double> lambdas;
  /// Ordered by (lambda index, repeat, fold).
  std::vector<CvCell> cells;
  std::vector<CvAggregate> aggregates;  // one per lambda, grid order
  /// selection_counts[l][j]: fits at lambdas[l] in which feature j had a row
  /// norm above kSelectedRowThreshold.
  std::vector<std::vector<int>> selection_counts;
  std::vector<std::string> feature_names;
  std::optional<double> best_lambda;

  friend bool operator==(const CvReport&, const CvReport&) = default;
};

/// Fold id per sample. Each class is shuffled separately, then samples are
/// dealt round-robin (negatives first, positives continuing the rotation), so
/// every fold gets floor or ceil of its share of each class.
inline std::vector<int> stratified_folds(const LabelVector& labels, int folds,
                                         std::mt19937_64& rng) {
  std::vector<int> assignment(static_cast<std::size_t>(labels.size()), -1);
  int next = 0;
  for (int cls : {-1, 1}) {
    std::vector<std::size_t> members;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(static_cast<std::size_t>(i));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(members[i - 1], members[pick(rng)]);
    }
    for (auto idx : members) {
      assignment[idx] = next;
      next = (next + 1) % folds;
    }
  }
  return assignment;
}

namespace detail {

inline MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double x : values) sum += x;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  out.mean = mean;
  out.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return out;
}

struct CellTask {
  std::size_t lambda_index;
  int repeat;
  int fold;
};

struct CellOutcome {
  CvCell cell;
  std::vector<bool> selected;  // per input feature
};

inline CellOutcome evaluate_cell(const Dataset& dataset, const Hyperparams& hp_base,
                                 double lambda, int repeat, int fold,
                                 const std::vector<int>& assignment) {
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    (assignment[i] == fold ? test_idx : train_idx).push_back(i);
  const Dataset train = subset(dataset, train_idx);
  const Dataset test = subset(dataset, test_idx);

  Hyperparams hp = hp_base;
  hp.lambda = lambda;
  const FitReport report = fit(train, hp);
  const ModelState& model = report.model;

  const auto m = static_cast<Eigen::Index>(test_idx.size());
  LabelVector predicted(m);
  Vector margins(m);  // w'x: same ranking as the score, but never saturated
  std::vector<double> time_true, time_pred;
  double severe_abs_err = 0.0;
  int severe_count = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    const Vector x = test.features.col(c);
    const ClassPrediction p = predict_class(model, x);
    predicted[c] = p.label;
    margins[c] = model.w.dot(model.standardization.apply(x));
    if (!test.time_present[static_cast<std::size_t>(c)]) continue;
    const double t = predict_time(model, x);
    time_true.push_back(test.times[c]);
    time_pred.push_back(t);
    if (test.labels[c] > 0) {
      severe_abs_err += std::abs(t - test.times[c]);
      ++severe_count;
    }
  }

  CellOutcome out;
  CvCell& cell = out.cell;
  cell.lambda = lambda;
  cell.repeat = repeat;
  cell.fold = fold;
  const ConfusionMetrics cm = confusion_metrics(test.labels, predicted);
  cell.accuracy = cm.accuracy;
  cell.sensitivity = cm.sensitivity;
  cell.specificity = cm.specificity;
  cell.auc = auc(test.labels, margins);
  const Eigen::Map<const Vector> zt(time_true.data(), static_cast<Eigen::Index>(time_true.size()));
  const Eigen::Map<const Vector> zp(time_pred.data(), static_cast<Eigen::Index>(time_pred.size()));
  cell.cc = pearson_cc(zt, zp);
  cell.rmse = rmse(zt, zp);
  if (severe_count > 0) cell.time_mae_severe = severe_abs_err / severe_count;
  cell.n_selected_features = count_selected_features(model);

  const auto d = static_cast<Eigen::Index>(dataset.n_features());
  out.selected.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j)
    out.selected[static_cast<std::size_t>(j)] =
        std::hypot(model.w[j], model.v[j]) > kSelectedRowThreshold;
  return out;
}

}  // namespace detail

/// Every (lambda, repeat, fold) cell fits on the training part (with its own
/// standardization statistics) and is scored on the held-out fold. All lambdas
/// share the same splits. Cells may run on `jobs` threads; the report does not
/// depend on the thread count.
inline CvReport repeated_kfold_cv(const Dataset& dataset, const Hyperparams& hp_base,
                                  const std::vector<double>& lambda_grid, int folds, int repeats,
                                  std::uint64_t seed, int jobs = 1) {
  validate_dataset(dataset);
  hp_base.validate();
  if (folds < 2) throw Error(ErrorCode::kInvalidArgument, "folds must be >= 2");
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  if (static_cast<std::size_t>(folds) > dataset.n_samples())
    throw Error(ErrorCode::kInvalidArgument, "folds exceeds the number of samples");
  if (lambda_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "lambda grid is empty");
  for (double l : lambda_grid)
    if (!(l > 0.0) || !std::isfinite(l))
      throw Error(ErrorCode::kInvalidArgument, "grid values must be positive and finite");
  for (std::size_t a = 0; a < lambda_grid.size(); ++a)
    for (std::size_t b = a + 1; b < lambda_grid.size(); ++b)
      if (lambda_grid[a] == lambda_grid[b])
        throw Error(ErrorCode::kInvalidArgument, "lambda grid contains duplicates");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> assignments;
  for (int r = 0; r < repeats; ++r) assignments.push_back(stratified_folds(dataset.labels, folds, rng));

  std::vector<detail::CellTask> tasks;
  for (std::size_t l = 0; l < lambda_grid.size(); ++l)
    for (int r = 0; r < repeats; ++r)
      for (int f = 0; f < folds; ++f) tasks.push_back({l, r, f});

  std::vector<detail::CellOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const auto& task = tasks[t];
      const double lambda = lambda_grid[task.lambda_index];
      try {
        outcomes[t] = detail::evaluate_cell(dataset, hp_base, lambda, task.repeat, task.fold,
                                            assignments[static_cast<std::size_t>(task.repeat)]);
      } catch (const Error& e) {
        std::ostringstream where;
        where << "repeat " << task.repeat << ", fold " << task.fold << ", lambda "
              << detail::format_real(lambda) << ": " << e.what();
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::make_exception_ptr(Error(e.code(), where.str(), e.index()));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  CvReport report;
  report.folds = folds;
  report.repeats = repeats;
  report.lambdas = lambda_grid;
  report.feature_names = dataset.feature_names;
  const std::size_t d = dataset.n_features();
  report.selection_counts.assign(lambda_grid.size(), std::vector<int>(d, 0));
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    report.cells.push_back(outcomes[t].cell);
    auto& counts = report.selection_counts[tasks[t].lambda_index];
    for (std::size_t j = 0; j < d; ++j)
      if (outcomes[t].selected[j]) ++counts[j];
  }

  for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
    std::vector<double> acc, sens, spec, au, cc, rm, mae, nsel;
    for (const auto& c : report.cells) {
      if (c.lambda != lambda_grid[l]) continue;
      acc.push_back(c.accuracy);
      if (c.sensitivity) sens.push_back(*c.sensitivity);
      if (c.specificity) spec.push_back(*c.specificity);
      if (c.auc) au.push_back(*c.auc);
      if (c.cc) cc.push_back(*c.cc);
      if (c.rmse) rm.push_back(*c.rmse);
      if (c.time_mae_severe) mae.push_back(*c.time_mae_severe);
      nsel.push_back(static_cast<double>(c.n_selected_features));
    }
    CvAggregate agg;
    agg.lambda = lambda_grid[l];
    agg.accuracy = detail::mean_sd(acc);
    agg.sensitivity = detail::mean_sd(sens);
    agg.specificity = detail::mean_sd(spec);
    agg.auc = detail::mean_sd(au);
    agg.cc = detail::mean_sd(cc);
    agg.rmse = detail::mean_sd(rm);
    agg.time_mae_severe = detail::mean_sd(mae);
    agg.n_selected_features = detail::mean_sd(nsel);
    report.aggregates.push_back(agg);
  }

  // Highest mean AUC; ties go to the smaller lambda.
  for (const auto& agg : report.aggregates) {
    if (!agg.auc.mean) continue;
    if (!report.best_lambda) {
      report.best_lambda = agg.lambda;
      continue;
    }
    const auto& best = *std::find_if(report.aggregates.begin(), report.aggregates.end(),
                                     [&](const CvAggregate& a) { return a.lambda == *report.best_lambda; });
    if (*agg.auc.mean > *best.auc.mean ||
        (*agg.auc.mean == *best.auc.mean && agg.lambda < *report.best_lambda))
      report.best_lambda = agg.lambda;
  }
  return report;
}

inline const CvAggregate* find_aggregate(const CvReport& report, double lambda) {
  for (const auto& a : report.aggregates)
    if (a.lambda == lambda) return &a;
  return nullptr;
}

/// One row per cell; columns: lambda, repeat, fold, accuracy, sensitivity,
/// specificity, auc, cc, rmse, time_mae_severe, n_selected_features.
inline void write_cv_csv(const CvReport& report, std::ostream& out) {
  using detail::format_real;
  out << "lambda,repeat,fold,accuracy,sensitivity,specificity,auc,cc,rmse,time_mae_severe,"
         "n_selected_features\n";
  for (const auto& c : report.cells) {
    out << format_real(c.lambda) << ',' << c.repeat << ',' << c.fold << ','
        << format_real(c.accuracy) << ',' << format_real(c.sensitivity) << ','
        << format_real(c.specificity) << ',' << format_real(c.auc) << ',' << format_real(c.cc)
        << ',' << format_real(c.rmse) << ',' << format_real(c.time_mae_severe) << ','
        << c.n_selected_features << '\n';
  }
}

inline std::string cv_summary(const CvReport& report) {
  std::ostringstream out;
  char buf[160];
  auto cell = [&](const MeanSd& m, double scale) {
    if (!m.mean) return std::string("NA");
    std::snprintf(buf, sizeof(buf), "%.2f+-%.2f", *m.mean * scale, *m.sd * scale);
    return std::string(buf);
  };
  out << "repeated " << report.folds << "-fold cross-validation, " << report.repeats
      << " repeat(s)\n";
  out << "lambda      accuracy(%)    sensitivity(%) specificity(%) auc(%)         cc            "
         " rmse(days)     mae_severe(days) n_selected\n";
  for (const auto& a : report.aggregates) {
    std::snprintf(buf, sizeof(buf), "%-11g ", a.lambda);
    out << buf;
    for (const auto& [m, s] : {std::pair{&a.accuracy, 100.0}, {&a.sensitivity, 100.0},
                               {&a.specificity, 100.0}, {&a.auc, 100.0}, {&a.cc, 1.0},
                               {&a.rmse, 1.0}, {&a.time_mae_severe, 1.0},
                               {&a.n_selected_features, 1.0}}) {
      std::snprintf(buf, sizeof(buf), "%-15s", cell(*m, s).c_str());
      out << buf;
    }
    out << '\n';
  }
  out << "best lambda (mean AUC): "
      << (report.best_lambda ? detail::format_real(*report.best_lambda) : std::string("NA"))
      << '\n';
  return out.str();
}

/// feature_index,feature_name,lambda,count,fits. One row per (lambda, feature).
inline void write_selection_counts(const CvReport& report, std::ostream& out) {
  out << "feature_index,feature_name,lambda,count,fits\n";
  const int fits = report.folds * report.repeats;
  for (std::size_t l = 0; l < report.lambdas.size(); ++l) {
    const auto& counts = report.selection_counts[l];
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const std::string name =
          j < report.feature_names.size() ? report.feature_names[j] : "f_" + std::to_string(j + 1);
      out << j << ',' << name << ',' << detail::format_real(report.lambdas[l]) << ','
          << counts[j] << ',' << fits << '\n';
    }
  }
}

}  // namespace jointsel
