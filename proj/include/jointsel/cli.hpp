#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data or
// validation error, 3 solver failure.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "jointsel/cross_validation.hpp"
#include "jointsel/csv_io.hpp"
#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/joint_optimizer.hpp"
#include "jointsel/model_io.hpp"
#include "jointsel/synthetic.hpp"
#include "jointsel/text_format.hpp"

namespace jointsel::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

namespace detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFlags {
  double lambda = 1.0;
  std::string grid = "1e-3,1e-2,1e-1,1,1e1,1e2,1e3";
  int k = 50;
  int folds = 5;
  int repeats = 20;
  bool no_selection = false;
  bool no_standardize = false;
  bool intercept = false;
  int max_iters = 100;
  int max_newton_iters = 50;
  double tol = 1e-6;
  int jobs = 1;
  std::uint64_t seed = 0;

  Hyperparams hyperparams() const {
    Hyperparams hp;
    hp.lambda = lambda;
    hp.k = k;
    hp.max_outer_iters = max_iters;
    hp.max_newton_iters = max_newton_iters;
    hp.outer_tol = tol;
    hp.standardize = !no_standardize;
    hp.sample_selection_enabled = !no_selection;
    hp.fit_intercept = intercept;
    hp.seed = seed;
    return hp;
  }
};

inline void add_common_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--k", f.k, "Samples kept per class")->check(CLI::Range(1, 1 << 30));
  cmd->add_flag("--no-sample-selection", f.no_selection, "Keep every sample (alpha = beta = 1)");
  cmd->add_flag("--no-standardize", f.no_standardize, "Fit on raw feature values");
  cmd->add_flag("--intercept", f.intercept, "Append a constant feature");
  cmd->add_option("--max-iters", f.max_iters, "Outer iteration cap")->check(CLI::Range(1, 1 << 30));
  cmd->add_option("--max-newton-iters", f.max_newton_iters, "Newton iteration cap")
      ->check(CLI::Range(1, 1 << 30));
  cmd->add_option("--tol", f.tol, "Relative objective change for convergence")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Random seed");
}

inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto v = jointsel::detail::parse_real(item);
    if (!v || !(*v > 0.0) || !std::isfinite(*v))
      throw UsageError("--grid: '" + item + "' is not a positive number");
    grid.push_back(*v);
  }
  if (grid.empty()) throw UsageError("--grid is empty");
  return grid;
}

inline void require_distinct(const std::string& input, const std::string& output) {
  if (input.empty() || output.empty()) return;
  std::error_code ec;
  if (input == output || std::filesystem::equivalent(input, output, ec))
    throw UsageError("output path " + output + " would overwrite input " + input);
}

/// Writes to `path`, or to `fallback` when path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path);
  write(file);
  if (!file) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

/// feature_index,feature_name,lambda,count,fits rows, keyed by lambda.
inline std::map<double, std::vector<int>> read_selection_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::map<double, std::vector<int>> out;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line.rfind("feature_index,feature_name,lambda,count,fits", 0) != 0)
    throw Error(ErrorCode::kParseError, path + " line 1: not a selection-count file");
  while (std::getline(in, line)) {
    ++line_no;
    if (jointsel::detail::trim(line).empty()) continue;
    const auto f = jointsel::detail::split_commas(line);
    const auto idx = f.size() == 5 ? jointsel::detail::parse_integer(f[0]) : std::nullopt;
    const auto lam = f.size() == 5 ? jointsel::detail::parse_real(f[2]) : std::nullopt;
    const auto cnt = f.size() == 5 ? jointsel::detail::parse_integer(f[3]) : std::nullopt;
    if (!idx || !lam || !cnt || *idx < 0)
      throw Error(ErrorCode::kParseError, path + " line " + std::to_string(line_no) + ": malformed row");
    auto& counts = out[*lam];
    if (counts.size() <= static_cast<std::size_t>(*idx)) counts.resize(static_cast<std::size_t>(*idx) + 1, 0);
    counts[static_cast<std::size_t>(*idx)] = static_cast<int>(*cnt);
  }
  return out;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint sparse classification and regression with per-class sample selection",
               "jointsel"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // synth
  SynthConfig synth;
  std::string synth_out, planted_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic dataset CSV");
  synth_cmd->add_option("--out", synth_out, "Output dataset CSV")->required();
  synth_cmd->add_option("--planted-out", planted_out, "Write the planted w*, v* as CSV");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--n-negative", synth.n_negative, "Non-severe sample count");
  synth_cmd->add_option("--n-positive", synth.n_positive, "Severe sample count");
  synth_cmd->add_option("--d", synth.d, "Feature count");
  synth_cmd->add_option("--support", synth.support_size, "Planted informative features");
  synth_cmd->add_option("--noise-class", synth.noise_sd_class, "Logit noise sd");
  synth_cmd->add_option("--noise-time", synth.noise_sd_time, "Time noise sd");
  synth_cmd->add_option("--mean-days", synth.mean_conversion_days, "Mean conversion time");
  synth_cmd->add_option("--frac-admission", synth.frac_severe_at_admission,
                        "Fraction of severe cases with time 0");
  synth_cmd->add_flag("--radiomics", synth.use_radiomics_structure,
                      "Density/volume/mass features per region (d divisible by 3)");
  synth_cmd->add_flag("--negative-times", synth.times_for_negatives,
                      "Give non-severe samples planted times as well");

  // fit
  detail::SolverFlags fit_flags;
  std::string fit_data, fit_out;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and print the objective trace");
  fit_cmd->add_option("--data", fit_data, "Dataset CSV")->required();
  fit_cmd->add_option("--out", fit_out, "Model file to write");
  fit_cmd->add_option("--lambda", fit_flags.lambda, "Row-sparsity strength")
      ->check(CLI::PositiveNumber);
  detail::add_common_solver_flags(fit_cmd, fit_flags);

  // predict
  std::string pred_model, pred_data, pred_out;
  auto* pred_cmd = app.add_subcommand(
      "predict",
      "Per-sample id,label_pred,score,time_pred (time_pred is meaningful for predicted severe "
      "cases only)");
  pred_cmd->add_option("--model", pred_model, "Model file")->required();
  pred_cmd->add_option("--data", pred_data, "Dataset CSV")->required();
  pred_cmd->add_option("--out", pred_out, "Prediction CSV (default stdout)");
  std::uint64_t unused_seed = 0;
  pred_cmd->add_option("--seed", unused_seed, "Accepted for uniformity; prediction is deterministic");

  // cv
  detail::SolverFlags cv_flags;
  std::string cv_data, cv_out, cv_features_out, cv_summary_out;
  auto* cv_cmd = app.add_subcommand("cv", "Repeated stratified k-fold cross-validation");
  cv_cmd->add_option("--data", cv_data, "Dataset CSV")->required();
  cv_cmd->add_option("--out", cv_out, "Per-cell report CSV (default stdout)");
  cv_cmd->add_option("--summary-out", cv_summary_out, "Summary text file");
  cv_cmd->add_option("--features-out", cv_features_out, "Per-feature selection counts CSV");
  cv_cmd->add_option("--grid", cv_flags.grid, "Comma-separated lambda values");
  cv_cmd->add_option("--lambda", cv_flags.lambda, "Single lambda (overrides --grid)")
      ->check(CLI::PositiveNumber);
  cv_cmd->add_option("--folds", cv_flags.folds, "Folds")->check(CLI::Range(2, 1 << 30));
  cv_cmd->add_option("--repeats", cv_flags.repeats, "Repeats")->check(CLI::Range(1, 1 << 30));
  cv_cmd->add_option("--jobs", cv_flags.jobs, "Worker threads")->check(CLI::Range(1, 1024));
  detail::add_common_solver_flags(cv_cmd, cv_flags);

  // rank
  std::string rank_model, rank_counts, rank_out;
  std::optional<double> rank_lambda;
  auto* rank_cmd = app.add_subcommand("rank", "Feature ranking by ||(w_j, v_j)||");
  rank_cmd->add_option("--model", rank_model, "Model file")->required();
  rank_cmd->add_option("--counts", rank_counts, "Selection counts CSV from cv --features-out");
  rank_cmd->add_option("--lambda", rank_lambda, "Which lambda's counts to report");
  rank_cmd->add_option("--out", rank_out, "Ranking CSV (default stdout)");
  std::uint64_t rank_seed = 0;
  rank_cmd->add_option("--seed", rank_seed, "Accepted for uniformity; ranking is deterministic");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*synth_cmd) {
      try {
        synth.validate();
      } catch (const Error& e) {
        throw detail::UsageError(e.what());
      }
      const SyntheticData data = generate_synthetic(synth);
      save_csv(data.dataset, synth_out);
      if (!planted_out.empty()) {
        detail::emit(planted_out, out, [&](std::ostream& os) {
          os << "feature_index,feature_name,w_star,v_star\n";
          for (Eigen::Index j = 0; j < data.w_star.size(); ++j)
            os << j << ',' << data.dataset.feature_names[static_cast<std::size_t>(j)] << ','
               << jointsel::detail::format_real(data.w_star[j]) << ','
               << jointsel::detail::format_real(data.v_star[j]) << '\n';
        });
      }
      return kOk;
    }

    if (*fit_cmd) {
      const Hyperparams hp = fit_flags.hyperparams();
      try {
        hp.validate();
      } catch (const Error& e) {
        throw detail::UsageError(e.what());
      }
      detail::require_distinct(fit_data, fit_out);
      const Dataset ds = load_csv(fit_data);
      const FitReport report = fit(ds, hp);
      for (double j : report.objective_trace) out << jointsel::detail::format_real(j) << '\n';
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      err << (report.converged ? "converged" : "stopped without converging") << " after "
          << report.iterations << " iteration(s); " << count_selected_features(report.model)
          << " of " << report.model.w.size() << " features selected\n";
      if (!fit_out.empty()) save_model(report.model, fit_out);
      return kOk;
    }

    if (*pred_cmd) {
      detail::require_distinct(pred_data, pred_out);
      detail::require_distinct(pred_model, pred_out);
      const ModelState model = load_model(pred_model);
      const Dataset ds = load_csv(pred_data);
      if (ds.n_features() != model.standardization.input_dim())
        throw Error(ErrorCode::kDimensionMismatch,
                    "model expects " + std::to_string(model.standardization.input_dim()) +
                        " features, " + pred_data + " has " + std::to_string(ds.n_features()));
      detail::emit(pred_out, out, [&](std::ostream& os) {
        os << "id,label_pred,score,time_pred\n";
        for (std::size_t i = 0; i < ds.n_samples(); ++i) {
          const Vector x = ds.features.col(static_cast<Eigen::Index>(i));
          const ClassPrediction p = predict_class(model, x);
          os << ds.ids[i] << ',' << p.label << ',' << jointsel::detail::format_real(p.score) << ','
             << jointsel::detail::format_real(predict_time(model, x)) << '\n';
        }
      });
      return kOk;
    }

    if (*cv_cmd) {
      const Hyperparams hp = cv_flags.hyperparams();
      try {
        hp.validate();
      } catch (const Error& e) {
        throw detail::UsageError(e.what());
      }
      const std::vector<double> grid = cv_cmd->count("--lambda") > 0
                                           ? std::vector<double>{cv_flags.lambda}
                                           : detail::parse_grid(cv_flags.grid);
      for (const auto* path : {&cv_out, &cv_features_out, &cv_summary_out})
        detail::require_distinct(cv_data, *path);
      const Dataset ds = load_csv(cv_data);
      const CvReport report = repeated_kfold_cv(ds, hp, grid, cv_flags.folds, cv_flags.repeats,
                                                cv_flags.seed, cv_flags.jobs);
      detail::emit(cv_out, out, [&](std::ostream& os) { write_cv_csv(report, os); });
      const std::string summary = cv_summary(report);
      if (!cv_summary_out.empty()) {
        detail::emit(cv_summary_out, out, [&](std::ostream& os) { os << summary; });
      } else {
        (cv_out.empty() ? err : out) << summary;
      }
      if (!cv_features_out.empty())
        detail::emit(cv_features_out, out, [&](std::ostream& os) { write_selection_counts(report, os); });
      return kOk;
    }

    if (*rank_cmd) {
      detail::require_distinct(rank_model, rank_out);
      detail::require_distinct(rank_counts, rank_out);
      const ModelState model = load_model(rank_model);
      std::optional<std::vector<int>> counts;
      int fits = 0;
      if (!rank_counts.empty()) {
        const auto table = detail::read_selection_counts(rank_counts);
        if (table.empty()) throw Error(ErrorCode::kParseError, rank_counts + ": no rows");
        if (rank_lambda) {
          auto it = table.find(*rank_lambda);
          if (it == table.end())
            throw detail::UsageError("--lambda " + jointsel::detail::format_real(*rank_lambda) +
                                     " not present in " + rank_counts);
          counts = it->second;
        } else if (table.size() == 1) {
          counts = table.begin()->second;
        } else {
          throw detail::UsageError(rank_counts + " holds several lambdas; pass --lambda");
        }
        // fits column is constant per file
        std::ifstream in(rank_counts);
        std::string line;
        std::getline(in, line);
        if (std::getline(in, line)) {
          const auto f = jointsel::detail::split_commas(line);
          if (f.size() == 5)
            fits = static_cast<int>(jointsel::detail::parse_integer(f[4]).value_or(0));
        }
      }
      detail::emit(rank_out, out, [&](std::ostream& os) {
        os << "rank,feature_index,feature_name,row_norm,w,v";
        if (counts) os << ",selection_count,fits";
        os << '\n';
        std::size_t r = 0;
        for (const auto& f : feature_ranking(model)) {
          const auto j = static_cast<Eigen::Index>(f.index);
          os << ++r << ',' << f.index << ',' << f.name << ','
             << jointsel::detail::format_real(f.norm) << ','
             << jointsel::detail::format_real(model.w[j]) << ','
             << jointsel::detail::format_real(model.v[j]);
          if (counts) {
            const int c = f.index < counts->size() ? (*counts)[f.index] : 0;
            os << ',' << c << ',' << fits;
          }
          os << '\n';
        }
      });
      return kOk;
    }
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_data_error() ? kData : kSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace jointsel::cli
