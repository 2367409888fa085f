#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "jointsel/joint_optimizer.hpp"
#include "jointsel/metrics.hpp"
#include "jointsel/synthetic.hpp"

namespace jointsel {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

SynthConfig small_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_negative = 70;
  cfg.n_positive = 30;
  cfg.d = 30;
  cfg.support_size = 10;
  cfg.seed = seed;
  return cfg;
}

void expect_descent(const FitReport& r) {
  ASSERT_EQ(r.objective_trace.size(), static_cast<std::size_t>(r.iterations) + 1);
  for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
    EXPECT_LE(r.objective_trace[t], r.objective_trace[t - 1] + 1e-9) << "step " << t;
}

TEST(UpdateD, Examples) {
  EXPECT_NEAR(update_D(vec({3.0}), vec({4.0}), 1e-12)[0], 0.1, 1e-12);
  EXPECT_EQ(update_D(vec({0.0}), vec({0.0}), 1e-8)[0], 1.0 / 2e-8);
  EXPECT_NEAR(update_D(vec({0.0}), vec({0.0}), 1e-8)[0], 5e7, 1e-6);
  const Vector all = update_D(Vector::Zero(4), Vector::Zero(4), 1e-8);
  EXPECT_TRUE(all.allFinite());
  EXPECT_TRUE((all.array() == 1.0 / 2e-8).all());
}

TEST(UpdateGamma, Examples) {
  const Matrix x = Matrix::Ones(1, 1);
  const Vector beta = Vector::Ones(1);
  EXPECT_DOUBLE_EQ(update_gamma(vec({1.0}), x, vec({0.5}), beta, 1e8), 1.0);
  EXPECT_EQ(update_gamma(vec({1.0}), x, vec({1.0}), beta, 1e8), 1e8);
  EXPECT_DOUBLE_EQ(update_gamma(vec({1.0}), x, vec({-4.0}), beta, 1e8), 0.1);
  // Unselected samples do not count.
  EXPECT_EQ(update_gamma(vec({1.0}), x, vec({-4.0}), Vector::Zero(1), 1e8), 1e8);
}

TEST(JointObjective, Examples) {
  const int n = 5;
  const Matrix x = Matrix::Ones(2, n);
  LabelVector y(n);
  y << 1, -1, 1, -1, 1;
  const Vector zero_w = Vector::Zero(2);
  EXPECT_NEAR(joint_objective(zero_w, zero_w, Vector::Ones(n), Vector::Ones(n), x, y,
                              Vector::Zero(n), 1.0),
              n * std::log(2.0), 1e-12);

  const Vector z = vec({2.0, 0.0, 0.0, 0.0, 0.0});
  const Vector beta = vec({1, 0, 0, 0, 0});
  EXPECT_NEAR(
      joint_objective(zero_w, zero_w, Vector::Ones(n), beta, x, y, z, 1.0) - n * std::log(2.0),
      2.0, 1e-12);

  EXPECT_DOUBLE_EQ(joint_objective(vec({3, 0}), vec({4, 0}), Vector::Zero(n), Vector::Zero(n), x,
                                   y, z, 10.0),
                   50.0);
}

TEST(JointObjective, ModelOverloadAppliesStandardization) {
  const SyntheticData sd = generate_synthetic(small_config(1));
  Hyperparams hp;
  hp.lambda = 0.1;
  hp.k = 20;
  const FitReport r = fit(sd.dataset, hp);
  EXPECT_DOUBLE_EQ(joint_objective(r.model, sd.dataset, hp.lambda), r.objective_trace.back());
}

TEST(Fit, SyntheticRunConvergesWithDescent) {
  const SyntheticData sd = generate_synthetic(small_config(2));
  const FitReport r = fit(sd.dataset, Hyperparams{});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 100);
  expect_descent(r);
  EXPECT_EQ(r.selection_history.size(), static_cast<std::size_t>(r.iterations));
}

TEST(Fit, DescentAcrossLambdasAndSeeds) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (double lambda : {1e-3, 1e-1, 1.0, 10.0, 100.0}) {
      const SyntheticData sd = generate_synthetic(small_config(100 + seed));
      Hyperparams hp;
      hp.lambda = lambda;
      hp.k = 25;
      hp.random_init_d = seed % 2 == 1;
      hp.seed = seed;
      SCOPED_TRACE("seed " + std::to_string(seed) + " lambda " + std::to_string(lambda));
      expect_descent(fit(sd.dataset, hp));
    }
  }
}

TEST(Fit, EverythingSelectedWhenClassSizeEqualsK) {
  SynthConfig cfg = small_config(3);
  cfg.n_negative = 12;
  cfg.n_positive = 12;
  cfg.d = 6;
  cfg.support_size = 3;
  cfg.times_for_negatives = true;
  cfg.clip_times = false;
  cfg.frac_severe_at_admission = 0.0;
  const SyntheticData sd = generate_synthetic(cfg);
  Hyperparams hp;
  hp.k = 12;
  const FitReport r = fit(sd.dataset, hp);
  EXPECT_TRUE(r.model.alpha.isOnes(0.0));
  EXPECT_TRUE(r.model.beta.isOnes(0.0));
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Fit, HeavyPenaltyZeroesMostRows) {
  const SyntheticData sd = generate_synthetic(small_config(4));
  Hyperparams hp;
  hp.lambda = 1e3;
  const FitReport r = fit(sd.dataset, hp);
  const auto dim = static_cast<std::size_t>(r.model.w.size());
  const std::size_t zero_rows = dim - count_selected_features(r.model);
  EXPECT_GE(static_cast<double>(zero_rows), 0.8 * static_cast<double>(dim));
  expect_descent(r);
}

TEST(Fit, Deterministic) {
  const SyntheticData sd = generate_synthetic(small_config(5));
  Hyperparams hp;
  hp.random_init_d = true;
  hp.seed = 9;
  const FitReport a = fit(sd.dataset, hp);
  const FitReport b = fit(sd.dataset, hp);
  EXPECT_TRUE(a.model == b.model);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(Fit, SelectionCardinalityEveryIteration) {
  SynthConfig cfg = small_config(6);
  const SyntheticData sd = generate_synthetic(cfg);
  Hyperparams hp;
  hp.k = 20;
  const FitReport r = fit(sd.dataset, hp);
  std::size_t neg_times = 0, pos_times = 0;
  for (Eigen::Index i = 0; i < sd.dataset.labels.size(); ++i) {
    if (!sd.dataset.time_present[static_cast<std::size_t>(i)]) continue;
    (sd.dataset.labels[i] > 0 ? pos_times : neg_times)++;
  }
  for (const auto& [alpha_mask, beta_mask] : r.selection_history) {
    EXPECT_EQ(alpha_mask.kept_negative.size(), 20u);
    EXPECT_EQ(alpha_mask.kept_positive.size(), 20u);
    EXPECT_EQ(beta_mask.kept_negative.size(), std::min<std::size_t>(20, neg_times));
    EXPECT_EQ(beta_mask.kept_positive.size(), std::min<std::size_t>(20, pos_times));
  }
}

TEST(Fit, ShortClassWarningSurfaces) {
  const SyntheticData sd = generate_synthetic(small_config(7));
  Hyperparams hp;  // k = 50 > 30 positives
  const FitReport r = fit(sd.dataset, hp);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("fewer than k=50"), std::string::npos);
}

TEST(Fit, GammaMatchesFinalResidual) {
  const SyntheticData sd = generate_synthetic(small_config(8));
  Hyperparams hp;
  hp.lambda = 0.5;
  const FitReport r = fit(sd.dataset, hp);
  const Matrix design = r.model.standardization.apply(sd.dataset.features);
  EXPECT_EQ(r.model.gamma,
            update_gamma(r.model.v, design, sd.dataset.times, r.model.beta, hp.gamma_max));
  EXPECT_TRUE(r.model.d_diag == update_D(r.model.w, r.model.v, hp.eps_row_norm));
}

TEST(Fit, TasksDecoupleAsPenaltyVanishes) {
  SynthConfig cfg = small_config(9);
  cfg.d = 5;
  cfg.support_size = 3;
  cfg.noise_sd_class = 2.0;
  const SyntheticData sd = generate_synthetic(cfg);
  Hyperparams hp;
  hp.lambda = 1e-9;
  hp.sample_selection_enabled = false;
  hp.standardize = false;
  const FitReport r = fit(sd.dataset, hp);

  const Vector alpha = Vector::Ones(sd.dataset.labels.size());
  const LogisticSubproblem sub{sd.dataset.features, sd.dataset.labels, alpha, r.model.d_diag,
                               hp.lambda};
  const Vector standalone = solve_w(sub, Vector::Zero(sd.dataset.features.rows())).w;
  EXPECT_LT((standalone - r.model.w).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Fit, NoiselessTimesRecovered) {
  SynthConfig cfg = small_config(10);
  cfg.noise_sd_class = 0.0;
  cfg.noise_sd_time = 0.0;
  cfg.times_for_negatives = true;
  cfg.clip_times = false;
  cfg.frac_severe_at_admission = 0.0;
  const SyntheticData sd = generate_synthetic(cfg);
  Hyperparams hp;
  hp.lambda = 1e-3;
  hp.sample_selection_enabled = false;
  hp.standardize = false;
  const FitReport r = fit(sd.dataset, hp);
  double ss = 0.0;
  const auto n = sd.dataset.features.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double err = predict_time(r.model, sd.dataset.features.col(i)) -
                       sd.v_star.dot(sd.dataset.features.col(i));
    ss += err * err;
  }
  EXPECT_LT(std::sqrt(ss / static_cast<double>(n)), 1e-2);
}

TEST(Fit, RejectsBadInputs) {
  const SyntheticData sd = generate_synthetic(small_config(11));
  Hyperparams hp;
  hp.lambda = -1.0;
  EXPECT_THROW(fit(sd.dataset, hp), Error);
  Dataset bad = sd.dataset;
  bad.labels.setOnes();
  EXPECT_THROW(fit(bad, Hyperparams{}), Error);
}

ModelState handmade(const Vector& w, const Vector& v) {
  ModelState m;
  m.w = w;
  m.v = v;
  m.standardization = Standardization::identity(w.size(), false);
  return m;
}

TEST(Predict, ClassExamples) {
  const ModelState zero = handmade(Vector::Zero(1), Vector::Zero(1));
  const ClassPrediction p0 = predict_class(zero, vec({3.0}));
  EXPECT_EQ(p0.label, 1);
  EXPECT_EQ(p0.score, 0.5);

  const ModelState m = handmade(vec({10.0}), Vector::Zero(1));
  const ClassPrediction hi = predict_class(m, vec({1.0}));
  EXPECT_EQ(hi.label, 1);
  EXPECT_NEAR(hi.score, 0.99995, 1e-5);
  EXPECT_EQ(predict_class(m, vec({-1.0})).label, -1);
}

TEST(Predict, TimeExamples) {
  EXPECT_EQ(predict_time(handmade(Vector::Zero(1), Vector::Zero(1)), vec({5.0})), 0.0);
  EXPECT_EQ(predict_time(handmade(Vector::Zero(1), vec({2.0})), vec({3.0})), 6.0);
  EXPECT_THROW(predict_time(handmade(Vector::Zero(1), vec({2.0})), vec({3.0, 1.0})), Error);
}

TEST(Ranking, OrdersByRowNorm) {
  const auto r = feature_ranking(handmade(vec({0, 3}), vec({0, 4})));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].index, 1u);
  EXPECT_EQ(r[0].norm, 5.0);
  EXPECT_EQ(r[0].name, "f_2");
  EXPECT_EQ(r[1].index, 0u);
  EXPECT_EQ(r[1].norm, 0.0);
}

TEST(Ranking, TiesKeepIndexOrder) {
  const auto r = feature_ranking(handmade(Vector::Zero(4), Vector::Zero(4)));
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(r[i].index, i);
    EXPECT_EQ(r[i].norm, 0.0);
  }
}

}  // namespace
}  // namespace jointsel
