#pragma once

// Seeded synthetic data shaped like a chest-CT radiomics table: an imbalanced
// severe/non-severe split, a sparse planted classifier and regressor sharing
// one support, and conversion times in days for the severe class.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"

namespace jointsel {

struct SynthConfig {
  int n_negative = 322;
  int n_positive = 86;
  int d = 390;
  int support_size = 10;
  double noise_sd_class = 1.0;  // added to the planted logit before thresholding
  double noise_sd_time = 1.0;   // added to the planted time before scaling
  double mean_conversion_days = 5.64;
  double frac_severe_at_admission = 34.0 / 86.0;
  /// Features as density / volume / mass per region, d = 3 * regions.
  bool use_radiomics_structure = false;
  /// Give negatives planted times too (regression over both classes).
  bool times_for_negatives = false;
  /// Clip planted times at 0 days.
  bool clip_times = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_negative < 1 || n_positive < 1)
      throw Error(ErrorCode::kInfeasibleConfig, "class counts must be positive");
    if (d < 1) throw Error(ErrorCode::kInfeasibleConfig, "d must be positive");
    if (support_size < 0 || support_size > d)
      throw Error(ErrorCode::kInfeasibleConfig, "support_size must lie in [0, d]");
    if (!(frac_severe_at_admission >= 0.0 && frac_severe_at_admission <= 1.0))
      throw Error(ErrorCode::kInfeasibleConfig, "frac_severe_at_admission must lie in [0, 1]");
    if (!(noise_sd_class >= 0.0) || !(noise_sd_time >= 0.0))
      throw Error(ErrorCode::kInfeasibleConfig, "noise levels must be non-negative");
    if (!(mean_conversion_days > 0.0))
      throw Error(ErrorCode::kInfeasibleConfig, "mean_conversion_days must be positive");
    if (use_radiomics_structure && d % 3 != 0)
      throw Error(ErrorCode::kInfeasibleConfig,
                  "radiomics structure needs d divisible by 3 (density, volume, mass per region)");
  }
};

struct SyntheticData {
  Dataset dataset;
  Vector w_star;  // planted classifier, length d
  Vector v_star;  // planted regressor in days, length d
  std::vector<std::size_t> support;  // sorted
};

/// Mass feature from mean density (HU) and volume (mL).
inline double radiomic_mass(double density_hu, double volume_ml) {
  return (density_hu + 1000.0) * volume_ml * 0.001;
}

/// Generates a dataset with exactly n_negative / n_positive samples.
///
/// Labels: the n_positive samples with the largest noisy planted score
/// w*'x + e are +1. Times: a fraction of positives are severe at admission
/// (time 0); the rest get s * max(0, v*'x + e), with s chosen so those
/// nonzero times average mean_conversion_days. v_star is returned already
/// multiplied by s. Negatives have no time unless times_for_negatives.
/// With radiomics structure the planted scores use per-feature z-scores.
inline SyntheticData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int n = cfg.n_negative + cfg.n_positive;
  const int d = cfg.d;
  SyntheticData out;
  Dataset& ds = out.dataset;
  ds.features.resize(d, n);
  ds.feature_names.reserve(static_cast<std::size_t>(d));

  Matrix planted_design;
  if (cfg.use_radiomics_structure) {
    const int regions = d / 3;
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < regions; ++r) {
        const double density = -500.0 + 150.0 * normal(rng);
        const double volume = std::abs(normal(rng)) * 10.0;
        ds.features(r, i) = density;
        ds.features(regions + r, i) = volume;
        ds.features(2 * regions + r, i) = radiomic_mass(density, volume);
      }
    }
    for (const char* kind : {"density_", "volume_", "mass_"})
      for (int r = 0; r < regions; ++r) ds.feature_names.push_back(kind + std::to_string(r + 1));
    planted_design = Standardization::fit(ds.features, false).apply(ds.features);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) ds.features(j, i) = normal(rng);
    for (int j = 0; j < d; ++j) ds.feature_names.push_back("f_" + std::to_string(j + 1));
    planted_design = ds.features;
  }

  // Support: partial Fisher-Yates over feature indices.
  std::vector<std::size_t> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int s = 0; s < cfg.support_size; ++s) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(s), order.size() - 1);
    std::swap(order[static_cast<std::size_t>(s)], order[pick(rng)]);
  }
  out.support.assign(order.begin(), order.begin() + cfg.support_size);
  std::sort(out.support.begin(), out.support.end());

  std::bernoulli_distribution coin(0.5);
  out.w_star = Vector::Zero(d);
  out.v_star = Vector::Zero(d);
  for (auto j : out.support) {
    out.w_star[static_cast<Eigen::Index>(j)] = coin(rng) ? 1.0 : -1.0;
    out.v_star[static_cast<Eigen::Index>(j)] = coin(rng) ? 1.0 : -1.0;
  }

  // Labels: top n_positive noisy scores.
  Vector score = planted_design.transpose() * out.w_star;
  for (int i = 0; i < n; ++i) score[i] += cfg.noise_sd_class * normal(rng);
  std::vector<int> by_score(static_cast<std::size_t>(n));
  std::iota(by_score.begin(), by_score.end(), 0);
  std::stable_sort(by_score.begin(), by_score.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  ds.labels = LabelVector::Constant(n, -1);
  for (int r = 0; r < cfg.n_positive; ++r) ds.labels[by_score[static_cast<std::size_t>(r)]] = 1;

  // Times.
  Vector raw = planted_design.transpose() * out.v_star;
  for (int i = 0; i < n; ++i) raw[i] += cfg.noise_sd_time * normal(rng);

  std::vector<int> positives;
  for (int i = 0; i < n; ++i)
    if (ds.labels[i] == 1) positives.push_back(i);
  std::shuffle(positives.begin(), positives.end(), rng);
  const auto at_admission = static_cast<std::size_t>(
      std::lround(cfg.frac_severe_at_admission * static_cast<double>(cfg.n_positive)));

  std::vector<bool> converted(static_cast<std::size_t>(n), false);
  std::vector<bool> admitted_severe(static_cast<std::size_t>(n), false);
  for (std::size_t r = 0; r < positives.size(); ++r)
    (r < at_admission ? admitted_severe : converted)[static_cast<std::size_t>(positives[r])] = true;

  auto base = [&](int i) { return cfg.clip_times ? std::max(0.0, raw[i]) : raw[i]; };
  double abs_sum = 0.0;
  int nonzero = 0;
  for (int i = 0; i < n; ++i) {
    if (!converted[static_cast<std::size_t>(i)] || base(i) == 0.0) continue;
    abs_sum += std::abs(base(i));
    ++nonzero;
  }
  const bool needs_scale = positives.size() > at_admission;
  if (needs_scale && nonzero == 0)
    throw Error(ErrorCode::kInfeasibleConfig,
                "no converted sample has a nonzero planted time; cannot scale to the target mean");
  const double scale = nonzero > 0 ? cfg.mean_conversion_days * nonzero / abs_sum : 1.0;

  ds.times = Vector::Zero(n);
  ds.time_present.assign(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (admitted_severe[u]) {
      ds.time_present[u] = true;
    } else if (converted[u] || cfg.times_for_negatives) {
      ds.time_present[u] = true;
      ds.times[i] = scale * base(i);
    }
  }
  out.v_star *= scale;

  ds.ids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ds.ids.push_back("s" + std::to_string(i + 1));
  validate_dataset(ds);
  return out;
}

}  // namespace jointsel
