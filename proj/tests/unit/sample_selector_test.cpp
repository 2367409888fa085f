#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "jointsel/sample_selector.hpp"
#include "oracles.hpp"

namespace jointsel {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

LabelVector labels(std::initializer_list<int> v) {
  LabelVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out[i++] = x;
  return out;
}

TEST(PerClassTopk, SmallestPerClass) {
  const Vector l = vec({0.5, 0.1, 0.9, 0.3});
  const LabelVector y = labels({-1, -1, 1, 1});
  const Selection s = per_class_topk({l, y}, 1);
  EXPECT_EQ(s.weights, vec({0, 1, 0, 1}));
  EXPECT_EQ(s.mask.kept_negative, std::vector<std::size_t>{1});
  EXPECT_EQ(s.mask.kept_positive, std::vector<std::size_t>{3});
  EXPECT_TRUE(s.warnings.empty());
}

TEST(PerClassTopk, TiesGoToLowerIndex) {
  const Vector l = vec({0.2, 0.2});
  const LabelVector y = labels({-1, -1});
  EXPECT_EQ(per_class_topk({l, y}, 1).weights, vec({1, 0}));
}

TEST(PerClassTopk, ShortClassesKeepEverythingAndWarn) {
  const Vector l = vec({0.1, 0.2, 0.3, 0.4, 0.5});
  const LabelVector y = labels({-1, 1, -1, 1, 1});
  const Selection s = per_class_topk({l, y}, 5);
  EXPECT_TRUE(s.weights.isOnes(0.0));
  ASSERT_EQ(s.warnings.size(), 2u);
  EXPECT_NE(s.warnings[0].find("class -1"), std::string::npos);
  EXPECT_NE(s.warnings[1].find("class +1"), std::string::npos);
}

TEST(PerClassTopk, InfiniteLossesNeverSelected) {
  const Vector l = vec({kInf, 0.3, kInf, 0.1});
  const LabelVector y = labels({-1, -1, 1, 1});
  const Selection s = per_class_topk({l, y}, 2);
  EXPECT_EQ(s.weights, vec({0, 1, 0, 1}));
  EXPECT_EQ(s.warnings.size(), 2u);
}

TEST(PerClassTopk, RejectsNonPositiveK) {
  const Vector l = vec({0.1});
  const LabelVector y = labels({1});
  EXPECT_THROW(per_class_topk({l, y}, 0), Error);
}

TEST(ClassificationLosses, Examples) {
  const Matrix x = (Matrix(1, 3) << 1, 1, 1).finished();
  const LabelVector y = labels({1, -1, 1});
  const Vector zero = classification_losses(Vector::Zero(1), x, y);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(zero[i], std::log(2.0), 1e-15);

  const Vector l = classification_losses(vec({10.0}), x, y);
  EXPECT_NEAR(l[0], 4.5398e-5, 1e-9);
  EXPECT_NEAR(l[1], 10.0000454, 1e-7);
  EXPECT_NEAR(l[1], 10.0 + std::log1p(std::exp(-10.0)), 1e-12);
}

struct Draw {
  Vector losses;
  LabelVector labels;
};

Draw random_draw(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> level(0, 5);
  std::bernoulli_distribution infinite(0.15);
  Draw d{Vector(n), oracle::random_labels(n, rng)};
  // Coarse levels so ties occur often.
  for (int i = 0; i < n; ++i) d.losses[i] = infinite(rng) ? kInf : 0.25 * level(rng);
  return d;
}

double selected_value(const Selection& s, const Vector& losses) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < losses.size(); ++i)
    if (s.weights[i] != 0.0) total += losses[i];
  return total;
}

TEST(PerClassTopkProperty, MatchesExhaustiveOptimum) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(2, 8), kdist(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const Draw d = random_draw(rng, size(rng));
    const int k = kdist(rng);
    const Selection s = per_class_topk({d.losses, d.labels}, k);
    EXPECT_DOUBLE_EQ(selected_value(s, d.losses), oracle::best_selection_value(d.losses, d.labels, k))
        << "trial " << trial;
  }
}

TEST(PerClassTopkProperty, ExactCardinality) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> size(2, 40), kdist(1, 25);
  for (int trial = 0; trial < 300; ++trial) {
    const Draw d = random_draw(rng, size(rng));
    const int k = kdist(rng);
    const Selection s = per_class_topk({d.losses, d.labels}, k);
    for (int cls : {-1, 1}) {
      int finite = 0, chosen = 0;
      for (Eigen::Index i = 0; i < d.losses.size(); ++i) {
        if (d.labels[i] != cls) continue;
        if (std::isfinite(d.losses[i])) ++finite;
        if (s.weights[i] != 0.0) {
          ++chosen;
          EXPECT_TRUE(std::isfinite(d.losses[i]));
        }
      }
      EXPECT_EQ(chosen, std::min(k, finite));
    }
    EXPECT_EQ(s.mask.kept_negative.size() + s.mask.kept_positive.size(),
              static_cast<std::size_t>(s.weights.sum()));
  }
}

TEST(PerClassTopkProperty, PermutationEquivariant) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> kdist(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 15;
    // Distinct finite losses; with ties the index tie-break is not equivariant by design.
    Draw d{oracle::random_matrix(n, 1, rng).col(0).cwiseAbs(), oracle::random_labels(n, rng)};
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Draw p{Vector(n), LabelVector(n)};
    for (int i = 0; i < n; ++i) {
      p.losses[i] = d.losses[perm[i]];
      p.labels[i] = d.labels[perm[i]];
    }
    const int k = kdist(rng);
    const Vector a = per_class_topk({d.losses, d.labels}, k).weights;
    const Vector b = per_class_topk({p.losses, p.labels}, k).weights;
    for (int i = 0; i < n; ++i) EXPECT_EQ(b[i], a[perm[i]]);
  }
}

TEST(PerClassTopkProperty, Monotone) {
  std::mt19937_64 rng(24);
  std::uniform_int_distribution<int> kdist(1, 6);
  std::uniform_real_distribution<double> bump(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Draw d = random_draw(rng, 16);
    const int k = kdist(rng);
    const Vector base = per_class_topk({d.losses, d.labels}, k).weights;
    for (Eigen::Index i = 0; i < d.losses.size(); ++i) {
      if (!std::isfinite(d.losses[i])) continue;
      Vector changed = d.losses;
      if (base[i] == 0.0) changed[i] += bump(rng);
      else changed[i] = std::max(0.0, changed[i] - bump(rng));
      EXPECT_EQ(per_class_topk({changed, d.labels}, k).weights, base) << "trial " << trial;
    }
  }
}

}  // namespace
}  // namespace jointsel
