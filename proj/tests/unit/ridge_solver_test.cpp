#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "jointsel/ridge_solver.hpp"
#include "oracles.hpp"

namespace jointsel {
namespace {

struct Problem {
  Matrix x;
  Vector z;
  std::vector<bool> present;
  Vector beta;
  Vector d_diag = Vector::Ones(2);
  RidgeSubproblem sub() const { return {x, z, present, beta, d_diag, 1.0, 1.0}; }
};

Problem two_by_two(Vector beta) {
  Problem p;
  p.x.resize(2, 2);
  p.x << 1, 3,  //
      2, 4;
  p.z.resize(2);
  p.z << 5, 6;
  p.present = {true, true};
  p.beta = std::move(beta);
  return p;
}

TEST(BuildWeightedSystem, SelectsColumnsByBeta) {
  const Problem p = two_by_two((Vector(2) << 1, 0).finished());
  const WeightedSystem sys = build_weighted_system(p.sub());
  EXPECT_EQ(sys.g, (Matrix(2, 2) << 1, 0, 2, 0).finished());
  EXPECT_EQ(sys.m, (Vector(2) << 5, 0).finished());
}

TEST(BuildWeightedSystem, AllZeroAndAllOne) {
  const Problem none = two_by_two(Vector::Zero(2));
  const WeightedSystem s0 = build_weighted_system(none.sub());
  EXPECT_TRUE(s0.g.isZero(0.0));
  EXPECT_TRUE(s0.m.isZero(0.0));

  const Problem all = two_by_two(Vector::Ones(2));
  const WeightedSystem s1 = build_weighted_system(all.sub());
  EXPECT_EQ(s1.g, all.x);
  EXPECT_EQ(s1.m, all.z);
}

TEST(BuildWeightedSystem, RejectsNonBinaryBeta) {
  const Problem p = two_by_two((Vector(2) << 0.5, 1).finished());
  EXPECT_THROW(build_weighted_system(p.sub()), Error);
}

TEST(BuildWeightedSystem, RejectsSelectedSampleWithoutTime) {
  Problem p = two_by_two(Vector::Ones(2));
  p.present[1] = false;
  EXPECT_THROW(build_weighted_system(p.sub()), Error);
}

TEST(SolveV, LeastSquaresLimitIsSampleMean) {
  const Matrix g = (Matrix(1, 2) << 1, 1).finished();
  const Vector m = (Vector(2) << 1, 3).finished();
  const Vector v = solve_v(g, m, Vector::Ones(1), 1e-12, 1.0);
  EXPECT_NEAR(v[0], 2.0, 1e-9);
}

TEST(SolveV, HandArithmetic) {
  const Vector v = solve_v(Matrix::Ones(1, 1), Vector::Constant(1, 2.0), Vector::Ones(1), 1.0, 1.0);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
}

TEST(SolveV, ZeroSystemGivesZero) {
  const Vector v = solve_v(Matrix::Zero(3, 4), Vector::Zero(4), Vector::Ones(3), 2.5, 0.1);
  EXPECT_TRUE(v.isZero(0.0));
}

TEST(SolveV, RejectsNonPositiveScalars) {
  EXPECT_THROW(solve_v(Matrix::Ones(1, 1), Vector::Ones(1), Vector::Ones(1), 0.0, 1.0), Error);
  EXPECT_THROW(solve_v(Matrix::Ones(1, 1), Vector::Ones(1), Vector::Ones(1), 1.0, 0.0), Error);
}

struct RandomSystem {
  Matrix g;
  Vector m;
  Vector d_diag;
  double lambda;
  double gamma;
};

RandomSystem random_system(std::mt19937_64& rng, int max_d, int max_n) {
  std::uniform_int_distribution<int> dim(1, max_d), count(1, max_n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = dim(rng), n = count(rng);
  RandomSystem s{oracle::random_matrix(d, n, rng), 5.0 * oracle::random_matrix(n, 1, rng).col(0),
                 Vector(d), 0.05 + unif(rng), 0.2 + 2.0 * unif(rng)};
  for (int j = 0; j < d; ++j) s.d_diag[j] = 0.1 + 3.0 * unif(rng);
  for (int i = 0; i < n; ++i) {
    if (unif(rng) < 0.25) {
      s.g.col(i).setZero();
      s.m[i] = 0.0;
    }
  }
  return s;
}

TEST(SolveV, StationarityOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomSystem s = random_system(rng, 8, 20);
    const Vector v = solve_v(s.g, s.m, s.d_diag, s.lambda, s.gamma);
    const Vector gm = s.g * s.m;
    Matrix system = s.g * s.g.transpose();
    system.diagonal() += (s.lambda / s.gamma) * s.d_diag;
    const double bound = 1e-8 * (1.0 + gm.cwiseAbs().maxCoeff());
    EXPECT_LT((system * v - gm).cwiseAbs().maxCoeff(), bound) << "trial " << trial;
  }
}

TEST(SolveV, AgreesWithGradientDescent) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const RandomSystem s = random_system(rng, 6, 12);
    const Vector v = solve_v(s.g, s.m, s.d_diag, s.lambda, s.gamma);
    const Vector ref = oracle::ridge_by_gradient_descent(s.g, s.m, s.d_diag, s.lambda / s.gamma);
    EXPECT_LT((v - ref).cwiseAbs().maxCoeff(), 1e-5) << "trial " << trial;
  }
}

TEST(SolveV, ZeroWeightSamplesAreNeutral) {
  std::mt19937_64 rng(13);
  std::bernoulli_distribution drop(0.4);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 4, n = 10;
    const Matrix x = oracle::random_matrix(d, n, rng);
    const Vector z = oracle::random_matrix(n, 1, rng).col(0);
    const std::vector<bool> present(n, true);
    Vector beta = Vector::Ones(n);
    std::vector<Eigen::Index> kept;
    for (int i = 0; i < n; ++i) {
      if (drop(rng)) beta[i] = 0.0;
      else kept.push_back(i);
    }
    const Vector d_diag = Vector::Constant(d, 0.8);
    const WeightedSystem full = build_weighted_system({x, z, present, beta, d_diag, 0.5, 2.0});

    const auto m = static_cast<Eigen::Index>(kept.size());
    Matrix xr(d, m);
    Vector zr(m);
    for (Eigen::Index c = 0; c < m; ++c) {
      xr.col(c) = x.col(kept[static_cast<std::size_t>(c)]);
      zr[c] = z[kept[static_cast<std::size_t>(c)]];
    }
    const Vector beta_r = Vector::Ones(m);
    const std::vector<bool> present_r(static_cast<std::size_t>(m), true);
    const WeightedSystem reduced =
        build_weighted_system({xr, zr, present_r, beta_r, d_diag, 0.5, 2.0});

    EXPECT_TRUE(solve_v(full.g, full.m, d_diag, 0.5, 2.0) ==
                solve_v(reduced.g, reduced.m, d_diag, 0.5, 2.0))
        << "trial " << trial;
  }
}

TEST(RegressionLosses, SquaredResidualAndMissingSentinel) {
  const Matrix x = (Matrix(1, 4) << 2, 1, 1, 1).finished();
  const Vector z = (Vector(4) << 5, 1, 1, 1).finished();
  const std::vector<bool> present = {true, true, true, false};
  const Vector l = regression_losses(Vector::Ones(1), x, z, present);
  EXPECT_DOUBLE_EQ(l[0], 9.0);
  EXPECT_DOUBLE_EQ(l[1], 0.0);
  EXPECT_TRUE(std::isinf(l[3]) && l[3] > 0);
}

TEST(RegressionLosses, ExactFitGivesZeros) {
  std::mt19937_64 rng(14);
  const Matrix x = oracle::random_matrix(3, 6, rng);
  const Vector v = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const Vector z = x.transpose() * v;
  const Vector l = regression_losses(v, x, z, std::vector<bool>(6, true));
  EXPECT_TRUE(l.isZero(0.0));
}

}  // namespace
}  // namespace jointsel
