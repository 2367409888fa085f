#pragma once

// Closed-form regressor update: minimize
//   || v'G - m ||^2 + (lambda / gamma) * v' D v
// with G = [beta_1 x_1, ..., beta_n x_n] and m = [beta_1 z_1, ..., beta_n z_n].

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/linalg.hpp"

namespace jointsel {

struct RidgeSubproblem {
  const Matrix& features;
  const Vector& times;
  const std::vector<bool>& time_present;
  const Vector& beta;
  const Vector& d_diag;
  double lambda;
  double gamma;
};

struct WeightedSystem {
  Matrix g;  // d x n
  Vector m;  // length n
};

/// Builds G and m. beta must be 0/1 and zero wherever the time is missing: with
/// binary weights beta_i^2 = beta_i, so the squared residual below is exactly
/// the beta-weighted one.
inline WeightedSystem build_weighted_system(const RidgeSubproblem& sub) {
  const auto n = sub.features.cols();
  if (sub.beta.size() != n || sub.times.size() != n ||
      static_cast<Eigen::Index>(sub.time_present.size()) != n)
    throw Error(ErrorCode::kDimensionMismatch,
                "beta/times/time_present length must equal sample count " + std::to_string(n));
  WeightedSystem sys{Matrix::Zero(sub.features.rows(), n), Vector::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double b = sub.beta[i];
    if (b != 0.0 && b != 1.0)
      throw Error(ErrorCode::kInvalidArgument,
                  "beta must be 0/1, got " + std::to_string(b) + " at sample " + std::to_string(i),
                  static_cast<std::size_t>(i));
    if (b == 0.0) continue;
    if (!sub.time_present[static_cast<std::size_t>(i)])
      throw Error(ErrorCode::kInvalidArgument,
                  "beta selects sample " + std::to_string(i) + " which has no conversion time",
                  static_cast<std::size_t>(i));
    sys.g.col(i) = sub.features.col(i);
    sys.m[i] = sub.times[i];
  }
  return sys;
}

/// v = (G G' + (lambda/gamma) D)^{-1} G m.
///
/// All-zero columns of G are dropped before forming G G', so samples with zero
/// weight do not enter any sum. One step of iterative refinement follows the
/// Cholesky solve.
inline Vector solve_v(const Matrix& g, const Vector& m, const Vector& d_diag, double lambda,
                      double gamma) {
  if (!(lambda > 0.0) || !(gamma > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "lambda and gamma must be positive");
  if (m.size() != g.cols() || d_diag.size() != g.rows())
    throw Error(ErrorCode::kDimensionMismatch, "G, m and d_diag sizes disagree");
  if ((d_diag.array() <= 0.0).any())
    throw Error(ErrorCode::kInvalidArgument, "d_diag entries must be positive");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < g.cols(); ++i)
    if (m[i] != 0.0 || !g.col(i).isZero(0.0)) keep.push_back(i);
  Matrix gc(g.rows(), static_cast<Eigen::Index>(keep.size()));
  Vector mc(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    gc.col(static_cast<Eigen::Index>(c)) = g.col(keep[c]);
    mc[static_cast<Eigen::Index>(c)] = m[keep[c]];
  }

  Matrix system = gc * gc.transpose();
  system.diagonal() += (lambda / gamma) * d_diag;
  system = detail::symmetrized(system);
  const Vector rhs = gc * mc;

  Vector v = detail::solve_spd(system, rhs, "ridge system");
  const Vector residual = rhs - system * v;
  const Vector correction = detail::solve_spd(system, residual, "ridge refinement");
  if (correction.allFinite()) v += correction;
  return v;
}

/// Per-sample squared residual (v'x_i - z_i)^2; +infinity where the time is
/// missing so those samples sort last and are never selected.
inline Vector regression_losses(const Vector& v, const Matrix& features, const Vector& times,
                                const std::vector<bool>& time_present) {
  if (v.size() != features.rows())
    throw Error(ErrorCode::kDimensionMismatch, "v length must equal feature count");
  const Vector pred = features.transpose() * v;
  Vector out(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!time_present[static_cast<std::size_t>(i)]) {
      out[i] = std::numeric_limits<double>::infinity();
    } else {
      const double r = pred[i] - times[i];
      out[i] = r * r;
    }
  }
  return out;
}

inline Vector regression_losses(const Vector& v, const Dataset& ds) {
  return regression_losses(v, ds.features, ds.times, ds.time_present);
}

}  // namespace jointsel
