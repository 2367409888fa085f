#pragma once

// Weighted logistic regression with a diagonal quadratic penalty,
//
//   f(w) = sum_i alpha_i * log(1 + exp(-y_i w'x_i)) + lambda * w' D w,
//
// minimized by damped Newton iterations. This is the classifier update of the
// alternating scheme; D carries the reweighted row-sparsity penalty.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/linalg.hpp"

namespace jointsel {

/// Numerically safe log(1 + exp(u)).
inline double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

/// 1 / (1 + exp(-t)) without overflow for either sign of t.
inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// h_w(x), kept strictly inside (0, 1) even where the exact value rounds to an
/// endpoint.
inline double sigmoid_score(const Vector& w, const Vector& x) {
  if (w.size() != x.size())
    throw Error(ErrorCode::kDimensionMismatch,
                "w has length " + std::to_string(w.size()) + ", x has length " +
                    std::to_string(x.size()));
  constexpr double kLow = std::numeric_limits<double>::min();
  constexpr double kHigh = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(logistic(w.dot(x)), kLow, kHigh);
}

/// Views into the data plus the per-sample weights and the penalty diagonal.
/// `features` is d x n with one sample per column.
struct LogisticSubproblem {
  const Matrix& features;
  const LabelVector& labels;
  const Vector& alpha;
  const Vector& d_diag;
  double lambda;
};

namespace detail {

inline void check_subproblem(const Vector& w, const LogisticSubproblem& sub) {
  const auto d = sub.features.rows();
  const auto n = sub.features.cols();
  if (w.size() != d || sub.d_diag.size() != d)
    throw Error(ErrorCode::kDimensionMismatch,
                "w/d_diag length must equal feature count " + std::to_string(d));
  if (sub.labels.size() != n || sub.alpha.size() != n)
    throw Error(ErrorCode::kDimensionMismatch,
                "labels/alpha length must equal sample count " + std::to_string(n));
}

/// The columns with nonzero weight, copied out in their original order, so
/// that samples with alpha_i = 0 take no part in any floating-point sum.
struct ActiveSamples {
  Matrix x;
  Vector y;  // labels as +/-1.0
  Vector weight;

  explicit ActiveSamples(const LogisticSubproblem& sub) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < sub.alpha.size(); ++i)
      if (sub.alpha[i] != 0.0) keep.push_back(i);
    const auto m = static_cast<Eigen::Index>(keep.size());
    x.resize(sub.features.rows(), m);
    y.resize(m);
    weight.resize(m);
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto i = keep[static_cast<std::size_t>(c)];
      x.col(c) = sub.features.col(i);
      y[c] = static_cast<double>(sub.labels[i]);
      weight[c] = sub.alpha[i];
    }
  }

  double loss(const Vector& w) const {
    const Vector margins = x.transpose() * w;
    double total = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i)
      total += weight[i] * softplus(-y[i] * margins[i]);
    return total;
  }

  void grad_hess(const Vector& w, const LogisticSubproblem& sub, Vector& a, Matrix& b) const {
    const Vector margins = x.transpose() * w;
    Vector residual(margins.size());
    Vector curvature(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double h = logistic(margins[i]);
      residual[i] = weight[i] * (h - 0.5 * (1.0 + y[i]));
      curvature[i] = weight[i] * h * (1.0 - h);
    }
    const Vector penalty = 2.0 * sub.lambda * sub.d_diag;
    a = x * residual + penalty.cwiseProduct(w);
    b = x * curvature.asDiagonal() * x.transpose();
    b.diagonal() += penalty;
    b = symmetrized(b);
  }
};

}  // namespace detail

/// sum_i alpha_i * softplus(-y_i w'x_i); the data term only.
inline double weighted_logistic_loss(const Vector& w, const LogisticSubproblem& sub) {
  detail::check_subproblem(w, sub);
  return detail::ActiveSamples(sub).loss(w);
}

/// Data term plus lambda * w' D w.
inline double logistic_objective(const Vector& w, const LogisticSubproblem& sub) {
  return weighted_logistic_loss(w, sub) +
         sub.lambda * (sub.d_diag.array() * w.array().square()).sum();
}

struct GradHess {
  Vector gradient;  // a
  Matrix hessian;   // B, exactly symmetric
};

inline GradHess grad_hess(const Vector& w, const LogisticSubproblem& sub) {
  detail::check_subproblem(w, sub);
  GradHess out;
  detail::ActiveSamples(sub).grad_hess(w, sub, out.gradient, out.hessian);
  return out;
}

struct NewtonOptions {
  int max_iters = 50;
  double grad_rel_tol = 1e-6;
  int max_halvings = 30;
};

struct NewtonResult {
  Vector w;
  int iterations = 0;
  bool converged = false;
  /// Subproblem objective at the start point and after each accepted step.
  std::vector<double> objective_path;
};

/// Damped Newton: w <- w - t * B^{-1} a, halving t until the objective does not
/// increase. If no step length up to 2^-max_halvings is acceptable the current
/// iterate is returned.
inline NewtonResult solve_w(const LogisticSubproblem& sub, const Vector& w_init,
                            const NewtonOptions& options = {}) {
  detail::check_subproblem(w_init, sub);
  if (!w_init.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "w_init is not finite");

  const detail::ActiveSamples active(sub);
  auto objective = [&](const Vector& w) {
    return active.loss(w) + sub.lambda * (sub.d_diag.array() * w.array().square()).sum();
  };

  NewtonResult result;
  result.w = w_init;
  double f = objective(result.w);
  result.objective_path.push_back(f);

  Vector a;
  Matrix b;
  active.grad_hess(result.w, sub, a, b);
  const double stop = options.grad_rel_tol * std::max(1.0, a.norm());

  for (int it = 0; it < options.max_iters; ++it) {
    if (a.norm() <= stop) {
      result.converged = true;
      break;
    }
    const Vector step = detail::solve_spd(b, a, "Newton system");

    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      Vector candidate = result.w - t * step;
      const double fc = objective(candidate);
      if (fc <= f) {
        result.w = std::move(candidate);
        f = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    ++result.iterations;
    result.objective_path.push_back(f);
    active.grad_hess(result.w, sub, a, b);
  }
  if (!result.converged && a.norm() <= stop) result.converged = true;
  return result;
}

}  // namespace jointsel
