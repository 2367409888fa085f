#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <string>

#include "jointsel/error.hpp"

namespace jointsel::detail {

/// Solves A x = b for symmetric positive-definite A by Cholesky. On failure
/// (non-PD pivot or non-finite result) retries once with a diagonal jitter of
/// 1e-10 * trace(A)/dim.
inline Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                 const char* what) {
  auto attempt = [&](const Eigen::MatrixXd& m, Eigen::VectorXd& x) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
    x = llt.solve(b);
    return x.allFinite();
  };

  Eigen::VectorXd x;
  if (a.allFinite() && attempt(a, x)) return x;

  const auto dim = a.rows();
  const double jitter = 1e-10 * a.trace() / static_cast<double>(dim > 0 ? dim : 1);
  Eigen::MatrixXd jittered = a;
  jittered.diagonal().array() += jitter;
  if (jittered.allFinite() && std::isfinite(jitter) && attempt(jittered, x)) return x;

  throw Error(ErrorCode::kLinearSolveFailure,
              std::string(what) + ": system is not positive definite even after jitter");
}

/// Exactly symmetric copy: entry (i,j) and (j,i) are the same rounded sum.
inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace jointsel::detail
