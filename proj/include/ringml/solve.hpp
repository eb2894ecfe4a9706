#pragma once

#include <Eigen/Dense>

namespace ringml {

/// Solves A X = B for symmetric positive (semi-)definite A via a robust
/// LDL^T factorization, verifying ||A X - B||_inf <= 1e-8 ||B||_inf.
/// Throws NumericError naming the offending pivot when A is numerically
/// singular.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace ringml
