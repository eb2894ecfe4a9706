#include "ringml/solve.hpp"

#include <string>

#include "ringml/errors.hpp"

namespace ringml {

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != A.cols() || A.rows() != B.rows()) {
    throw UsageError("solve_spd: dimension mismatch");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const auto fail_pivot = [&]() {
    Eigen::Index worst = 0;
    ldlt.vectorD().cwiseAbs().minCoeff(&worst);
    throw NumericError("solve_spd: matrix is numerically singular at pivot " +
                       std::to_string(worst));
  };
  if (ldlt.info() != Eigen::Success) fail_pivot();
  const Eigen::MatrixXd x = ldlt.solve(B);
  const double b_norm = B.cwiseAbs().maxCoeff();
  const double residual = (A * x - B).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-8 * std::max(b_norm, 1e-300)) || !x.allFinite()) fail_pivot();
  return x;
}

}  // namespace ringml
