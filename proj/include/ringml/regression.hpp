#pragma once

#include <Eigen/Dense>
#include <span>

#include "ringml/cofactor.hpp"

namespace ringml {

/// Batch gradient descent configuration for ridge training on a cofactor.
struct GdConfig {
  double learning_rate = 0.1;
  double ridge_lambda = 1e-4;
  int max_epochs = 10000;
  /// Stop when the relative loss decrease stays below this for `patience`
  /// consecutive epochs.
  double tolerance = 1e-6;
  int patience = 5;
  /// Run the descent in a standardized basis derived from the cofactor's
  /// column means and variances; the returned parameters are always
  /// de-standardized, so predictions are basis-invariant.
  bool standardize = true;
  /// Use the N - M - 1 residual-variance denominator instead of N.
  bool unbiased_variance = false;
};

struct RegressionModel {
  /// Full parameter vector over the dense basis, intercept first, with the
  /// target's coefficient fixed at -1.
  Eigen::VectorXd theta;
  double sigma2 = 0.0;
  int target = -1;  // attribute id
  CofactorLayout layout;
  int epochs = 0;
  double loss = 0.0;

  /// Coefficient view without the pinned target entry.
  Eigen::VectorXd coefficients() const;
};

/// Trains ridge regression by batch gradient descent on the cofactor:
/// each epoch applies theta <- theta - alpha ((1/N) C theta + lambda theta)
/// on the free coordinates, leaving the intercept unpenalized and the
/// target pinned at -1. Throws NumericError on divergence (five consecutive
/// loss increases), suggesting a smaller learning rate.
RegressionModel train_ridge(const DenseCofactor& cof, int target_attr, const GdConfig& cfg);

/// Residual variance sigma^2 = theta^T C theta / N (theta includes the -1
/// target coefficient), clamped at zero against negative float residue.
/// With unbiased = true the denominator is N - M - 1 for M predictors.
double residual_variance(const DenseCofactor& cof, const Eigen::VectorXd& theta,
                         bool unbiased = false);

/// Deterministic part x^T theta' of a prediction; `values` holds one entry
/// per attribute (codes as integral doubles). The target column is ignored.
double predict_mean(const RegressionModel& model, std::span<const double> values);

/// Stochastic prediction x^T theta' + eps with eps = BoxMuller(u1, u2) * sigma.
double predict_stochastic(const RegressionModel& model, std::span<const double> values,
                          double u1, double u2);

}  // namespace ringml
