#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "ringml/cofactor.hpp"
#include "ringml/triple.hpp"

namespace ringml {

/// Linear discriminant analysis parameters trained from one cofactor triple.
/// Features are the one-hot-expanded attributes excluding both the intercept
/// and the target; classes are the target's observed codes, ascending.
struct LdaModel {
  std::vector<std::int32_t> classes;
  Eigen::VectorXd priors;   // pi_c
  Eigen::MatrixXd means;    // features x classes
  Eigen::MatrixXd a;        // features x classes, a_c = Sigma^-1 mu_c
  Eigen::VectorXd b;        // b_c = ln pi_c - mu_c^T a_c / 2
  Eigen::MatrixXd sigma;    // shared covariance, kept for diagnostics
  double shrinkage_used = 0.0;
  int target = -1;
  CofactorLayout layout;
  std::vector<int> feature_cols;  // dense columns forming the feature space

  int class_count() const { return static_cast<int>(classes.size()); }
};

/// Trains LDA from the triple's aggregates: N_c and mu_c come from the
/// target's group-by slots, the shared covariance from the feature block
/// Sigma = Q_feat / N - sum_c (N_c / N) mu_c mu_c^T, shrunk towards its
/// diagonal by `shrinkage`. A singular covariance at zero shrinkage retries
/// once with 1e-6 (recorded in the model) before giving up.
LdaModel train_lda(const Triple& t, int target_attr, double shrinkage = 0.0);

/// argmax_c a_c^T x + b_c; ties resolve to the smallest class code.
std::int32_t predict_lda(const LdaModel& model, std::span<const double> values);

/// Per-class decision scores for a row (ordered like model.classes).
Eigen::VectorXd lda_scores(const LdaModel& model, std::span<const double> values);

}  // namespace ringml
