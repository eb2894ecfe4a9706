#include "ringml/regression.hpp"

#include <cmath>

#include "ringml/errors.hpp"
#include "ringml/noise.hpp"

namespace ringml {

Eigen::VectorXd RegressionModel::coefficients() const {
  const int t = layout.column_of(target);
  Eigen::VectorXd out(theta.size() - 1);
  int k = 0;
  for (int i = 0; i < theta.size(); ++i) {
    if (i != t) out[k++] = theta[i];
  }
  return out;
}

namespace {

// Affine change of basis x~ = A x standardizing every non-intercept column
// to zero mean and unit variance. Degenerate (constant) columns are only
// centered, which zeroes them out and folds their contribution into the
// intercept.
Eigen::MatrixXd standardize_transform(const Eigen::MatrixXd& c, Eigen::VectorXd& sd_out) {
  const int w = static_cast<int>(c.rows());
  const double n = c(0, 0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(w, w);
  a(0, 0) = 1.0;
  sd_out.setOnes(w);
  for (int k = 1; k < w; ++k) {
    const double mean = c(0, k) / n;
    const double var = c(k, k) / n - mean * mean;
    const double scale = std::max(c(k, k) / n, 1.0);
    const double sd = var > 1e-24 * scale ? std::sqrt(var) : 1.0;
    sd_out[k] = sd;
    a(k, k) = 1.0 / sd;
    a(k, 0) = -mean / sd;
  }
  return a;
}

}  // namespace

RegressionModel train_ridge(const DenseCofactor& cof, int target_attr, const GdConfig& cfg) {
  const AttrSpace& space = *cof.layout.space;
  if (target_attr < 0 || target_attr >= space.size()) {
    throw UsageError("train_ridge: target attribute out of range");
  }
  if (!space.is_continuous(target_attr)) {
    throw UsageError("train_ridge: target attribute '" + space.name(target_attr) +
                     "' must be continuous");
  }
  if (cfg.learning_rate <= 0.0) throw UsageError("train_ridge: learning rate must be positive");
  if (cfg.max_epochs < 1) throw UsageError("train_ridge: max_epochs must be at least 1");
  if (cfg.ridge_lambda < 0.0) throw UsageError("train_ridge: ridge penalty must be >= 0");
  const double n = cof.count();
  if (!(n > 0.0)) throw UsageError("train_ridge: empty cofactor (N = 0)");

  const int w = cof.width();
  const int t = cof.layout.column_of(target_attr);

  Eigen::MatrixXd c = cof.matrix;
  Eigen::MatrixXd basis;  // x~ = basis * x when standardizing
  Eigen::VectorXd sd;
  if (cfg.standardize) {
    basis = standardize_transform(cof.matrix, sd);
    c = basis * cof.matrix * basis.transpose();
  }

  // Penalty applies to every free coordinate except the intercept.
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(w, cfg.ridge_lambda);
  penalty[0] = 0.0;
  penalty[t] = 0.0;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(w);
  theta[t] = -1.0;

  const auto loss_of = [&](const Eigen::VectorXd& th) {
    const double quad = th.dot(c * th) / (2.0 * n);
    const double reg = 0.5 * (penalty.array() * th.array().square()).sum();
    return quad + reg;
  };

  double loss = loss_of(theta);
  int flat_epochs = 0;
  int rising_epochs = 0;
  int epoch = 0;
  Eigen::VectorXd grad(w);
  for (; epoch < cfg.max_epochs; ++epoch) {
    grad = (c * theta) / n + penalty.cwiseProduct(theta);
    grad[t] = 0.0;
    theta -= cfg.learning_rate * grad;
    const double next = loss_of(theta);
    if (next > loss) {
      if (++rising_epochs >= 5) {
        throw NumericError(
            "train_ridge: loss increased for 5 consecutive epochs; "
            "the descent is diverging, try a smaller learning rate");
      }
    } else {
      rising_epochs = 0;
    }
    const double decrease = (loss - next) / std::max(std::abs(next), 1e-300);
    loss = next;
    if (decrease < cfg.tolerance) {
      if (++flat_epochs >= cfg.patience) {
        ++epoch;
        break;
      }
    } else {
      flat_epochs = 0;
    }
  }

  RegressionModel model;
  model.target = target_attr;
  model.layout = cof.layout;
  model.epochs = epoch;
  model.loss = loss;
  model.theta = cfg.standardize ? Eigen::VectorXd(sd[t] * (basis.transpose() * theta)) : theta;
  model.sigma2 = residual_variance(cof, model.theta, cfg.unbiased_variance);
  return model;
}

double residual_variance(const DenseCofactor& cof, const Eigen::VectorXd& theta, bool unbiased) {
  const double n = cof.count();
  if (!(n > 0.0)) throw UsageError("residual_variance: empty cofactor (N = 0)");
  double denom = n;
  if (unbiased) {
    denom = n - (cof.width() - 2) - 1;
    if (denom <= 0.0) {
      throw NumericError("residual_variance: N - M - 1 <= 0; too few rows for the unbiased denominator");
    }
  }
  const double quad = theta.dot(cof.matrix * theta);
  return std::max(quad, 0.0) / denom;
}

double predict_mean(const RegressionModel& model, std::span<const double> values) {
  const CofactorLayout& layout = model.layout;
  const AttrSpace& space = *layout.space;
  double y = model.theta[0];
  for (int a = 0; a < space.size(); ++a) {
    if (a == model.target) continue;
    if (space.is_continuous(a)) {
      y += model.theta[layout.column_of(a)] * values[a];
    } else {
      const int col = layout.column_of(a, static_cast<std::int32_t>(values[a]));
      if (col >= 0) y += model.theta[col];
    }
  }
  return y;
}

double predict_stochastic(const RegressionModel& model, std::span<const double> values,
                          double u1, double u2) {
  return predict_mean(model, values) + box_muller(u1, u2, std::sqrt(model.sigma2));
}

}  // namespace ringml
