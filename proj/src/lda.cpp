#include "ringml/lda.hpp"

#include <algorithm>
#include <cmath>

#include "ringml/errors.hpp"
#include "ringml/solve.hpp"

namespace ringml {

namespace {

LdaModel train_lda_impl(const Triple& t, int target_attr, double shrinkage) {
  const AttrSpace& space = t.space();
  if (target_attr < 0 || target_attr >= space.size() || space.is_continuous(target_attr)) {
    throw UsageError("train_lda: target must be a categorical attribute");
  }
  if (shrinkage < 0.0 || shrinkage > 1.0) {
    throw UsageError("train_lda: shrinkage must be within [0, 1]");
  }
  const DenseCofactor dense = to_dense(t);
  const CofactorLayout& layout = dense.layout;
  const double n = dense.count();

  LdaModel model;
  model.target = target_attr;
  model.layout = layout;
  model.classes = layout.categories[target_attr];
  const int c_count = model.class_count();
  if (c_count < 2) {
    throw DataError("train_lda: target '" + space.name(target_attr) +
                    "' has fewer than 2 observed classes");
  }
  if (!(n > static_cast<double>(c_count))) {
    throw DataError("train_lda: need more training rows than classes");
  }

  const int t_begin = layout.col_begin[target_attr];
  const int t_width = layout.col_width[target_attr];
  for (int col = 1; col < layout.width; ++col) {
    if (col < t_begin || col >= t_begin + t_width) model.feature_cols.push_back(col);
  }
  const int f = static_cast<int>(model.feature_cols.size());

  // N_c sits on the target's diagonal; SUM(X_i) group by target sits in the
  // feature x target cells of the expanded matrix.
  model.priors.resize(c_count);
  model.means.resize(f, c_count);
  Eigen::VectorXd class_n(c_count);
  for (int c = 0; c < c_count; ++c) {
    const int tc = t_begin + c;
    class_n[c] = dense.matrix(tc, tc);
    model.priors[c] = class_n[c] / n;
    for (int i = 0; i < f; ++i) {
      model.means(i, c) = dense.matrix(model.feature_cols[i], tc) / class_n[c];
    }
  }

  Eigen::MatrixXd q_feat(f, f);
  for (int i = 0; i < f; ++i) {
    for (int j = 0; j < f; ++j) {
      q_feat(i, j) = dense.matrix(model.feature_cols[i], model.feature_cols[j]);
    }
  }
  Eigen::MatrixXd sigma = q_feat / n;
  for (int c = 0; c < c_count; ++c) {
    sigma.noalias() -= (class_n[c] / n) * (model.means.col(c) * model.means.col(c).transpose());
  }
  model.sigma = sigma;
  model.shrinkage_used = shrinkage;

  Eigen::MatrixXd shrunk = sigma;
  if (shrinkage > 0.0) {
    shrunk = (1.0 - shrinkage) * sigma;
    shrunk.diagonal() = sigma.diagonal();
  }

  // Constant features carry no class information and would make the system
  // singular; solve on the informative block and leave their weights at 0.
  const double diag_max = shrunk.diagonal().maxCoeff();
  std::vector<int> live;
  for (int i = 0; i < f; ++i) {
    if (shrunk(i, i) > 1e-12 * std::max(diag_max, 1e-300)) live.push_back(i);
  }
  if (live.empty()) {
    throw NumericError("train_lda: every feature is constant; covariance is zero");
  }
  const int fl = static_cast<int>(live.size());
  Eigen::MatrixXd sigma_live(fl, fl);
  Eigen::MatrixXd means_live(fl, c_count);
  for (int i = 0; i < fl; ++i) {
    means_live.row(i) = model.means.row(live[i]);
    for (int j = 0; j < fl; ++j) sigma_live(i, j) = shrunk(live[i], live[j]);
  }

  const Eigen::MatrixXd a_live = solve_spd(sigma_live, means_live);
  model.a = Eigen::MatrixXd::Zero(f, c_count);
  for (int i = 0; i < fl; ++i) model.a.row(live[i]) = a_live.row(i);

  model.b.resize(c_count);
  for (int c = 0; c < c_count; ++c) {
    model.b[c] = std::log(model.priors[c]) -
                 0.5 * means_live.col(c).dot(a_live.col(c));
  }
  return model;
}

}  // namespace

LdaModel train_lda(const Triple& t, int target_attr, double shrinkage) {
  if (shrinkage > 0.0) return train_lda_impl(t, target_attr, shrinkage);
  try {
    return train_lda_impl(t, target_attr, 0.0);
  } catch (const NumericError&) {
    // Singular at zero shrinkage: retry with a whisper of regularization.
    LdaModel model = train_lda_impl(t, target_attr, 1e-6);
    model.shrinkage_used = 1e-6;
    return model;
  }
}

Eigen::VectorXd lda_scores(const LdaModel& model, std::span<const double> values) {
  const CofactorLayout& layout = model.layout;
  const AttrSpace& space = *layout.space;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.feature_cols.size());
  // Expand the row in the feature basis (dense layout minus intercept and
  // target block). feature_cols is sorted, so positions resolve by search.
  auto feature_pos = [&](int col) {
    const auto it = std::lower_bound(model.feature_cols.begin(), model.feature_cols.end(), col);
    return (it != model.feature_cols.end() && *it == col)
               ? static_cast<int>(it - model.feature_cols.begin())
               : -1;
  };
  for (int a = 0; a < space.size(); ++a) {
    if (a == model.target) continue;
    if (space.is_continuous(a)) {
      const int pos = feature_pos(layout.column_of(a));
      if (pos >= 0) x[pos] = values[a];
    } else {
      const int col = layout.column_of(a, static_cast<std::int32_t>(values[a]));
      if (col >= 0) {
        const int pos = feature_pos(col);
        if (pos >= 0) x[pos] = 1.0;
      }
    }
  }
  return model.a.transpose() * x + model.b;
}

std::int32_t predict_lda(const LdaModel& model, std::span<const double> values) {
  const Eigen::VectorXd scores = lda_scores(model, values);
  int best = 0;
  for (int c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;  // ties keep the smaller code
  }
  return model.classes[best];
}

}  // namespace ringml
