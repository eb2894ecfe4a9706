#include "ringml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ringml/cofactor.hpp"
#include "ringml/errors.hpp"
#include "ringml/noise.hpp"

namespace ringml {

const char* pattern_name(MissPattern p) {
  switch (p) {
    case MissPattern::kMcar:
      return "mcar";
    case MissPattern::kMar:
      return "mar";
    case MissPattern::kMnar:
      return "mnar";
  }
  return "?";
}

MissPattern pattern_from_name(const std::string& name) {
  if (name == "mcar") return MissPattern::kMcar;
  if (name == "mar") return MissPattern::kMar;
  if (name == "mnar") return MissPattern::kMnar;
  throw UsageError("unknown missing pattern '" + name + "' (use mcar, mar, or mnar)");
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_complete_table(const Table& t, const char* op) {
  for (int c : t.schema.feature_columns()) {
    for (std::int64_t r = 0; r < t.rows; ++r) {
      if (t.is_missing(c, r)) {
        throw DataError(std::string(op) + ": input table must be complete, but column '" +
                        t.schema.columns[c].name + "' has missing values");
      }
    }
  }
}

// Standardized column values (mean 0, sd 1 over the given rows).
std::vector<double> standardized(const Table& t, int col,
                                 const std::vector<std::int64_t>& rows) {
  std::vector<double> z(rows.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) mean += t.cont[col][rows[i]];
  mean /= static_cast<double>(rows.size());
  double var = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double d = t.cont[col][rows[i]] - mean;
    var += d * d;
  }
  var /= static_cast<double>(rows.size());
  const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) z[i] = (t.cont[col][rows[i]] - mean) / sd;
  return z;
}

// rate-preserving monotone masking probabilities from standardized values
std::vector<double> mask_probabilities(const std::vector<double>& z, double rate) {
  std::vector<double> p(z.size());
  double mean_sig = 0.0;
  for (double v : z) mean_sig += sigmoid(2.0 * v);
  mean_sig /= static_cast<double>(z.size());
  double mean_after = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::clamp(rate * sigmoid(2.0 * z[i]) / mean_sig, 0.0, 1.0);
    mean_after += p[i];
  }
  mean_after /= static_cast<double>(z.size());
  if (mean_after < rate - 1e-6) {
    throw DataError("injection rate " + std::to_string(rate) +
                    " is infeasible: clipped probabilities only reach " +
                    std::to_string(mean_after));
  }
  return p;
}

void mask_cell(Table& t, int col, std::int64_t row) {
  t.miss[col][row] = 1;
  if (t.schema.columns[col].kind == ColumnKind::kContinuous) {
    t.cont[col][row] = std::numeric_limits<double>::quiet_NaN();
  } else {
    t.codes[col][row] = 0;
  }
}

}  // namespace

Table inject(const Table& complete, const InjectionSpec& spec,
             std::span<const std::int64_t> protected_rows) {
  require_complete_table(complete, "inject");
  if (spec.rate < 0.0 || spec.rate >= 1.0) {
    throw UsageError("inject: rate must lie in [0, 1)");
  }
  std::vector<int> targets;
  for (const auto& name : spec.target_columns) {
    const int col = complete.schema.index_of(name);
    if (col < 0) throw UsageError("inject: no column named '" + name + "'");
    if (complete.schema.columns[col].role != ColumnRole::kFeature) {
      throw UsageError("inject: column '" + name + "' is not a feature column");
    }
    targets.push_back(col);
  }
  if (targets.empty()) throw UsageError("inject: no target columns given");

  Table masked = complete;
  if (spec.rate == 0.0) return masked;

  std::vector<std::uint8_t> is_protected(complete.rows, 0);
  for (const std::int64_t r : protected_rows) is_protected[r] = 1;
  std::vector<std::int64_t> maskable;
  for (std::int64_t r = 0; r < complete.rows; ++r) {
    if (!is_protected[r]) maskable.push_back(r);
  }
  if (maskable.empty()) throw UsageError("inject: every row is protected");

  switch (spec.pattern) {
    case MissPattern::kMcar: {
      for (const int col : targets) {
        for (const std::int64_t r : maskable) {
          if (uniform_one(spec.seed, NoiseStream::kInject, col, 0, r) < spec.rate) {
            mask_cell(masked, col, r);
          }
        }
      }
      break;
    }
    case MissPattern::kMar: {
      const int driver = complete.schema.index_of(spec.driver_column);
      if (driver < 0) {
        throw UsageError("inject: MAR needs a driver column, got '" + spec.driver_column + "'");
      }
      if (complete.schema.columns[driver].kind != ColumnKind::kContinuous) {
        throw UsageError("inject: MAR driver '" + spec.driver_column + "' must be continuous");
      }
      if (std::find(targets.begin(), targets.end(), driver) != targets.end()) {
        throw UsageError("inject: MAR driver must not be a target column");
      }
      const std::vector<double> p = mask_probabilities(standardized(complete, driver, maskable),
                                                       spec.rate);
      for (const int col : targets) {
        for (std::size_t i = 0; i < maskable.size(); ++i) {
          if (uniform_one(spec.seed, NoiseStream::kInject, col, 0, maskable[i]) < p[i]) {
            mask_cell(masked, col, maskable[i]);
          }
        }
      }
      break;
    }
    case MissPattern::kMnar: {
      for (const int col : targets) {
        std::vector<double> z;
        if (complete.schema.columns[col].kind == ColumnKind::kContinuous) {
          z = standardized(complete, col, maskable);
        } else {
          // standardize the integer codes; declared behaviour for
          // categorical targets
          z.resize(maskable.size());
          for (std::size_t i = 0; i < maskable.size(); ++i) {
            z[i] = static_cast<double>(complete.codes[col][maskable[i]]);
          }
          double mean = 0.0;
          for (double v : z) mean += v;
          mean /= static_cast<double>(z.size());
          double var = 0.0;
          for (double v : z) var += (v - mean) * (v - mean);
          var /= static_cast<double>(z.size());
          const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
          for (double& v : z) v = (v - mean) / sd;
        }
        const std::vector<double> p = mask_probabilities(z, spec.rate);
        for (std::size_t i = 0; i < maskable.size(); ++i) {
          if (uniform_one(spec.seed, NoiseStream::kInject, col, 0, maskable[i]) < p[i]) {
            mask_cell(masked, col, maskable[i]);
          }
        }
      }
      break;
    }
  }
  return masked;
}

std::vector<std::int64_t> holdout_rows(std::uint64_t seed, std::int64_t rows, double fraction) {
  std::vector<std::int64_t> test;
  for (std::int64_t r = 0; r < rows; ++r) {
    if (uniform_one(seed, NoiseStream::kSplit, 0, 0, r) < fraction) test.push_back(r);
  }
  return test;
}

Table mean_impute(const Table& masked) {
  Table out = masked;
  initial_impute_in_place(out);
  return out;
}

QualityReport evaluate(const Table& imputed, const Table& truth,
                       const std::string& downstream_target,
                       std::span<const std::int64_t> test_rows, const GdConfig& gd) {
  if (imputed.rows != truth.rows || imputed.schema.size() != truth.schema.size()) {
    throw UsageError("evaluate: imputed and truth tables do not line up");
  }
  QualityReport report;

  for (int c : imputed.schema.feature_columns()) {
    std::int64_t masked = 0;
    double sq = 0.0;
    std::int64_t wrong = 0;
    const bool continuous = imputed.schema.columns[c].kind == ColumnKind::kContinuous;
    for (std::int64_t r = 0; r < imputed.rows; ++r) {
      if (!imputed.is_missing(c, r)) continue;
      ++masked;
      if (continuous) {
        const double d = imputed.cont[c][r] - truth.cont[c][r];
        sq += d * d;
      } else {
        wrong += imputed.codes[c][r] != truth.codes[c][r];
      }
    }
    if (masked == 0) continue;
    const std::string& name = imputed.schema.columns[c].name;
    if (continuous) {
      report.cell_rmse[name] = std::sqrt(sq / static_cast<double>(masked));
    } else {
      report.cell_error_rate[name] =
          static_cast<double>(wrong) / static_cast<double>(masked);
    }
  }

  // Downstream model: ridge over the imputed training rows, scored against
  // ground truth on the held-out rows.
  const int target = imputed.schema.index_of(downstream_target);
  if (target < 0) {
    throw UsageError("evaluate: no downstream target column '" + downstream_target + "'");
  }
  if (imputed.schema.columns[target].kind != ColumnKind::kContinuous) {
    throw UsageError("evaluate: downstream target must be continuous");
  }
  std::vector<std::uint8_t> is_test(imputed.rows, 0);
  for (const std::int64_t r : test_rows) is_test[r] = 1;
  std::vector<std::int64_t> train_rows;
  for (std::int64_t r = 0; r < imputed.rows; ++r) {
    if (!is_test[r]) train_rows.push_back(r);
  }
  if (test_rows.empty() || train_rows.empty()) {
    throw UsageError("evaluate: both splits must be non-empty");
  }

  const TableSpace ts = make_table_space(imputed);
  const auto cols = bind_columns(imputed, ts);
  const Triple triple = aggregate(ts.space, cols, train_rows);
  int target_attr = -1;
  for (std::size_t a = 0; a < ts.attr_col.size(); ++a) {
    if (ts.attr_col[a] == target) target_attr = static_cast<int>(a);
  }
  const RegressionModel model = train_ridge(to_dense(triple), target_attr, gd);

  double sq = 0.0;
  double y_mean = 0.0;
  std::vector<double> buf(ts.space->size());
  for (const std::int64_t r : test_rows) y_mean += truth.cont[target][r];
  y_mean /= static_cast<double>(test_rows.size());
  double ss_tot = 0.0;
  for (const std::int64_t r : test_rows) {
    for (std::size_t a = 0; a < ts.attr_col.size(); ++a) {
      buf[a] = truth.feature_value(ts.attr_col[a], r);
    }
    const double y_hat = predict_mean(model, buf);
    const double y = truth.cont[target][r];
    sq += (y_hat - y) * (y_hat - y);
    ss_tot += (y - y_mean) * (y - y_mean);
  }
  report.downstream_rmse = std::sqrt(sq / static_cast<double>(test_rows.size()));
  report.downstream_r2 = ss_tot > 0.0 ? 1.0 - sq / ss_tot : 0.0;
  return report;
}

Table synth(const SynthSpec& spec) {
  if (spec.rows < 1) throw UsageError("synth: rows must be positive");
  if (spec.predictors < 1) throw UsageError("synth: need at least one predictor");
  if (spec.correlation < 0.0 || spec.correlation >= 1.0) {
    throw UsageError("synth: correlation must lie in [0, 1)");
  }
  if (spec.r2 <= 0.0 || spec.r2 > 1.0) throw UsageError("synth: r2 must lie in (0, 1]");
  if (spec.categoricals > 0 && spec.classes < 2) {
    throw UsageError("synth: categorical columns need at least 2 classes");
  }

  Table t;
  for (int j = 0; j < spec.predictors; ++j) {
    t.schema.columns.push_back({"x" + std::to_string(j), ColumnKind::kContinuous,
                                ColumnRole::kFeature});
  }
  for (int j = 0; j < spec.categoricals; ++j) {
    t.schema.columns.push_back({"c" + std::to_string(j), ColumnKind::kCategorical,
                                ColumnRole::kFeature});
    t.schema.columns.push_back({"s" + std::to_string(j), ColumnKind::kContinuous,
                                ColumnRole::kFeature});
  }
  t.schema.columns.push_back({"y", ColumnKind::kContinuous, ColumnRole::kFeature});
  t.rows = spec.rows;
  t.init_storage();

  const int p = spec.predictors;
  const double c = spec.correlation;
  // equicorrelated block via a shared factor: x_j = sqrt(c) f + sqrt(1-c) e_j
  const double f_w = std::sqrt(c);
  const double e_w = std::sqrt(1.0 - c);
  const double signal_var = p + c * p * (p - 1);
  const double noise_sd = std::sqrt(signal_var * (1.0 - spec.r2) / spec.r2);

  for (std::int64_t r = 0; r < spec.rows; ++r) {
    const double f = normal_one(spec.seed, NoiseStream::kSynth, 1000, 0, r);
    double y = 0.0;
    for (int j = 0; j < p; ++j) {
      const double x = f_w * f + e_w * normal_one(spec.seed, NoiseStream::kSynth, j, 1, r);
      t.cont[j][r] = x;
      y += x;
    }
    for (int j = 0; j < spec.categoricals; ++j) {
      const int ccol = p + 2 * j;
      const double u = uniform_one(spec.seed, NoiseStream::kSynth, 2000 + j, 2, r);
      const auto cls = static_cast<std::int32_t>(u * spec.classes);
      t.codes[ccol][r] = std::min<std::int32_t>(cls, spec.classes - 1);
      t.cont[ccol + 1][r] = spec.class_separation * t.codes[ccol][r] +
                            normal_one(spec.seed, NoiseStream::kSynth, 3000 + j, 3, r);
    }
    y += noise_sd * normal_one(spec.seed, NoiseStream::kSynth, 4000, 4, r);
    t.cont[p + 2 * spec.categoricals][r] = y;
  }
  for (int j = 0; j < spec.categoricals; ++j) {
    const int ccol = p + 2 * j;
    for (std::int32_t k = 0; k < spec.classes; ++k) t.dict[ccol].push_back(std::to_string(k));
  }
  return t;
}

}  // namespace ringml
