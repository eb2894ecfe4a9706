#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ringml/cofactor.hpp"
#include "ringml/errors.hpp"
#include "ringml/eval.hpp"
#include "ringml/lda.hpp"
#include "ringml/mice.hpp"

using namespace ringml;

namespace {

std::int64_t masked_cells(const Table& t, int col) {
  std::int64_t n = 0;
  for (std::int64_t r = 0; r < t.rows; ++r) n += t.is_missing(col, r);
  return n;
}

std::int64_t masked_cells(const Table& t) {
  std::int64_t n = 0;
  for (int c : t.schema.feature_columns()) n += masked_cells(t, c);
  return n;
}

}  // namespace

TEST_CASE("mcar masking hits the binomial envelope") {
  SynthSpec spec;
  spec.rows = 5000;
  spec.predictors = 2;
  spec.seed = 3;
  const Table t = synth(spec);

  InjectionSpec inj;
  inj.pattern = MissPattern::kMcar;
  inj.rate = 0.2;
  inj.seed = 5;
  inj.target_columns = {"x0", "x1"};
  const Table masked = inject(t, inj);
  const double cells = 2.0 * 5000.0;
  const double sigma = std::sqrt(cells * 0.2 * 0.8);
  const auto count = static_cast<double>(masked_cells(masked));
  CHECK(count >= 0.2 * cells - 3 * sigma);
  CHECK(count <= 0.2 * cells + 3 * sigma);
  // y untouched
  CHECK(masked_cells(masked, t.schema.index_of("y")) == 0);
}

TEST_CASE("rate zero masks nothing") {
  SynthSpec spec;
  spec.rows = 100;
  spec.predictors = 2;
  const Table t = synth(spec);
  InjectionSpec inj;
  inj.rate = 0.0;
  inj.target_columns = {"x0"};
  CHECK(masked_cells(inject(t, inj)) == 0);
}

TEST_CASE("mar masks high-driver rows more often") {
  SynthSpec spec;
  spec.rows = 20000;
  spec.predictors = 3;
  spec.seed = 11;
  const Table t = synth(spec);
  InjectionSpec inj;
  inj.pattern = MissPattern::kMar;
  inj.rate = 0.3;
  inj.seed = 13;
  inj.target_columns = {"x0", "x1"};
  inj.driver_column = "y";
  const Table masked = inject(t, inj);

  const int driver = t.schema.index_of("y");
  const int target = t.schema.index_of("x0");
  double masked_mean = 0.0, observed_mean = 0.0;
  std::int64_t m = 0, o = 0;
  for (std::int64_t r = 0; r < t.rows; ++r) {
    if (masked.is_missing(target, r)) {
      masked_mean += t.cont[driver][r];
      ++m;
    } else {
      observed_mean += t.cont[driver][r];
      ++o;
    }
  }
  REQUIRE(m > 0);
  CHECK(masked_mean / m > observed_mean / o);

  const double cells = 2.0 * static_cast<double>(t.rows);
  const double sigma = std::sqrt(cells * 0.3 * 0.7);
  const auto count = static_cast<double>(masked_cells(masked));
  CHECK(std::abs(count - 0.3 * cells) <= 3 * sigma);
}

TEST_CASE("mnar masks depend on the cell's own value") {
  SynthSpec spec;
  spec.rows = 20000;
  spec.predictors = 2;
  spec.seed = 17;
  const Table t = synth(spec);
  InjectionSpec inj;
  inj.pattern = MissPattern::kMnar;
  inj.rate = 0.25;
  inj.seed = 19;
  inj.target_columns = {"x0"};
  const Table masked = inject(t, inj);
  const int target = t.schema.index_of("x0");
  double masked_mean = 0.0, observed_mean = 0.0;
  std::int64_t m = 0, o = 0;
  for (std::int64_t r = 0; r < t.rows; ++r) {
    if (masked.is_missing(target, r)) {
      masked_mean += t.cont[target][r];  // truth value of the masked cell
      ++m;
    } else {
      observed_mean += t.cont[target][r];
      ++o;
    }
  }
  REQUIRE(m > 0);
  CHECK(masked_mean / m > observed_mean / o);
}

TEST_CASE("inject refuses incomplete input and infeasible rates") {
  SynthSpec spec;
  spec.rows = 100;
  spec.predictors = 2;
  const Table t = synth(spec);
  InjectionSpec inj;
  inj.rate = 0.2;
  inj.target_columns = {"x0"};
  Table holed = t;
  holed.miss[0][3] = 1;
  CHECK_THROWS_AS(inject(holed, inj), DataError);

  // a driver with one extreme outlier starves the rescaled probabilities
  Table skewed = t;
  for (std::int64_t r = 0; r < skewed.rows; ++r) skewed.cont[2][r] = -10.0;
  skewed.cont[2][0] = 1000.0;
  InjectionSpec mar;
  mar.pattern = MissPattern::kMar;
  mar.rate = 0.9;
  mar.driver_column = "y";
  mar.target_columns = {"x0"};
  CHECK_THROWS_AS(inject(skewed, mar), DataError);
}

TEST_CASE("protected rows are never masked") {
  SynthSpec spec;
  spec.rows = 2000;
  spec.predictors = 2;
  spec.seed = 23;
  const Table t = synth(spec);
  InjectionSpec inj;
  inj.rate = 0.5;
  inj.seed = 29;
  inj.target_columns = {"x0", "x1"};
  const std::vector<std::int64_t> protected_rows = holdout_rows(31, t.rows, 0.2);
  const Table masked = inject(t, inj, protected_rows);
  for (const std::int64_t r : protected_rows) {
    CHECK_FALSE(masked.is_missing(0, r));
    CHECK_FALSE(masked.is_missing(1, r));
  }
}

TEST_CASE("holdout_rows samples close to the requested fraction") {
  const std::vector<std::int64_t> test = holdout_rows(7, 100000, 0.2);
  CHECK(std::abs(static_cast<double>(test.size()) / 100000.0 - 0.2) <= 0.01);
}

TEST_CASE("evaluate scores a perfect imputation as zero error") {
  SynthSpec spec;
  spec.rows = 500;
  spec.predictors = 2;
  spec.categoricals = 1;
  spec.seed = 37;
  const Table t = synth(spec);
  InjectionSpec inj;
  inj.rate = 0.3;
  inj.seed = 41;
  inj.target_columns = {"x0", "c0"};
  const std::vector<std::int64_t> test = holdout_rows(43, t.rows);
  const Table masked = inject(t, inj, test);
  Table copy_of_truth = t;
  // carry the mask over so evaluate knows which cells were injected
  copy_of_truth.miss = masked.miss;
  const QualityReport q = evaluate(copy_of_truth, t, "y", test);
  CHECK(q.cell_rmse.at("x0") == 0.0);
  CHECK(q.cell_error_rate.at("c0") == 0.0);
  CHECK(q.downstream_r2 > 0.5);
}

TEST_CASE("constant predictions have non-positive r2") {
  std::vector<std::vector<double>> rows;
  std::mt19937_64 rng(47);
  std::normal_distribution<double> normal;
  for (int r = 0; r < 400; ++r) {
    rows.push_back({1.0, normal(rng)});
  }
  const Table t = oracles::build_table(
      {{"x", ColumnKind::kContinuous, ColumnRole::kFeature},
       {"y", ColumnKind::kContinuous, ColumnRole::kFeature}},
      rows);
  const std::vector<std::int64_t> test = holdout_rows(53, t.rows);
  const QualityReport q = evaluate(t, t, "y", test);
  CHECK(q.downstream_r2 <= 1e-12);
}

TEST_CASE("evaluate is invariant to permuting rows") {
  SynthSpec spec;
  spec.rows = 1500;
  spec.predictors = 3;
  spec.seed = 59;
  const Table t = synth(spec);
  InjectionSpec inj;
  inj.rate = 0.2;
  inj.seed = 61;
  inj.target_columns = {"x0", "x1"};
  const std::vector<std::int64_t> test = holdout_rows(67, t.rows);
  const Table masked = inject(t, inj, test);
  const Table imputed = mean_impute(masked);
  const QualityReport q1 = evaluate(imputed, t, "y", test);

  // permute all rows and the test ids through the same shuffle
  std::vector<std::int64_t> perm(t.rows);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(71);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto permute_table = [&](const Table& src) {
    Table dst = src;
    for (int c = 0; c < src.schema.size(); ++c) {
      for (std::int64_t r = 0; r < src.rows; ++r) {
        if (src.schema.columns[c].kind == ColumnKind::kContinuous) {
          dst.cont[c][perm[r]] = src.cont[c][r];
        } else {
          dst.codes[c][perm[r]] = src.codes[c][r];
        }
        dst.miss[c][perm[r]] = src.miss[c][r];
      }
    }
    return dst;
  };
  const Table imputed_p = permute_table(imputed);
  const Table truth_p = permute_table(t);
  std::vector<std::int64_t> test_p;
  for (const std::int64_t r : test) test_p.push_back(perm[r]);
  std::sort(test_p.begin(), test_p.end());
  const QualityReport q2 = evaluate(imputed_p, truth_p, "y", test_p);
  CHECK(std::abs(q1.cell_rmse.at("x0") - q2.cell_rmse.at("x0")) <= 1e-12);
  CHECK(std::abs(q1.downstream_rmse - q2.downstream_rmse) <= 1e-8);
  CHECK(std::abs(q1.downstream_r2 - q2.downstream_r2) <= 1e-8);
}

TEST_CASE("synth is deterministic and hits its r2 target") {
  SynthSpec spec;
  spec.rows = 100000;
  spec.predictors = 4;
  spec.correlation = 0.5;
  spec.r2 = 0.9;
  spec.seed = 73;
  const Table a = synth(spec);
  const Table b = synth(spec);
  CHECK(oracles::table_cell_gap(a, b) == 0.0);

  // in-sample fit of the generating model
  const TableSpace ts = make_table_space(a);
  const auto cols = bind_columns(a, ts);
  const Triple triple = aggregate(ts.space, cols, a.rows);
  GdConfig gd;
  gd.ridge_lambda = 0.0;
  const int target = ts.space->index_of("y");
  const RegressionModel model = train_ridge(to_dense(triple), target, gd);
  double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
  const int ycol = a.schema.index_of("y");
  for (std::int64_t r = 0; r < a.rows; ++r) mean += a.cont[ycol][r];
  mean /= static_cast<double>(a.rows);
  std::vector<double> buf(ts.space->size());
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (std::size_t k = 0; k < ts.attr_col.size(); ++k) {
      buf[k] = a.feature_value(ts.attr_col[k], r);
    }
    const double y_hat = predict_mean(model, buf);
    ss_res += (y_hat - a.cont[ycol][r]) * (y_hat - a.cont[ycol][r]);
    ss_tot += (a.cont[ycol][r] - mean) * (a.cont[ycol][r] - mean);
  }
  CHECK(std::abs(1.0 - ss_res / ss_tot - 0.9) <= 0.03);
}

TEST_CASE("zero-noise synth makes the target exactly collinear") {
  SynthSpec spec;
  spec.rows = 200;
  spec.predictors = 3;
  spec.r2 = 1.0;
  spec.seed = 79;
  const Table t = synth(spec);
  const int ycol = t.schema.index_of("y");
  for (std::int64_t r = 0; r < t.rows; ++r) {
    const double sum = t.cont[0][r] + t.cont[1][r] + t.cont[2][r];
    CHECK(t.cont[ycol][r] == sum);
  }
}

TEST_CASE("well-separated class-conditional columns are lda-learnable") {
  SynthSpec spec;
  spec.rows = 10000;
  spec.predictors = 2;
  spec.categoricals = 1;
  spec.classes = 2;
  spec.seed = 83;

  const auto accuracy_at = [&](double separation) {
    SynthSpec s = spec;
    s.class_separation = separation;
    const Table t = synth(s);
    const TableSpace ts = make_table_space(t);
    const Triple triple = aggregate(ts.space, bind_columns(t, ts), t.rows);
    const int target = ts.space->index_of("c0");
    const LdaModel model = train_lda(triple, target);
    std::int64_t hits = 0;
    std::vector<double> buf(ts.space->size());
    const int ccol = t.schema.index_of("c0");
    for (std::int64_t r = 0; r < t.rows; ++r) {
      for (std::size_t k = 0; k < ts.attr_col.size(); ++k) {
        buf[k] = t.feature_value(ts.attr_col[k], r);
      }
      hits += predict_lda(model, buf) == t.codes[ccol][r];
    }
    return static_cast<double>(hits) / static_cast<double>(t.rows);
  };

  // Gaussian tail oracle: error ~ Phi(-separation/2), so 4 sd of separation
  // gives ~97.7% accuracy and 6 sd clears 99%.
  CHECK(accuracy_at(4.0) >= 0.95);
  CHECK(accuracy_at(6.0) >= 0.99);
}

TEST_CASE("mean imputation fills masked cells with the column mean") {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  const Table t = oracles::build_table(
      {{"x", ColumnKind::kContinuous, ColumnRole::kFeature}}, {{2.0}, {4.0}, {kNaN}});
  const Table filled = mean_impute(t);
  CHECK(filled.cont[0][2] == 3.0);
}

TEST_CASE("mice beats mean imputation on correlated data") {
  SynthSpec spec;
  spec.rows = 4000;
  spec.predictors = 5;
  spec.correlation = 0.9;
  spec.r2 = 0.9;
  spec.seed = 89;
  const Table truth = synth(spec);
  InjectionSpec inj;
  inj.rate = 0.2;
  inj.seed = 97;
  inj.target_columns = {"x0", "x1", "x2"};
  const std::vector<std::int64_t> test = holdout_rows(spec.seed, truth.rows);
  const Table masked = inject(truth, inj, test);

  MiceConfig cfg;
  cfg.strategy = MiceStrategy::kAuto;
  cfg.seed = 101;
  const MiceResult mice = mice_run(masked, cfg);
  const QualityReport mice_q = evaluate(mice.table, truth, "y", test);
  const QualityReport mean_q = evaluate(mean_impute(masked), truth, "y", test);

  for (const auto& [col, rmse] : mice_q.cell_rmse) {
    CHECK(rmse < mean_q.cell_rmse.at(col));
  }
  CHECK(mice_q.downstream_rmse < mean_q.downstream_rmse);
}
