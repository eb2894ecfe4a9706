#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ringml/join.hpp"
#include "ringml/lda.hpp"
#include "ringml/regression.hpp"
#include "ringml/table.hpp"

namespace ringml {

enum class MiceStrategy : std::uint8_t { kBaseline, kLow, kHigh, kAuto };
enum class ModelKind : std::uint8_t { kRegression, kLda };

const char* strategy_name(MiceStrategy s);
MiceStrategy strategy_from_name(const std::string& name);

struct MiceConfig {
  int iterations = 5;
  MiceStrategy strategy = MiceStrategy::kAuto;
  /// auto picks low at or below this overall missing rate, high above it.
  double auto_threshold = 0.2;
  GdConfig gd;
  double lda_shrinkage = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Optional early stop: finish when the largest relative parameter change
  /// across attributes drops below early_stop_tol.
  bool early_stop = false;
  double early_stop_tol = 1e-4;
  /// Recompute the maintained cofactor from scratch after every iteration
  /// and record the largest relative gap (Low strategy only).
  bool audit_cofactor = false;
  /// Per-column model choice; kinds must match the column (regression for
  /// continuous, lda for categorical).
  std::map<std::string, ModelKind> model_override;
};

struct PhaseTimings {
  double partition = 0.0;
  double initial_impute = 0.0;
  double cofactor = 0.0;
  double delta = 0.0;
  double train = 0.0;
  double predict = 0.0;
  double write = 0.0;

  double total() const {
    return partition + initial_impute + cofactor + delta + train + predict + write;
  }
};

struct AttrSnapshot {
  std::string attr;
  ModelKind kind = ModelKind::kRegression;
  std::vector<double> theta;   // regression parameters (dense basis)
  double sigma2 = 0.0;
  std::vector<double> priors;  // lda
  std::vector<double> bias;    // lda b_c
};

struct MiceReport {
  MiceStrategy strategy = MiceStrategy::kBaseline;
  PhaseTimings phases;
  double preprocess_seconds = 0.0;
  std::vector<double> iteration_seconds;
  std::vector<std::vector<AttrSnapshot>> snapshots;  // [iteration][mattr]
  std::vector<double> audit_gaps;                    // per iteration, Low only
  int iterations_run = 0;
  int models_trained = 0;
  double missing_rate = 0.0;
};

struct MiceResult {
  Table table;
  MiceReport report;
};

/// The deterministic noise pair feeding one stochastic prediction. Keyed by
/// (seed, iteration, attribute, row): identical across strategies, row
/// processing orders, and thread counts.
std::pair<double, double> noise_stream(std::uint64_t seed, int iteration, int attr,
                                       std::int64_t row);

/// Runs MICE over a single table: initial mean/mode imputation, then
/// round-robin model training and re-imputation of the originally-missing
/// cells. Observed cells pass through bit-identical.
MiceResult mice_run(const Table& input, const MiceConfig& cfg);

/// Runs MICE over a normalized dataset without materializing the join.
/// Missing values may occur only in the root (fact) table; the imputed fact
/// table is returned. Dimension attributes act as predictors through
/// factorized aggregation and per-row key lookups.
MiceResult mice_run_join(const std::vector<Table>& tables, const JoinSpec& spec,
                         const MiceConfig& cfg);

}  // namespace ringml
