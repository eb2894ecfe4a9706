#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ringml/mice.hpp"
#include "ringml/table.hpp"

namespace ringml {

enum class MissPattern : std::uint8_t { kMcar, kMar, kMnar };

const char* pattern_name(MissPattern p);
MissPattern pattern_from_name(const std::string& name);

struct InjectionSpec {
  MissPattern pattern = MissPattern::kMcar;
  double rate = 0.2;
  std::vector<std::string> target_columns;
  std::string driver_column;  // MAR only; excluded from the targets
  std::uint64_t seed = 0;
};

/// Masks cells of a complete table. MCAR masks each target cell
/// independently at `rate`. MAR masks per row with probability
/// clip(rate * sigmoid(2 z_r) / mean(sigmoid(2 z)), 0, 1) where z is the
/// standardized driver; MNAR applies the same transform to each target
/// column's own standardized values. Masked continuous cells become NaN
/// (codes 0) until imputed; `protected_rows` are never masked.
Table inject(const Table& complete, const InjectionSpec& spec,
             std::span<const std::int64_t> protected_rows = {});

/// Deterministic held-out row sample of the given fraction.
std::vector<std::int64_t> holdout_rows(std::uint64_t seed, std::int64_t rows,
                                       double fraction = 0.2);

struct QualityReport {
  std::map<std::string, double> cell_rmse;        // continuous target columns
  std::map<std::string, double> cell_error_rate;  // categorical target columns
  double downstream_rmse = 0.0;
  double downstream_r2 = 0.0;
  PhaseTimings runtime;
};

/// Cell metrics compare imputed against truth at the originally-masked
/// positions only. The downstream model is ridge regression trained on the
/// imputed non-test rows and scored on the held-out complete rows.
QualityReport evaluate(const Table& imputed, const Table& truth,
                       const std::string& downstream_target,
                       std::span<const std::int64_t> test_rows, const GdConfig& gd = {});

/// Fills every masked cell with the column mean or mode; the reference
/// model-free imputer.
Table mean_impute(const Table& masked);

struct SynthSpec {
  std::int64_t rows = 1000;
  /// Equicorrelated continuous predictor block x0..x{p-1}.
  int predictors = 6;
  double correlation = 0.8;
  /// Linear target y = sum(x) + noise calibrated to this R^2.
  double r2 = 0.9;
  /// Categorical columns c0.. with one paired continuous signal column s0..
  /// each, drawn from class-conditional Gaussians.
  int categoricals = 0;
  int classes = 3;
  double class_separation = 3.0;  // distance between adjacent class means, in sd units
  std::uint64_t seed = 0;
};

/// Deterministic synthetic table: columns x0..x{p-1}, then (c_j, s_j) pairs,
/// then y.
Table synth(const SynthSpec& spec);

}  // namespace ringml
