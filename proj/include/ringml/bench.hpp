#pragma once

#include <string>
#include <vector>

#include "ringml/eval.hpp"
#include "ringml/mice.hpp"

namespace ringml {

/// One benchmark scenario: synthesize, inject, impute, time (and optionally
/// score). Parsed from a `key = value` file.
struct Scenario {
  SynthSpec synth;
  MissPattern pattern = MissPattern::kMcar;
  double rate = 0.2;
  int inject_targets = 4;    // first k predictor columns get masked
  std::string driver = "y";  // MAR driver column
  std::vector<MiceStrategy> strategies{MiceStrategy::kAuto};
  int iterations = 5;
  std::uint64_t seed = 0;
  int reps = 3;
  int threads = 1;
  bool quality = false;  // also score cells/downstream against mean imputation

  static Scenario parse_file(const std::string& path);
};

struct StrategyRun {
  MiceStrategy requested = MiceStrategy::kAuto;
  MiceStrategy used = MiceStrategy::kBaseline;
  std::vector<MiceReport> reps;
  double preprocess_median = 0.0;
  double iteration_median = 0.0;  // median over reps of the mean iteration time
};

struct BenchReport {
  std::vector<StrategyRun> runs;
  bool has_quality = false;
  QualityReport mice_quality;
  QualityReport mean_quality;
};

BenchReport run_benchmark(const Scenario& scenario);

double median(std::vector<double> values);

}  // namespace ringml
