#include "ringml/bench.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ringml/errors.hpp"

namespace ringml {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

Scenario Scenario::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open scenario file: " + path);
  Scenario s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw DataError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
      }
      continue;
    }
    auto strip = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      if (key == "rows") {
        s.synth.rows = std::stoll(value);
      } else if (key == "predictors") {
        s.synth.predictors = std::stoi(value);
      } else if (key == "correlation") {
        s.synth.correlation = std::stod(value);
      } else if (key == "r2") {
        s.synth.r2 = std::stod(value);
      } else if (key == "categoricals") {
        s.synth.categoricals = std::stoi(value);
      } else if (key == "classes") {
        s.synth.classes = std::stoi(value);
      } else if (key == "separation") {
        s.synth.class_separation = std::stod(value);
      } else if (key == "pattern") {
        s.pattern = pattern_from_name(value);
      } else if (key == "rate") {
        s.rate = std::stod(value);
      } else if (key == "targets") {
        s.inject_targets = std::stoi(value);
      } else if (key == "driver") {
        s.driver = value;
      } else if (key == "strategy") {
        s.strategies.clear();
        std::istringstream list(value);
        std::string item;
        while (std::getline(list, item, ',')) s.strategies.push_back(strategy_from_name(item));
        if (s.strategies.empty()) throw UsageError("empty strategy list");
      } else if (key == "iterations") {
        s.iterations = std::stoi(value);
      } else if (key == "seed") {
        s.seed = std::stoull(value);
      } else if (key == "reps") {
        s.reps = std::stoi(value);
      } else if (key == "threads") {
        s.threads = std::stoi(value);
      } else if (key == "quality") {
        s.quality = value == "true" || value == "1" || value == "yes";
      } else {
        throw UsageError("unknown scenario key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
  s.synth.seed = s.seed;
  return s;
}

BenchReport run_benchmark(const Scenario& scenario) {
  if (scenario.reps < 1) throw UsageError("benchmark: reps must be at least 1");
  if (scenario.inject_targets < 1 || scenario.inject_targets > scenario.synth.predictors) {
    throw UsageError("benchmark: targets must pick 1..predictors columns");
  }
  const Table truth = synth(scenario.synth);

  InjectionSpec inj;
  inj.pattern = scenario.pattern;
  inj.rate = scenario.rate;
  inj.seed = scenario.seed;
  inj.driver_column = scenario.driver;
  for (int j = 0; j < scenario.inject_targets; ++j) {
    inj.target_columns.push_back("x" + std::to_string(j));
  }
  const std::vector<std::int64_t> test =
      scenario.quality ? holdout_rows(scenario.seed, truth.rows) : std::vector<std::int64_t>{};
  const Table masked = inject(truth, inj, test);

  MiceConfig cfg;
  cfg.iterations = scenario.iterations;
  cfg.seed = scenario.seed;
  cfg.threads = scenario.threads;

  BenchReport report;
  for (std::size_t si = 0; si < scenario.strategies.size(); ++si) {
    StrategyRun run;
    run.requested = scenario.strategies[si];
    cfg.strategy = scenario.strategies[si];
    std::vector<double> prep;
    std::vector<double> iter_mean;
    for (int rep = 0; rep < scenario.reps; ++rep) {
      MiceResult result = mice_run(masked, cfg);
      run.used = result.report.strategy;
      prep.push_back(result.report.preprocess_seconds);
      double mean = 0.0;
      for (double s : result.report.iteration_seconds) mean += s;
      iter_mean.push_back(mean /
                          std::max<std::size_t>(1, result.report.iteration_seconds.size()));
      if (scenario.quality && rep == 0 && si == 0) {
        report.mice_quality = evaluate(result.table, truth, "y", test);
        report.mice_quality.runtime = result.report.phases;
      }
      run.reps.push_back(std::move(result.report));
    }
    run.preprocess_median = median(prep);
    run.iteration_median = median(iter_mean);
    report.runs.push_back(std::move(run));
  }

  if (scenario.quality) {
    report.has_quality = true;
    report.mean_quality = evaluate(mean_impute(masked), truth, "y", test);
  }
  return report;
}

}  // namespace ringml
