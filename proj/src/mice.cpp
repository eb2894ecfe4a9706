#include "ringml/mice.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "ringml/cofactor.hpp"
#include "ringml/errors.hpp"
#include "ringml/noise.hpp"
#include "ringml/parallel.hpp"

namespace ringml {

const char* strategy_name(MiceStrategy s) {
  switch (s) {
    case MiceStrategy::kBaseline:
      return "baseline";
    case MiceStrategy::kLow:
      return "low";
    case MiceStrategy::kHigh:
      return "high";
    case MiceStrategy::kAuto:
      return "auto";
  }
  return "?";
}

MiceStrategy strategy_from_name(const std::string& name) {
  if (name == "baseline") return MiceStrategy::kBaseline;
  if (name == "low") return MiceStrategy::kLow;
  if (name == "high") return MiceStrategy::kHigh;
  if (name == "auto") return MiceStrategy::kAuto;
  throw UsageError("unknown strategy '" + name + "' (use baseline, low, high, or auto)");
}

std::pair<double, double> noise_stream(std::uint64_t seed, int iteration, int attr,
                                       std::int64_t row) {
  return uniform_pair(seed, NoiseStream::kImpute, static_cast<std::uint64_t>(iteration),
                      static_cast<std::uint64_t>(attr), static_cast<std::uint64_t>(row));
}

namespace {

using SteadyClock = std::chrono::steady_clock;

double seconds_between(SteadyClock::time_point a, SteadyClock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

class PhaseTimer {
 public:
  explicit PhaseTimer(double& bucket) : bucket_(bucket), start_(SteadyClock::now()) {}
  ~PhaseTimer() { bucket_ += seconds_between(start_, SteadyClock::now()); }

 private:
  double& bucket_;
  SteadyClock::time_point start_;
};

// Everything the strategy loop needs, independent of whether rows live in
// one table or across a join tree.
struct EngineEnv {
  std::shared_ptr<const AttrSpace> space;
  std::int64_t rows = 0;
  int threads = 1;
  double missing_rate = 0.0;

  std::function<Triple(std::span<const std::int64_t>)> agg_subset;
  std::function<Triple(int pos)> agg_observed;  // baseline: full scan, mask-filtered
  std::function<void(std::int64_t, std::vector<double>&)> fill_row;
  std::function<void(int attr, std::int64_t, double)> write_value;

  std::vector<int> mattrs;  // global attr ids with missing cells, ascending
  std::vector<std::vector<std::int64_t>> impute_rows;  // per mattr, all-missing excluded
  std::vector<std::vector<std::int64_t>> obs_side;     // per mattr, incomplete observed side
  std::vector<std::int64_t> complete;
  std::vector<std::int64_t> all_missing;
  std::vector<std::int64_t> active;  // everything except the all-missing partition
};

// Routes rows by their per-attribute masks; the one partitioning pass shared
// by every strategy.
void build_routing(EngineEnv& env, const std::vector<const std::uint8_t*>& masks) {
  const int k = static_cast<int>(masks.size());
  env.impute_rows.assign(k, {});
  env.obs_side.assign(k, {});
  for (std::int64_t r = 0; r < env.rows; ++r) {
    int missing = 0;
    for (int i = 0; i < k; ++i) missing += masks[i][r] != 0;
    if (missing == 0) {
      env.complete.push_back(r);
      env.active.push_back(r);
      continue;
    }
    if (missing == k) {
      env.all_missing.push_back(r);
      continue;
    }
    env.active.push_back(r);
    for (int i = 0; i < k; ++i) {
      (masks[i][r] ? env.impute_rows[i] : env.obs_side[i]).push_back(r);
    }
  }
}

struct TrainedModel {
  ModelKind kind = ModelKind::kRegression;
  std::optional<RegressionModel> reg;
  std::optional<LdaModel> lda;
};

ModelKind resolve_model_kind(const AttrSpace& space, int attr, const MiceConfig& cfg) {
  const bool continuous = space.is_continuous(attr);
  ModelKind kind = continuous ? ModelKind::kRegression : ModelKind::kLda;
  const auto it = cfg.model_override.find(space.name(attr));
  if (it != cfg.model_override.end()) {
    if (continuous && it->second == ModelKind::kLda) {
      throw UsageError("model override: lda needs a categorical target, but '" +
                       space.name(attr) + "' is continuous");
    }
    if (!continuous && it->second == ModelKind::kRegression) {
      throw UsageError("model override: regression needs a continuous target, but '" +
                       space.name(attr) +
                       "' is categorical (the shared cofactor lifts each attribute by its "
                       "declared kind)");
    }
    kind = it->second;
  }
  return kind;
}

std::vector<double> snapshot_params(const AttrSnapshot& snap) {
  if (snap.kind == ModelKind::kRegression) return snap.theta;
  std::vector<double> out = snap.priors;
  out.insert(out.end(), snap.bias.begin(), snap.bias.end());
  return out;
}

double param_change(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return 1e30;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst,
                     std::abs(a[i] - b[i]) / std::max({1.0, std::abs(a[i]), std::abs(b[i])}));
  }
  return worst;
}

void validate_config(const MiceConfig& cfg) {
  if (cfg.iterations < 1) throw UsageError("mice: iterations must be at least 1");
  if (cfg.strategy == MiceStrategy::kAuto &&
      (cfg.auto_threshold <= 0.0 || cfg.auto_threshold >= 1.0)) {
    throw UsageError("mice: auto threshold must lie in (0, 1)");
  }
  if (cfg.threads < 1) throw UsageError("mice: threads must be at least 1");
}

MiceReport run_engine(EngineEnv& env, const MiceConfig& cfg, MiceStrategy strategy) {
  MiceReport report;
  report.strategy = strategy;
  report.missing_rate = env.missing_rate;
  const int k = static_cast<int>(env.mattrs.size());
  const AttrSpace& space = *env.space;

  std::vector<ModelKind> kinds(k);
  for (int pos = 0; pos < k; ++pos) {
    kinds[pos] = resolve_model_kind(space, env.mattrs[pos], cfg);
  }

  const SteadyClock::time_point prep_start = SteadyClock::now();
  std::optional<Triple> shared_c;         // Low: maintained over the active rows
  std::optional<Triple> cached_complete;  // High: complete partition, computed once
  {
    PhaseTimer timer(report.phases.cofactor);
    if (strategy == MiceStrategy::kLow) {
      shared_c = env.agg_subset(env.active);
    } else if (strategy == MiceStrategy::kHigh) {
      cached_complete = env.agg_subset(env.complete);
    }
  }
  report.preprocess_seconds = seconds_between(prep_start, SteadyClock::now());

  std::vector<std::vector<double>> prev_params(k);
  std::vector<double> row_buf(space.size());

  for (int iteration = 1; iteration <= cfg.iterations; ++iteration) {
    const SteadyClock::time_point iter_start = SteadyClock::now();
    std::vector<TrainedModel> models(k);
    report.snapshots.emplace_back();

    for (int pos = 0; pos < k; ++pos) {
      const int attr = env.mattrs[pos];

      // Training aggregate: every row where this attribute is observed,
      // realized per strategy.
      std::optional<Triple> train_triple;
      std::optional<Triple> c_train;  // Low keeps it for the post-write update
      if (strategy == MiceStrategy::kBaseline) {
        PhaseTimer timer(report.phases.cofactor);
        train_triple = env.agg_observed(pos);
      } else if (strategy == MiceStrategy::kLow) {
        PhaseTimer timer(report.phases.delta);
        const Triple delta = env.agg_subset(env.impute_rows[pos]);
        c_train = *shared_c - delta;
        train_triple = *c_train;
      } else {
        PhaseTimer timer(report.phases.delta);
        train_triple = *cached_complete + env.agg_subset(env.obs_side[pos]);
      }

      TrainedModel& model = models[pos];
      model.kind = kinds[pos];
      {
        PhaseTimer timer(report.phases.train);
        const std::string context = "iteration " + std::to_string(iteration) +
                                    ", attribute '" + space.name(attr) + "': ";
        try {
          if (model.kind == ModelKind::kRegression) {
            model.reg = train_ridge(to_dense(*train_triple), attr, cfg.gd);
          } else {
            model.lda = train_lda(*train_triple, attr, cfg.lda_shrinkage);
          }
        } catch (const UsageError& e) {
          throw UsageError(context + e.what());
        } catch (const DataError& e) {
          throw DataError(context + e.what());
        } catch (const std::runtime_error& e) {
          throw NumericError(context + e.what());
        }
      }
      ++report.models_trained;

      const std::vector<std::int64_t>& targets = env.impute_rows[pos];
      std::vector<double> fresh(targets.size());
      {
        PhaseTimer timer(report.phases.predict);
        for_each_chunk(static_cast<std::int64_t>(targets.size()), env.threads,
                       [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                         std::vector<double> buf(space.size());
                         for (std::int64_t i = begin; i < end; ++i) {
                           const std::int64_t r = targets[i];
                           env.fill_row(r, buf);
                           if (model.kind == ModelKind::kRegression) {
                             const auto [u1, u2] = noise_stream(cfg.seed, iteration, attr, r);
                             fresh[i] = predict_stochastic(*model.reg, buf, u1, u2);
                           } else {
                             fresh[i] = static_cast<double>(predict_lda(*model.lda, buf));
                           }
                         }
                       });
      }
      {
        PhaseTimer timer(report.phases.write);
        for (std::size_t i = 0; i < targets.size(); ++i) {
          env.write_value(attr, targets[i], fresh[i]);
        }
      }
      if (strategy == MiceStrategy::kLow) {
        PhaseTimer timer(report.phases.delta);
        const Triple delta_after = env.agg_subset(env.impute_rows[pos]);
        shared_c = *c_train + delta_after;
      }

      AttrSnapshot snap;
      snap.attr = space.name(attr);
      snap.kind = model.kind;
      if (model.kind == ModelKind::kRegression) {
        snap.theta.assign(model.reg->theta.data(),
                          model.reg->theta.data() + model.reg->theta.size());
        snap.sigma2 = model.reg->sigma2;
      } else {
        snap.priors.assign(model.lda->priors.data(),
                           model.lda->priors.data() + model.lda->priors.size());
        snap.bias.assign(model.lda->b.data(), model.lda->b.data() + model.lda->b.size());
      }
      report.snapshots.back().push_back(std::move(snap));
    }

    // Rows missing every incomplete attribute never feed a training
    // aggregate; impute them once at the end of the iteration, with the
    // iteration's final models, in attribute order.
    if (!env.all_missing.empty()) {
      PhaseTimer timer(report.phases.predict);
      for (int pos = 0; pos < k; ++pos) {
        const int attr = env.mattrs[pos];
        for (const std::int64_t r : env.all_missing) {
          env.fill_row(r, row_buf);
          double value;
          if (models[pos].kind == ModelKind::kRegression) {
            const auto [u1, u2] = noise_stream(cfg.seed, iteration, attr, r);
            value = predict_stochastic(*models[pos].reg, row_buf, u1, u2);
          } else {
            value = static_cast<double>(predict_lda(*models[pos].lda, row_buf));
          }
          env.write_value(attr, r, value);
        }
      }
    }

    if (cfg.audit_cofactor && strategy == MiceStrategy::kLow) {
      report.audit_gaps.push_back(triple_gap(*shared_c, env.agg_subset(env.active)));
    }

    report.iteration_seconds.push_back(seconds_between(iter_start, SteadyClock::now()));
    report.iterations_run = iteration;

    if (cfg.early_stop) {
      double worst = 0.0;
      for (int pos = 0; pos < k; ++pos) {
        const std::vector<double> params = snapshot_params(report.snapshots.back()[pos]);
        if (!prev_params[pos].empty()) {
          worst = std::max(worst, param_change(prev_params[pos], params));
        } else {
          worst = 1e30;
        }
        prev_params[pos] = params;
      }
      if (worst < cfg.early_stop_tol) break;
    }
  }
  return report;
}

MiceStrategy resolve_strategy(const MiceConfig& cfg, double missing_rate) {
  if (cfg.strategy != MiceStrategy::kAuto) return cfg.strategy;
  return missing_rate <= cfg.auto_threshold ? MiceStrategy::kLow : MiceStrategy::kHigh;
}

}  // namespace

MiceResult mice_run(const Table& input, const MiceConfig& cfg) {
  validate_config(cfg);
  MiceResult result{input, {}};
  Table& working = result.table;

  const std::vector<int> mattr_cols = working.incomplete_columns();
  if (mattr_cols.empty()) {
    return result;  // nothing to impute, zero models trained
  }

  const TableSpace ts = make_table_space(working);
  EngineEnv env;
  env.space = ts.space;
  env.rows = working.rows;
  env.threads = cfg.threads;
  env.missing_rate = working.missing_rate();

  std::vector<const std::uint8_t*> masks;
  for (int col : mattr_cols) {
    const auto it = std::find(ts.attr_col.begin(), ts.attr_col.end(), col);
    env.mattrs.push_back(static_cast<int>(it - ts.attr_col.begin()));
    masks.push_back(working.miss[col].data());
  }

  double partition_seconds = 0.0;
  {
    PhaseTimer timer(partition_seconds);
    build_routing(env, masks);
  }
  double initial_seconds = 0.0;
  {
    PhaseTimer timer(initial_seconds);
    initial_impute_in_place(working);
  }

  const std::vector<AttrColumn> cols = bind_columns(working, ts);
  env.agg_subset = [&ts, &cols, &cfg](std::span<const std::int64_t> rows) {
    return aggregate(ts.space, cols, rows, cfg.threads);
  };
  env.agg_observed = [&ts, &cols, &cfg, &masks, &working](int pos) {
    return aggregate_where(ts.space, cols, masks[pos], false, working.rows, cfg.threads);
  };
  env.fill_row = [&ts, &working](std::int64_t r, std::vector<double>& buf) {
    for (std::size_t a = 0; a < ts.attr_col.size(); ++a) {
      buf[a] = working.feature_value(ts.attr_col[a], r);
    }
  };
  env.write_value = [&ts, &working](int attr, std::int64_t r, double v) {
    working.set_feature_value(ts.attr_col[attr], r, v);
  };

  const MiceStrategy strategy = resolve_strategy(cfg, env.missing_rate);
  result.report = run_engine(env, cfg, strategy);
  result.report.phases.partition = partition_seconds;
  result.report.phases.initial_impute = initial_seconds;
  result.report.preprocess_seconds += partition_seconds + initial_seconds;
  return result;
}

MiceResult mice_run_join(const std::vector<Table>& tables, const JoinSpec& spec,
                         const MiceConfig& cfg) {
  validate_config(cfg);
  if (tables.empty()) throw UsageError("mice over joins needs at least one table");
  std::vector<Table> local(tables.begin(), tables.end());
  const JoinTree tree = resolve_join(local, spec);
  Table& fact = local[tree.nodes[0].table];

  // Missing values are only supported in the fact table; dimension tables
  // must arrive complete.
  for (std::size_t n = 1; n < tree.nodes.size(); ++n) {
    const Table& t = local[tree.nodes[n].table];
    for (int c : t.schema.feature_columns()) {
      for (std::int64_t r = 0; r < t.rows; ++r) {
        if (t.is_missing(c, r)) {
          throw DataError("dimension table has a missing value in column '" +
                          t.schema.columns[c].name +
                          "'; only the fact table may contain missing values");
        }
      }
    }
  }

  // Incomplete fact columns must be part of the model.
  std::vector<int> mattr_attrs;
  for (int col : fact.incomplete_columns()) {
    int attr = -1;
    for (int a = 0; a < tree.space->size(); ++a) {
      if (tree.attr_node[a] == 0 && tree.attr_column[a] == col) attr = a;
    }
    if (attr < 0) {
      throw DataError("fact column '" + fact.schema.columns[col].name +
                      "' has missing values but is not selected in the join spec");
    }
    mattr_attrs.push_back(attr);
  }
  std::sort(mattr_attrs.begin(), mattr_attrs.end());

  if (mattr_attrs.empty()) {
    return MiceResult{fact, {}};
  }

  EngineEnv env;
  env.space = tree.space;
  env.rows = fact.rows;
  env.threads = cfg.threads;
  env.mattrs = mattr_attrs;
  {
    std::int64_t missing = 0;
    for (int attr : mattr_attrs) {
      const auto& mask = fact.miss[tree.attr_column[attr]];
      for (std::int64_t r = 0; r < fact.rows; ++r) missing += mask[r];
    }
    env.missing_rate = static_cast<double>(missing) /
                       (static_cast<double>(fact.rows) * tree.space->size());
  }

  std::vector<const std::uint8_t*> masks;
  for (int attr : mattr_attrs) masks.push_back(fact.miss[tree.attr_column[attr]].data());

  double partition_seconds = 0.0;
  {
    PhaseTimer timer(partition_seconds);
    build_routing(env, masks);
  }
  double initial_seconds = 0.0;
  {
    PhaseTimer timer(initial_seconds);
    initial_impute_in_place(fact);
  }

  const JoinEval eval = prepare_join_eval(local, tree, /*resolve_rows=*/true);
  env.agg_subset = [&eval, &local](std::span<const std::int64_t> rows) {
    return aggregate_join_rows(eval, local, rows);
  };
  env.agg_observed = [&env, &fact, &masks](int pos) {
    std::vector<std::int64_t> observed;
    observed.reserve(fact.rows);
    for (std::int64_t r = 0; r < fact.rows; ++r) {
      if (!masks[pos][r]) observed.push_back(r);
    }
    return env.agg_subset(observed);
  };
  env.fill_row = [&tree, &local, &eval](std::int64_t r, std::vector<double>& buf) {
    for (int a = 0; a < tree.space->size(); ++a) {
      const int node = tree.attr_node[a];
      buf[a] = local[tree.nodes[node].table].feature_value(tree.attr_column[a],
                                                           eval.resolved[node][r]);
    }
  };
  env.write_value = [&tree, &fact](int attr, std::int64_t r, double v) {
    fact.set_feature_value(tree.attr_column[attr], r, v);
  };

  const MiceStrategy strategy = resolve_strategy(cfg, env.missing_rate);
  MiceResult result{fact, run_engine(env, cfg, strategy)};
  result.report.phases.partition = partition_seconds;
  result.report.phases.initial_impute = initial_seconds;
  result.report.preprocess_seconds += partition_seconds + initial_seconds;
  result.table = fact;
  return result;
}

}  // namespace ringml
