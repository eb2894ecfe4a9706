#include "ringml/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "ringml/bench.hpp"
#include "ringml/cofactor.hpp"
#include "ringml/csv.hpp"
#include "ringml/errors.hpp"
#include "ringml/eval.hpp"
#include "ringml/join.hpp"
#include "ringml/lda.hpp"
#include "ringml/mice.hpp"
#include "ringml/parallel.hpp"
#include "ringml/regression.hpp"
#include "ringml/table.hpp"

namespace ringml {

namespace {

using nlohmann::json;

json phases_json(const PhaseTimings& p) {
  return json{{"partition", p.partition},   {"initial_impute", p.initial_impute},
              {"cofactor", p.cofactor},     {"delta", p.delta},
              {"train", p.train},           {"predict", p.predict},
              {"write", p.write},           {"total", p.total()}};
}

json report_json(const MiceReport& report) {
  json snapshots = json::array();
  for (const auto& iteration : report.snapshots) {
    json per_attr = json::array();
    for (const AttrSnapshot& snap : iteration) {
      json entry{{"attr", snap.attr}};
      if (snap.kind == ModelKind::kRegression) {
        entry["model"] = "regression";
        entry["theta"] = snap.theta;
        entry["sigma2"] = snap.sigma2;
      } else {
        entry["model"] = "lda";
        entry["priors"] = snap.priors;
        entry["b"] = snap.bias;
      }
      per_attr.push_back(std::move(entry));
    }
    snapshots.push_back(std::move(per_attr));
  }
  json out{{"strategy", strategy_name(report.strategy)},
           {"missing_rate", report.missing_rate},
           {"iterations_run", report.iterations_run},
           {"models_trained", report.models_trained},
           {"preprocess_seconds", report.preprocess_seconds},
           {"iteration_seconds", report.iteration_seconds},
           {"phases", phases_json(report.phases)},
           {"snapshots", std::move(snapshots)}};
  if (!report.audit_gaps.empty()) out["audit_gaps"] = report.audit_gaps;
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

struct CommonModelFlags {
  double learning_rate = 0.1;
  double ridge_lambda = 1e-4;
  int max_epochs = 10000;
  double tolerance = 1e-6;
  bool raw_basis = false;
  bool unbiased_variance = false;
  double lda_shrinkage = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--learning-rate", learning_rate, "Gradient-descent learning rate");
    cmd->add_option("--lambda", ridge_lambda, "Ridge penalty");
    cmd->add_option("--max-epochs", max_epochs, "Gradient-descent epoch cap");
    cmd->add_option("--gd-tolerance", tolerance, "Relative loss-decrease stop threshold");
    cmd->add_flag("--raw-basis", raw_basis, "Run gradient descent without standardization");
    cmd->add_flag("--unbiased-variance", unbiased_variance,
                  "Use the N-M-1 residual variance denominator");
    cmd->add_option("--lda-shrinkage", lda_shrinkage, "LDA covariance shrinkage in [0,1]");
  }

  GdConfig gd() const {
    GdConfig cfg;
    cfg.learning_rate = learning_rate;
    cfg.ridge_lambda = ridge_lambda;
    cfg.max_epochs = max_epochs;
    cfg.tolerance = tolerance;
    cfg.standardize = !raw_basis;
    cfg.unbiased_variance = unbiased_variance;
    return cfg;
  }
};

std::vector<Table> load_join_tables(const JoinSpec& spec, const CsvOptions& base_opts) {
  std::vector<Table> tables;
  for (std::size_t i = 0; i < spec.tables.size(); ++i) {
    CsvOptions opts = base_opts;
    opts.require_complete = i > 0;  // dimension tables must be complete
    tables.push_back(load_csv(spec.tables[i].csv_path,
                              load_schema(spec.tables[i].schema_path), opts));
  }
  return tables;
}

// ---------------------------------------------------------------------------

int cmd_impute(const std::string& input, const std::string& schema_path,
               const std::string& output, std::string report_path,
               const std::string& strategy, int iterations, std::uint64_t seed, int threads,
               bool emit_mask, bool sorted_dicts, bool factorized,
               const std::string& joinspec_path, double auto_threshold, bool early_stop,
               bool audit, const std::vector<std::string>& overrides,
               const CommonModelFlags& flags) {
  MiceConfig cfg;
  cfg.strategy = strategy_from_name(strategy);
  cfg.iterations = iterations;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.auto_threshold = auto_threshold;
  cfg.early_stop = early_stop;
  cfg.audit_cofactor = audit;
  cfg.gd = flags.gd();
  cfg.lda_shrinkage = flags.lda_shrinkage;
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--model-override expects COLUMN=regression|lda, got '" + item + "'");
    }
    const std::string kind = item.substr(eq + 1);
    if (kind == "regression") {
      cfg.model_override[item.substr(0, eq)] = ModelKind::kRegression;
    } else if (kind == "lda") {
      cfg.model_override[item.substr(0, eq)] = ModelKind::kLda;
    } else {
      throw UsageError("--model-override kind must be regression or lda, got '" + kind + "'");
    }
  }

  CsvOptions csv_opts;
  csv_opts.sorted_dictionaries = sorted_dicts;

  json config_echo{{"command", "impute"},
                   {"strategy", strategy},
                   {"iterations", iterations},
                   {"seed", seed},
                   {"threads", threads},
                   {"factorized", factorized},
                   {"sorted_dictionaries", sorted_dicts},
                   {"auto_threshold", auto_threshold},
                   {"early_stop", early_stop}};

  MiceResult result = [&] {
    if (factorized) {
      if (joinspec_path.empty()) {
        throw UsageError("--factorized needs --joinspec FILE");
      }
      const JoinSpec spec = JoinSpec::parse_file(joinspec_path);
      config_echo["joinspec"] = joinspec_path;
      return mice_run_join(load_join_tables(spec, csv_opts), spec, cfg);
    }
    if (input.empty()) throw UsageError("impute needs --input FILE");
    config_echo["input"] = input;
    return mice_run(load_csv(input, load_schema(schema_path), csv_opts), cfg);
  }();

  write_csv(result.table, output, emit_mask);
  if (report_path.empty()) {
    report_path = output + ".report.json";
  }
  json report{{"config", std::move(config_echo)}, {"run", report_json(result.report)}};
  write_text_file(report_path, report.dump(2) + "\n");
  return 0;
}

int cmd_train(const std::string& input, const std::string& schema_path,
              const std::string& target, std::string model_kind, bool factorized,
              const std::string& joinspec_path, const std::string& output,
              bool sorted_dicts, const CommonModelFlags& flags) {
  CsvOptions csv_opts;
  csv_opts.sorted_dictionaries = sorted_dicts;
  csv_opts.require_complete = true;  // training runs on complete tables

  std::shared_ptr<const AttrSpace> space;
  std::optional<Triple> triple;
  if (factorized) {
    if (joinspec_path.empty()) throw UsageError("--factorized needs --joinspec FILE");
    const JoinSpec spec = JoinSpec::parse_file(joinspec_path);
    const std::vector<Table> tables = load_join_tables(spec, csv_opts);
    const JoinTree tree = resolve_join(tables, spec);
    space = tree.space;
    triple = aggregate_join(tables, spec);
  } else {
    if (input.empty()) throw UsageError("train needs --input FILE");
    const Table table = load_csv(input, load_schema(schema_path), csv_opts);
    const TableSpace ts = make_table_space(table);
    space = ts.space;
    triple = aggregate(ts.space, bind_columns(table, ts), table.rows);
  }

  const int attr = space->index_of(target);
  if (attr < 0) throw UsageError("train: no attribute named '" + target + "'");
  if (model_kind.empty()) {
    model_kind = space->is_continuous(attr) ? "regression" : "lda";
  }

  json out;
  if (model_kind == "regression") {
    const RegressionModel model = train_ridge(to_dense(*triple), attr, flags.gd());
    out = json{{"model", "regression"},
               {"target", target},
               {"theta", std::vector<double>(model.theta.data(),
                                             model.theta.data() + model.theta.size())},
               {"sigma2", model.sigma2},
               {"epochs", model.epochs}};
  } else if (model_kind == "lda") {
    const LdaModel model = train_lda(*triple, attr, flags.lda_shrinkage);
    json means = json::array();
    json a = json::array();
    for (int c = 0; c < model.class_count(); ++c) {
      means.push_back(std::vector<double>(model.means.col(c).data(),
                                          model.means.col(c).data() + model.means.rows()));
      a.push_back(std::vector<double>(model.a.col(c).data(),
                                      model.a.col(c).data() + model.a.rows()));
    }
    out = json{{"model", "lda"},
               {"target", target},
               {"classes", model.classes},
               {"priors", std::vector<double>(model.priors.data(),
                                              model.priors.data() + model.priors.size())},
               {"means", std::move(means)},
               {"a", std::move(a)},
               {"b", std::vector<double>(model.b.data(), model.b.data() + model.b.size())},
               {"shrinkage_used", model.shrinkage_used}};
  } else {
    throw UsageError("--model must be regression or lda, got '" + model_kind + "'");
  }

  const std::string text = out.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    write_text_file(output, text);
  }
  return 0;
}

int cmd_inject(const std::string& input, const std::string& schema_path,
               const std::string& pattern, double rate,
               const std::vector<std::string>& targets, const std::string& driver,
               std::uint64_t seed, const std::string& output, bool emit_mask,
               bool sorted_dicts) {
  CsvOptions csv_opts;
  csv_opts.sorted_dictionaries = sorted_dicts;
  const Table table = load_csv(input, load_schema(schema_path), csv_opts);
  InjectionSpec spec;
  spec.pattern = pattern_from_name(pattern);
  spec.rate = rate;
  spec.target_columns = targets;
  spec.driver_column = driver;
  spec.seed = seed;
  const Table masked = inject(table, spec);
  write_csv(masked, output, emit_mask, /*blank_missing=*/true);
  return 0;
}

int cmd_benchmark(const std::string& scenario_path, const std::string& csv_out,
                  const std::string& json_out) {
  const Scenario scenario = Scenario::parse_file(scenario_path);
  const BenchReport report = run_benchmark(scenario);

  std::ostringstream table;
  table << "strategy      prep[s]   iter[s]   partition  cofactor   delta     train     "
           "predict   write\n";
  json runs = json::array();
  for (const StrategyRun& run : report.runs) {
    PhaseTimings sum;
    for (const MiceReport& rep : run.reps) {
      sum.partition += rep.phases.partition;
      sum.initial_impute += rep.phases.initial_impute;
      sum.cofactor += rep.phases.cofactor;
      sum.delta += rep.phases.delta;
      sum.train += rep.phases.train;
      sum.predict += rep.phases.predict;
      sum.write += rep.phases.write;
    }
    const double n = static_cast<double>(run.reps.size());
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-12s %9.4f %9.4f %10.4f %9.4f %9.4f %9.4f %9.4f %9.4f\n",
                  strategy_name(run.used), run.preprocess_median, run.iteration_median,
                  sum.partition / n, sum.cofactor / n, sum.delta / n, sum.train / n,
                  sum.predict / n, sum.write / n);
    table << line;
    json jr{{"strategy", strategy_name(run.used)},
            {"requested", strategy_name(run.requested)},
            {"preprocess_median_seconds", run.preprocess_median},
            {"iteration_median_seconds", run.iteration_median},
            {"reps", json::array()}};
    for (const MiceReport& rep : run.reps) jr["reps"].push_back(report_json(rep));
    runs.push_back(std::move(jr));
  }
  std::cout << table.str();

  json full{{"runs", std::move(runs)}};
  if (report.has_quality) {
    auto quality_json = [](const QualityReport& q) {
      return json{{"cell_rmse", q.cell_rmse},
                  {"cell_error_rate", q.cell_error_rate},
                  {"downstream_rmse", q.downstream_rmse},
                  {"downstream_r2", q.downstream_r2}};
    };
    full["quality"] = json{{"mice", quality_json(report.mice_quality)},
                           {"mean", quality_json(report.mean_quality)}};
    std::cout << "quality: mice downstream rmse " << report.mice_quality.downstream_rmse
              << " r2 " << report.mice_quality.downstream_r2 << " | mean downstream rmse "
              << report.mean_quality.downstream_rmse << " r2 "
              << report.mean_quality.downstream_r2 << "\n";
  }
  if (!json_out.empty()) write_text_file(json_out, full.dump(2) + "\n");

  if (!csv_out.empty()) {
    std::ostringstream csv;
    csv << "strategy,rep,preprocess_seconds,iteration_mean_seconds,partition,initial_impute,"
           "cofactor,delta,train,predict,write\n";
    for (const StrategyRun& run : report.runs) {
      for (std::size_t rep = 0; rep < run.reps.size(); ++rep) {
        const MiceReport& r = run.reps[rep];
        double iter_mean = 0.0;
        for (double s : r.iteration_seconds) iter_mean += s;
        iter_mean /= std::max<std::size_t>(1, r.iteration_seconds.size());
        csv << strategy_name(run.used) << ',' << rep << ',' << r.preprocess_seconds << ','
            << iter_mean << ',' << r.phases.partition << ',' << r.phases.initial_impute << ','
            << r.phases.cofactor << ',' << r.phases.delta << ',' << r.phases.train << ','
            << r.phases.predict << ',' << r.phases.write << '\n';
      }
    }
    write_text_file(csv_out, csv.str());
  }
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"MICE imputation engine over the generalized cofactor ring"};
  app.require_subcommand(1);

  // impute ------------------------------------------------------------------
  auto* impute = app.add_subcommand("impute", "Impute missing values with MICE");
  std::string in_path, schema_path, out_path, report_path, joinspec_path;
  std::string strategy = "auto";
  int iterations = 5;
  std::uint64_t seed = 0;
  int threads = hardware_threads();
  bool emit_mask = false, sorted_dicts = false, factorized = false;
  bool early_stop = false, audit = false;
  double auto_threshold = 0.2;
  std::vector<std::string> overrides;
  CommonModelFlags impute_flags;
  impute->add_option("--input", in_path, "Input CSV");
  impute->add_option("--schema", schema_path, "Schema file (name,kind[,role] lines)");
  impute->add_option("--output", out_path, "Imputed CSV path")->required();
  impute->add_option("--report", report_path, "Report JSON path (default OUTPUT.report.json)");
  impute->add_option("--strategy", strategy, "baseline | low | high | auto");
  impute->add_option("--iterations", iterations, "MICE iterations");
  impute->add_option("--seed", seed, "Noise seed (required for reproducibility)")->required();
  impute->add_option("--threads", threads, "Worker threads");
  impute->add_option("--auto-threshold", auto_threshold,
                     "Missing-rate cutoff for the auto strategy");
  impute->add_flag("--emit-mask", emit_mask, "Also write OUTPUT.mask.csv");
  impute->add_flag("--sorted-dictionaries", sorted_dicts,
                   "Canonicalize category codes by label order");
  impute->add_flag("--factorized", factorized, "Impute over a normalized dataset");
  impute->add_option("--joinspec", joinspec_path, "Join specification file");
  impute->add_flag("--early-stop", early_stop, "Stop when parameters settle");
  impute->add_flag("--audit-cofactor", audit,
                   "Verify the maintained cofactor against a recomputation each iteration");
  impute->add_option("--model-override", overrides,
                     "Per-column model choice COLUMN=regression|lda");
  impute_flags.attach(impute);

  // train -------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train one model over a complete dataset");
  std::string train_in, train_schema, train_target, train_model, train_out, train_join;
  bool train_factorized = false, train_sorted = false;
  CommonModelFlags train_flags;
  train->add_option("--input", train_in, "Input CSV");
  train->add_option("--schema", train_schema, "Schema file");
  train->add_option("--target", train_target, "Target attribute")->required();
  train->add_option("--model", train_model, "regression | lda (default by column kind)");
  train->add_option("--output", train_out, "Write the model JSON here instead of stdout");
  train->add_flag("--factorized", train_factorized, "Train over a normalized dataset");
  train->add_option("--joinspec", train_join, "Join specification file");
  train->add_flag("--sorted-dictionaries", train_sorted,
                  "Canonicalize category codes by label order");
  train_flags.attach(train);

  // inject ------------------------------------------------------------------
  auto* inject_cmd = app.add_subcommand("inject", "Mask values in a complete dataset");
  std::string inject_in, inject_schema, inject_pattern = "mcar", inject_driver, inject_out;
  double inject_rate = 0.2;
  std::uint64_t inject_seed = 0;
  std::vector<std::string> inject_targets;
  bool inject_mask_sidecar = false, inject_sorted = false;
  inject_cmd->add_option("--input", inject_in, "Complete input CSV")->required();
  inject_cmd->add_option("--schema", inject_schema, "Schema file")->required();
  inject_cmd->add_option("--pattern", inject_pattern, "mcar | mar | mnar");
  inject_cmd->add_option("--rate", inject_rate, "Target missing rate in [0,1)");
  inject_cmd->add_option("--targets", inject_targets, "Columns to mask")->required();
  inject_cmd->add_option("--driver", inject_driver, "MAR driver column");
  inject_cmd->add_option("--seed", inject_seed, "Masking seed")->required();
  inject_cmd->add_option("--output", inject_out, "Masked CSV path")->required();
  inject_cmd->add_flag("--emit-mask", inject_mask_sidecar, "Also write OUTPUT.mask.csv");
  inject_cmd->add_flag("--sorted-dictionaries", inject_sorted,
                       "Canonicalize category codes by label order");

  // benchmark ---------------------------------------------------------------
  auto* bench = app.add_subcommand("benchmark", "Run a timing scenario");
  std::string bench_scenario, bench_csv, bench_json;
  bench->add_option("--scenario", bench_scenario, "Scenario file")->required();
  bench->add_option("--csv", bench_csv, "Write per-rep phase timings CSV");
  bench->add_option("--json", bench_json, "Write the full report JSON");

  std::vector<const char*> argv;
  argv.push_back("ringml");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (impute->parsed()) {
      return cmd_impute(in_path, schema_path, out_path, report_path, strategy, iterations,
                        seed, threads, emit_mask, sorted_dicts, factorized, joinspec_path,
                        auto_threshold, early_stop, audit, overrides, impute_flags);
    }
    if (train->parsed()) {
      return cmd_train(train_in, train_schema, train_target, train_model, train_factorized,
                       train_join, train_out, train_sorted, train_flags);
    }
    if (inject_cmd->parsed()) {
      return cmd_inject(inject_in, inject_schema, inject_pattern, inject_rate, inject_targets,
                        inject_driver, inject_seed, inject_out, inject_mask_sidecar,
                        inject_sorted);
    }
    if (bench->parsed()) {
      return cmd_benchmark(bench_scenario, bench_csv, bench_json);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}

int cli_run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_run(args);
}

}  // namespace ringml
