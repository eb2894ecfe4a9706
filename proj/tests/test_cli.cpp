#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ringml/cli.hpp"
#include "ringml/csv.hpp"

using namespace ringml;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "ringml-cli-tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path path = temp_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string linear_csv() {
  std::ostringstream csv;
  csv << "x,y\n";
  for (int i = 1; i <= 30; ++i) {
    csv << i << ',' << 2 * i << '\n';
  }
  return csv.str();
}

std::string holed_csv() {
  std::ostringstream csv;
  csv << "x,y\n";
  for (int i = 1; i <= 30; ++i) {
    if (i % 7 == 0) {
      csv << i << ",\n";
    } else {
      csv << i << ',' << 2 * i << '\n';
    }
  }
  return csv.str();
}

const std::string kXySchema = "x,continuous\ny,continuous\n";

}  // namespace

TEST_CASE("impute writes the output table and a report") {
  const std::string input = write_file("holed.csv", holed_csv());
  const std::string schema = write_file("xy.schema", kXySchema);
  const std::string output = (temp_dir() / "imputed.csv").string();
  const int code = cli_run({"impute", "--input", input, "--schema", schema, "--output",
                            output, "--strategy", "auto", "--iterations", "5", "--seed",
                            "42"});
  REQUIRE(code == 0);
  const Table imputed = load_csv(output, load_schema(schema));
  CHECK(imputed.rows == 30);
  for (std::int64_t r = 0; r < imputed.rows; ++r) {
    // recovered points stay near the y = 2x line
    CHECK(std::abs(imputed.cont[1][r] - 2.0 * imputed.cont[0][r]) <= 2.0);
  }
  const json report = json::parse(slurp(output + ".report.json"));
  CHECK(report["run"]["strategy"] == "low");
  CHECK(report["run"]["iterations_run"] == 5);
  CHECK(report["config"]["seed"] == 42);
  CHECK(report["run"]["phases"].contains("delta"));
}

TEST_CASE("impute without a readable schema exits 2") {
  const std::string input = write_file("holed2.csv", holed_csv());
  const int code = cli_run({"impute", "--input", input, "--schema", "/no/such.schema",
                            "--output", (temp_dir() / "x.csv").string(), "--seed", "1"});
  CHECK(code == 2);
}

TEST_CASE("impute requires a seed") {
  const std::string input = write_file("holed3.csv", holed_csv());
  const std::string schema = write_file("xy3.schema", kXySchema);
  const int code = cli_run({"impute", "--input", input, "--schema", schema, "--output",
                            (temp_dir() / "x3.csv").string()});
  CHECK(code == 2);
}

TEST_CASE("imputing a complete table returns the canonicalized input") {
  const std::string input = write_file("complete.csv", linear_csv());
  const std::string schema = write_file("xy2.schema", kXySchema);
  const std::string output = (temp_dir() / "complete_out.csv").string();
  REQUIRE(cli_run({"impute", "--input", input, "--schema", schema, "--output", output,
                   "--seed", "7"}) == 0);
  const Table original = load_csv(input, load_schema(schema));
  CHECK(slurp(output) == csv_to_string(original));
}

TEST_CASE("impute is byte-identical across thread counts") {
  const std::string input = write_file("threads.csv", holed_csv());
  const std::string schema = write_file("threads.schema", kXySchema);
  const std::string out1 = (temp_dir() / "threads1.csv").string();
  const std::string out4 = (temp_dir() / "threads4.csv").string();
  REQUIRE(cli_run({"impute", "--input", input, "--schema", schema, "--output", out1,
                   "--seed", "9", "--threads", "1"}) == 0);
  REQUIRE(cli_run({"impute", "--input", input, "--schema", schema, "--output", out4,
                   "--seed", "9", "--threads", "4"}) == 0);
  CHECK(slurp(out1) == slurp(out4));
}

TEST_CASE("malformed csv cells exit 3") {
  const std::string input = write_file("bad.csv", "x,y\n1,two\n");
  const std::string schema = write_file("bad.schema", kXySchema);
  const int code = cli_run({"impute", "--input", input, "--schema", schema, "--output",
                            (temp_dir() / "bad_out.csv").string(), "--seed", "1"});
  CHECK(code == 3);
}

TEST_CASE("a diverging descent exits 4") {
  const std::string input = write_file("diverge.csv", holed_csv());
  const std::string schema = write_file("diverge.schema", kXySchema);
  const int code = cli_run({"impute", "--input", input, "--schema", schema, "--output",
                            (temp_dir() / "diverge_out.csv").string(), "--seed", "1",
                            "--raw-basis", "--learning-rate", "50"});
  CHECK(code == 4);
}

TEST_CASE("train prints the regression parameters") {
  const std::string input = write_file("train.csv", linear_csv());
  const std::string schema = write_file("train.schema", kXySchema);
  const std::string out = (temp_dir() / "model.json").string();
  REQUIRE(cli_run({"train", "--input", input, "--schema", schema, "--target", "y",
                   "--lambda", "0", "--output", out}) == 0);
  const json model = json::parse(slurp(out));
  CHECK(model["model"] == "regression");
  CHECK(std::abs(model["theta"][0].get<double>()) <= 1e-4);
  CHECK(std::abs(model["theta"][1].get<double>() - 2.0) <= 1e-4);
  CHECK(model["sigma2"].get<double>() <= 1e-8);
}

TEST_CASE("train fits the worked lda example") {
  const std::string input = write_file("lda.csv", "x,cls\n1,a\n2,a\n4,b\n6,b\n");
  const std::string schema = write_file("lda.schema", "x,continuous\ncls,categorical\n");
  const std::string out = (temp_dir() / "lda.json").string();
  REQUIRE(cli_run({"train", "--input", input, "--schema", schema, "--target", "cls",
                   "--output", out}) == 0);
  const json model = json::parse(slurp(out));
  CHECK(model["model"] == "lda");
  CHECK(model["priors"][0].get<double>() == doctest::Approx(0.5));
  CHECK(model["means"][0][0].get<double>() == doctest::Approx(1.5));
  CHECK(model["means"][1][0].get<double>() == doctest::Approx(5.0));
  CHECK(model["a"][0][0].get<double>() == doctest::Approx(2.4));
  CHECK(model["b"][0].get<double>() == doctest::Approx(-2.4931).epsilon(1e-4));
}

TEST_CASE("train with an unknown target exits 2") {
  const std::string input = write_file("train2.csv", linear_csv());
  const std::string schema = write_file("train2.schema", kXySchema);
  CHECK(cli_run({"train", "--input", input, "--schema", schema, "--target", "nope"}) == 2);
}

TEST_CASE("inject masks cells and is reproducible") {
  const std::string input = write_file("inject.csv", linear_csv());
  const std::string schema = write_file("inject.schema", kXySchema);
  const std::string out1 = (temp_dir() / "masked1.csv").string();
  const std::string out2 = (temp_dir() / "masked2.csv").string();
  REQUIRE(cli_run({"inject", "--input", input, "--schema", schema, "--pattern", "mcar",
                   "--rate", "0.3", "--targets", "y", "--seed", "5", "--output", out1,
                   "--emit-mask"}) == 0);
  REQUIRE(cli_run({"inject", "--input", input, "--schema", schema, "--pattern", "mcar",
                   "--rate", "0.3", "--targets", "y", "--seed", "5", "--output", out2}) == 0);
  const std::string masked = slurp(out1);
  CHECK(masked == slurp(out2));
  CHECK(masked.find(",\n") != std::string::npos);  // at least one blanked cell
  CHECK(fs::exists(out1 + ".mask.csv"));
}

TEST_CASE("the input file is never mutated") {
  const std::string content = holed_csv();
  const std::string input = write_file("immutable.csv", content);
  const std::string schema = write_file("immutable.schema", kXySchema);
  REQUIRE(cli_run({"impute", "--input", input, "--schema", schema, "--output",
                   (temp_dir() / "imm_out.csv").string(), "--seed", "3"}) == 0);
  CHECK(slurp(input) == content);
}

TEST_CASE("factorized impute runs from a joinspec file") {
  std::ostringstream fact;
  fact << "k,x,y\n";
  for (int i = 0; i < 40; ++i) {
    const int key = i % 4;
    if (i % 6 == 0) {
      fact << key << ",," << 2 * i + key << "\n";
    } else {
      fact << key << ',' << i << ',' << 2 * i + key << '\n';
    }
  }
  const std::string fact_csv = write_file("fact.csv", fact.str());
  const std::string fact_schema =
      write_file("fact.schema", "k,categorical,join-key\nx,continuous\ny,continuous\n");
  const std::string dim_csv = write_file("dim.csv", "k,d\n0,10\n1,11\n2,12\n3,13\n");
  const std::string dim_schema =
      write_file("dim.schema", "k,categorical,join-key\nd,continuous\n");
  const std::string joinspec = write_file(
      "spec.join", "table fact " + fact_csv + " " + fact_schema + "\n" +
                       "table dim " + dim_csv + " " + dim_schema + "\n" +
                       "join fact.k = dim.k\nselect fact x y\nselect dim d\n");
  const std::string output = (temp_dir() / "fact_imputed.csv").string();
  REQUIRE(cli_run({"impute", "--factorized", "--joinspec", joinspec, "--output", output,
                   "--seed", "13", "--strategy", "low"}) == 0);
  const Table imputed = load_csv(output, load_schema(fact_schema));
  CHECK(imputed.rows == 40);
  const json report = json::parse(slurp(output + ".report.json"));
  CHECK(report["config"]["factorized"] == true);
}

TEST_CASE("benchmark runs a scenario file") {
  const std::string scenario = write_file("scenario.txt",
                                          "rows = 2000\n"
                                          "predictors = 4\n"
                                          "correlation = 0.8\n"
                                          "r2 = 0.9\n"
                                          "pattern = mcar\n"
                                          "rate = 0.1\n"
                                          "targets = 2\n"
                                          "strategy = low,baseline\n"
                                          "iterations = 2\n"
                                          "seed = 17\n"
                                          "reps = 1\n"
                                          "quality = true\n");
  const std::string csv_out = (temp_dir() / "bench.csv").string();
  const std::string json_out = (temp_dir() / "bench.json").string();
  REQUIRE(cli_run({"benchmark", "--scenario", scenario, "--csv", csv_out, "--json",
                   json_out}) == 0);
  const json report = json::parse(slurp(json_out));
  REQUIRE(report["runs"].size() == 2);
  CHECK(report["runs"][0]["strategy"] == "low");
  CHECK(report.contains("quality"));
  CHECK(slurp(csv_out).find("strategy,rep") == 0);
}
