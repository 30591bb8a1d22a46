#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthetic.hpp"
#include "uniord/bench.hpp"

using namespace uniord;
using namespace uniord::bench;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(std::vector<std::string> methods, std::vector<std::uint64_t> seeds) {
  nlohmann::json j{{"model", {{"hidden", {16}}}},
                   {"train", {{"epochs", 4}, {"batch_size", 32}, {"learning_rate", 0.005}, {"lr_decay_epochs", 2}}},
                   {"pom", {{"max_iterations", 200}}},
                   {"methods", methods},
                   {"seeds", seeds}};
  return config_from_json(j);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UNIORD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const auto c = config_from_json(nlohmann::json::object());
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(c.methods.size(), 10u);
  EXPECT_EQ(c.hidden, (std::vector<int>{64, 64}));
  EXPECT_EQ(c.train.epochs, 200);
  const auto n = config_from_json({{"n_trials", 3}, {"methods", {"proposed"}}});
  EXPECT_EQ(n.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(n.methods.at(0).head, nn::HeadType::Unimodal);
  EXPECT_EQ(n.methods.at(0).loss, nn::LossType::OptimalTransport);
}

TEST(Config, RejectsInvalid) {
  EXPECT_THROW(config_from_json({{"n_trials", 0}}), ConfigError);
  EXPECT_THROW(config_from_json({{"methods", {"nonexistent"}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"methods", {{{"name", "bad"}, {"head", "softmax"}, {"loss", "mse"}}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"dataset", {{"format", "parquet"}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"train", {{"epochs", "many"}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"seeds", nlohmann::json::array()}}), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  const auto c = config_from_json({{"methods", {"proposed", "liu", "pom"}}, {"seeds", {7, 9}}});
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(digest(config_to_json(back)), digest(config_to_json(c)));
}

TEST(RunBenchmark, SingleTrialSingleMethod) {
  const auto ds = synthetic::ordinal(300, 4, 5, 1);
  const auto report = run_benchmark(small_config({"proposed"}, {1}), ds);
  ASSERT_EQ(report.runs.size(), 1u);
  EXPECT_TRUE(report.runs[0].ok) << report.runs[0].error;
  EXPECT_EQ(report.runs[0].curve.size(), 4u);
  EXPECT_EQ(report.runs[0].eval.unimodal_rate, 1.0);
}

TEST(RunBenchmark, DeterministicAndSchedulingIndependent) {
  const auto ds = synthetic::ordinal(300, 4, 5, 2);
  const auto cfg = small_config({"proposed", "classification", "pom", "dldl"}, {1, 2});
  const auto a = report_to_json(run_benchmark(cfg, ds, 1));
  const auto b = report_to_json(run_benchmark(cfg, ds, 1));
  const auto c = report_to_json(run_benchmark(cfg, ds, 3));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a.dump(), c.dump());
}

TEST(RunBenchmark, FailedRunsAreRecorded) {
  auto ds = synthetic::ordinal(120, 3, 3, 3);
  for (int& y : ds.data.y) y = 2;  // proportional odds cannot fit a single class
  const auto report = run_benchmark(small_config({"classification", "pom"}, {1, 2}), ds);
  ASSERT_EQ(report.runs.size(), 4u);
  EXPECT_TRUE(report.partial());
  std::size_t failed = 0;
  for (const auto& r : report.runs) {
    if (r.method == "pom") {
      EXPECT_FALSE(r.ok);
      EXPECT_FALSE(r.error.empty());
      ++failed;
    } else {
      EXPECT_TRUE(r.ok);
    }
  }
  EXPECT_EQ(failed, 2u);
  const auto aggs = report.aggregates();
  EXPECT_EQ(report.find(aggs, "pom")->n_failed, 2u);
  EXPECT_NE(render_table(report).find("PARTIAL"), std::string::npos);
}

TEST(EmitReport, FilesAndAggregates) {
  const auto ds = synthetic::ordinal(300, 4, 5, 4);
  const auto report = run_benchmark(small_config({"proposed", "regression"}, {1, 2, 3, 4, 5}), ds);
  const auto dir = synthetic::fresh_dir("emit");
  emit_report(report, dir.string());
  EXPECT_EQ(line_count(dir / "runs.csv"), 11u);
  EXPECT_EQ(line_count(dir / "aggregate.csv"), 3u);
  EXPECT_EQ(line_count(dir / "timings.csv"), 11u);
  for (const char* m : {"proposed", "regression"})
    for (const char* s : {"correct", "incorrect"})
      EXPECT_EQ(line_count(dir / "histograms" / (std::string(m) + "_" + s + ".tsv")), 20u);
  for (const auto& a : report.aggregates()) {
    double total = 0.0;
    int n = 0;
    for (const auto& r : report.runs)
      if (r.method == a.method) {
        total += r.eval.mae;
        ++n;
      }
    EXPECT_NEAR(a.mae.mean, total / n, 1e-12);
    EXPECT_EQ(a.n_runs, 5u);
  }
  const auto text = slurp(dir / "table.txt");
  EXPECT_NE(text.find("proposed"), std::string::npos);
  EXPECT_NE(text.find("+-"), std::string::npos);
}

TEST(EmitReport, LoadRoundTripAndTamperDetection) {
  const auto ds = synthetic::ordinal(200, 3, 4, 5);
  const auto report = run_benchmark(small_config({"proposed", "classification"}, {1, 2}), ds);
  const auto dir = synthetic::fresh_dir("load");
  emit_report(report, dir.string());
  const auto loaded = load_report(dir.string());
  EXPECT_EQ(report_to_json(loaded).dump(), report_to_json(report).dump());

  auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  j["aggregate"][0]["mae"]["mean"] = 99.0;
  std::ofstream(dir / "report.json") << j.dump();
  EXPECT_THROW(load_report(dir.string()), IoError);
}

TEST(EmitReport, UnwritableDirectoryFailsFast) {
  const auto dir = synthetic::fresh_dir("blocked");
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(ensure_writable((dir / "file" / "sub").string()), IoError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
  EXPECT_EQ(run_cli("bench --bogus"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("bench --out /tmp/uniord_cli_nodata"), 2);
  EXPECT_EQ(run_cli("train --method proposed"), 2);
  EXPECT_EQ(run_cli("verify --quick"), 0);
}

TEST(Cli, BenchThenReportRegeneratesIdenticalTables) {
  const auto dir = synthetic::fresh_dir("cli");
  const auto data = synthetic::write_csv(synthetic::ordinal(250, 3, 4, 6), dir / "data.csv");
  std::ofstream(dir / "config.json") << nlohmann::json{
      {"dataset", {{"path", data}, {"format", "labeled"}}},
      {"model", {{"hidden", {8}}}},
      {"train", {{"epochs", 3}}},
      {"methods", {"proposed", "binomial", "pom"}},
      {"seeds", {1, 2}}}.dump();
  const auto out = dir / "out";
  ASSERT_EQ(run_cli("bench --config " + (dir / "config.json").string() + " --out " + out.string()), 0);
  const auto table = slurp(out / "table.txt"), agg = slurp(out / "aggregate.csv"), runs = slurp(out / "runs.csv");
  fs::remove(out / "table.txt");
  ASSERT_EQ(run_cli("report --out " + out.string()), 0);
  EXPECT_EQ(slurp(out / "table.txt"), table);
  EXPECT_EQ(slurp(out / "aggregate.csv"), agg);
  EXPECT_EQ(slurp(out / "runs.csv"), runs);

  // the --out flag wins over the environment variable
  const auto env_out = dir / "env_out";
  const std::string cmd = "UNIORD_OUT=" + env_out.string() + " " + UNIORD_CLI_PATH + " prepare --data " + data +
                          " --format labeled > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(env_out / "splits.txt"));
  ASSERT_EQ(run_cli("prepare --data " + data + " --format labeled --out " + (dir / "flag_out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "flag_out" / "splits.txt"));

  ASSERT_EQ(run_cli("train --method proposed --seeds 3 --data " + data + " --format labeled --out " +
                    (dir / "train").string()),
            0);
  const auto model = load_checkpoint((dir / "train" / "proposed_seed3.ckpt").string());
  EXPECT_TRUE(std::holds_alternative<NetModel>(model));
}
