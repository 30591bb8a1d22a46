// uniord: command-line front end for data preparation, training, benchmarking and verification.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uniord/bench.hpp"
#include "uniord/verify.hpp"

namespace {

using namespace uniord;

struct Common {
  std::string config;
  std::string data;
  std::string format;
  std::string out;
  std::string seeds;
  int jobs = 1;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("--seeds: '" + item + "' is not a non-negative integer");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("--seeds: empty list");
  return seeds;
}

bench::ExperimentConfig resolve_config(const Common& c) {
  bench::ExperimentConfig cfg = c.config.empty() ? bench::ExperimentConfig{} : bench::load_config(c.config);
  if (!c.data.empty()) cfg.dataset.path = c.data;
  if (!c.format.empty()) cfg.dataset.format = c.format;
  if (!c.seeds.empty()) cfg.seeds = parse_seeds(c.seeds);
  if (!c.out.empty()) cfg.output_dir = c.out;
  else if (cfg.output_dir.empty()) {
    if (const char* env = std::getenv("UNIORD_OUT"); env && *env) cfg.output_dir = env;
  }
  cfg.validate();
  return cfg;
}

void log_line(const std::string& s) { std::cerr << s << std::endl; }

int cmd_prepare(const Common& c) {
  const auto cfg = resolve_config(c);
  if (cfg.output_dir.empty()) throw ConfigError("no output directory (use --out or UNIORD_OUT)");
  bench::ensure_writable(cfg.output_dir);
  std::string note;
  const auto ds = bench::load_dataset(cfg.dataset, &note);
  if (!note.empty()) log_line(note);
  std::map<std::uint64_t, data::SplitIndices> splits;
  for (auto seed : cfg.seeds) {
    data::SplitSpec s = cfg.split;
    s.seed = seed;
    std::string warning;
    splits.emplace(seed, data::split(ds.data, s, &warning));
    if (!warning.empty()) log_line("seed " + std::to_string(seed) + ": " + warning);
  }
  const auto root = std::filesystem::path(cfg.output_dir);
  data::write_splits((root / "splits.txt").string(), splits);
  std::vector<std::size_t> counts(static_cast<std::size_t>(ds.data.k), 0);
  for (int y : ds.data.y) ++counts[static_cast<std::size_t>(y - 1)];
  std::ofstream summary(root / "classes.csv");
  summary << "class,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) summary << i + 1 << ',' << counts[i] << '\n';
  std::cout << ds.data.size() << " rows, " << ds.data.X.cols() << " features, " << ds.data.k << " classes\n";
  for (std::size_t i = 0; i < counts.size(); ++i) std::cout << "  class " << i + 1 << ": " << counts[i] << '\n';
  std::cout << "splits for " << splits.size() << " seeds written to " << (root / "splits.txt").string() << '\n';
  return 0;
}

int cmd_train(const Common& c, const std::string& method_name) {
  const auto cfg = resolve_config(c);
  if (cfg.output_dir.empty()) throw ConfigError("no output directory (use --out or UNIORD_OUT)");
  const bench::MethodSpec& method = cfg.method(method_name);
  bench::ensure_writable(cfg.output_dir);
  const auto ds = bench::load_dataset(cfg.dataset);
  const auto root = std::filesystem::path(cfg.output_dir);
  for (auto seed : cfg.seeds) {
    data::SplitSpec s = cfg.split;
    s.seed = seed;
    const auto ps = data::prepare(ds.data, data::split(ds.data, s));
    auto run = bench::train_method(cfg, method, ps, seed);
    if (!run.row.ok) {
      std::cerr << method.name << " seed " << seed << " failed: " << run.row.error << '\n';
      return 1;
    }
    const std::string stem = method.name + "_seed" + std::to_string(seed);
    save_checkpoint(*run.model, (root / (stem + ".ckpt")).string());
    std::ofstream eval(root / (stem + "_eval.json"));
    eval << bench::eval_to_json(run.row.eval).dump(2) << '\n';
    std::cout << method.name << " seed " << seed << ": test MAE " << run.row.eval.mae;
    if (run.row.eval.unimodal_rate) std::cout << ", unimodal " << *run.row.eval.unimodal_rate;
    std::cout << '\n';
  }
  return 0;
}

int cmd_bench(const Common& c) {
  const auto cfg = resolve_config(c);
  if (cfg.output_dir.empty()) throw ConfigError("no output directory (use --out or UNIORD_OUT)");
  bench::ensure_writable(cfg.output_dir);
  std::string note;
  const auto ds = bench::load_dataset(cfg.dataset, &note);
  if (!note.empty()) log_line(note);
  log_line(std::to_string(cfg.methods.size()) + " methods x " + std::to_string(cfg.seeds.size()) + " seeds on " +
           std::to_string(ds.data.size()) + " rows");
  const auto report = bench::run_benchmark(cfg, ds, c.jobs, log_line);
  bench::emit_report(report, cfg.output_dir);
  std::cout << bench::render_table(report);
  return report.partial() ? 1 : 0;
}

int cmd_report(const std::string& dir) {
  const auto report = bench::load_report(dir);
  bench::emit_report(report, dir, false);
  std::cout << bench::render_table(report);
  return 0;
}

int cmd_verify(bool quick) {
  const auto budget = quick ? verify::Budget::quick() : verify::Budget::full();
  int failed = 0;
  for (const auto& suite : verify::run_all(budget)) {
    std::cout << (suite.passed() ? "PASS " : "FAIL ") << suite.name << " (" << suite.checks << " checks";
    if (suite.failures) std::cout << ", " << suite.failures << " failed: " << suite.first_failure;
    std::cout << ")\n";
    if (!suite.passed()) ++failed;
  }
  std::cout << (failed ? "verify: FAILED\n" : "verify: all suites passed\n");
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinal regression with unimodal output distributions"};
  app.require_subcommand(1);

  Common common;
  std::string method;
  std::string report_dir;
  bool quick = false;

  const auto add_data_flags = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Experiment config (JSON)");
    sub->add_option("--data", common.data, "Dataset file; overrides the config");
    sub->add_option("--format", common.format, "Dataset format: uci or labeled")->check(CLI::IsMember({"uci", "labeled"}));
    sub->add_option("--out", common.out, "Output directory (default: $UNIORD_OUT)");
    sub->add_option("--seeds", common.seeds, "Comma-separated trial seeds");
  };

  auto* prepare = app.add_subcommand("prepare", "Load, bin and split a dataset; cache the split indices");
  add_data_flags(prepare);
  auto* train = app.add_subcommand("train", "Train one method and save checkpoints");
  add_data_flags(train);
  train->add_option("--method", method, "Method name from the config")->required();
  auto* bench_cmd = app.add_subcommand("bench", "Run the full method grid over all seeds");
  add_data_flags(bench_cmd);
  bench_cmd->add_option("--jobs", common.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  auto* report = app.add_subcommand("report", "Re-render tables from a stored benchmark directory");
  report->add_option("--out", report_dir, "Benchmark output directory (default: $UNIORD_OUT)");
  auto* verify_cmd = app.add_subcommand("verify", "Run the property and oracle suites");
  verify_cmd->add_flag("--quick", quick, "Smaller sample counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const auto usage_error = [](CLI::App* sub, const std::string& msg) {
    std::cerr << "error: " << msg << "\n\n" << sub->help();
    return 2;
  };

  try {
    if (*prepare) return cmd_prepare(common);
    if (*train) return cmd_train(common, method);
    if (*bench_cmd) {
      const bool has_data = !common.data.empty() || (!common.config.empty() && !bench::load_config(common.config).dataset.path.empty());
      if (!has_data) return usage_error(bench_cmd, "no dataset given (use --data or set dataset.path in --config)");
      return cmd_bench(common);
    }
    if (*report) {
      if (report_dir.empty())
        if (const char* env = std::getenv("UNIORD_OUT"); env && *env) report_dir = env;
      if (report_dir.empty()) return usage_error(report, "no report directory given");
      return cmd_report(report_dir);
    }
    if (*verify_cmd) return cmd_verify(quick);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
