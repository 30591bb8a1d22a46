#pragma once

// Method grid, multi-seed trials, report aggregation and report files.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "uniord/data.hpp"
#include "uniord/errors.hpp"
#include "uniord/metrics.hpp"
#include "uniord/models.hpp"
#include "uniord/nn.hpp"
#include "uniord/pom.hpp"
#include "uniord/soft_targets.hpp"

namespace uniord::bench {

using json = nlohmann::json;

enum class MethodKind { Net, Pom };

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::Net;
  nn::HeadType head = nn::HeadType::Softmax;
  nn::LossType loss = nn::LossType::CrossEntropy;
  std::optional<SoftTargetSpec> soft;
};

/// Ablation baselines and hybrids, then the architectural and soft-target comparators.
inline std::vector<MethodSpec> default_methods() {
  using nn::HeadType;
  using nn::LossType;
  SoftTargetSpec dldl{SoftTargetKind::SquaredExp, 1.0};
  SoftTargetSpec sord{SoftTargetKind::LinearExp, 1.0};
  SoftTargetSpec liu{SoftTargetKind::DiracUniformLinearMix, 1.0, 0.5, 0.1, 0.4};
  return {
      {"regression", MethodKind::Net, HeadType::LinearRegression, LossType::MSE, std::nullopt},
      {"classification", MethodKind::Net, HeadType::Softmax, LossType::CrossEntropy, std::nullopt},
      {"pom", MethodKind::Pom, HeadType::Softmax, LossType::CrossEntropy, std::nullopt},
      {"proposed", MethodKind::Net, HeadType::Unimodal, LossType::OptimalTransport, std::nullopt},
      {"classification_ot", MethodKind::Net, HeadType::Softmax, LossType::OptimalTransport, std::nullopt},
      {"unimodal_ce", MethodKind::Net, HeadType::Unimodal, LossType::CrossEntropy, std::nullopt},
      {"binomial", MethodKind::Net, HeadType::Binomial, LossType::OptimalTransport, std::nullopt},
      {"dldl", MethodKind::Net, HeadType::Softmax, LossType::KLToSoftTarget, dldl},
      {"sord", MethodKind::Net, HeadType::Softmax, LossType::KLToSoftTarget, sord},
      {"liu", MethodKind::Net, HeadType::Softmax, LossType::OptimalTransport, liu},
  };
}

struct DatasetConfig {
  std::string path;
  std::string format = "uci";  // "uci" (raw rings, binned) or "labeled" (label column)
  bool header = false;
  data::SexEncoding sex = data::SexEncoding::Drop;
  std::vector<int> ring_edges = data::default_ring_edges();
};

struct ExperimentConfig {
  DatasetConfig dataset;
  data::SplitSpec split;
  std::vector<int> hidden{64, 64};
  nn::Activation activation = nn::Activation::ReLU;
  Family family = Family::Normal;
  double ot_m = 1.0;
  nn::TrainConfig train;
  pom::FitOptions pom;
  std::vector<MethodSpec> methods = default_methods();
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output_dir;

  void validate() const {
    if (seeds.empty()) throw ConfigError("config: need at least one trial seed");
    if (methods.empty()) throw ConfigError("config: method list is empty");
    train.validate();
    split.validate();
    for (const auto& m : methods) {
      if (m.kind == MethodKind::Pom) continue;
      nn::check_compatible(nn::HeadKind{m.head, 2, family}, nn::LossKind{m.loss, ot_m});
      if (m.soft) {
        m.soft->validate();
        if (m.head != nn::HeadType::Softmax) throw ConfigError("method '" + m.name + "': soft targets need a softmax head");
        if (m.loss == nn::LossType::OptimalTransport && ot_m != 1.0)
          throw ConfigError("method '" + m.name + "': soft-target transport loss needs m = 1");
      }
    }
  }

  const MethodSpec& method(const std::string& name) const {
    for (const auto& m : methods)
      if (m.name == name) return m;
    throw ConfigError("unknown method '" + name + "'");
  }
};

// ---- config <-> json ------------------------------------------------------

inline json method_to_json(const MethodSpec& m) {
  json j{{"name", m.name}};
  if (m.kind == MethodKind::Pom) {
    j["kind"] = "pom";
    return j;
  }
  j["kind"] = "nn";
  j["head"] = std::string(nn::to_string(m.head));
  j["loss"] = std::string(nn::to_string(m.loss));
  if (m.soft) {
    j["soft_target"] = {{"kind", std::string(to_string(m.soft->kind))},
                        {"tau", m.soft->tau},
                        {"weights", {m.soft->w_dirac, m.soft->w_uniform, m.soft->w_exp}}};
  }
  return j;
}

inline MethodSpec method_from_json(const json& j) {
  MethodSpec m;
  m.name = j.at("name").get<std::string>();
  const std::string kind = j.value("kind", "nn");
  if (kind == "pom") {
    m.kind = MethodKind::Pom;
    return m;
  }
  if (kind != "nn") throw ConfigError("method '" + m.name + "': unknown kind '" + kind + "'");
  m.head = nn::head_type_from_string(j.at("head").get<std::string>());
  m.loss = nn::loss_type_from_string(j.at("loss").get<std::string>());
  if (j.contains("soft_target")) {
    const json& s = j["soft_target"];
    SoftTargetSpec st;
    st.kind = soft_target_kind_from_string(s.at("kind").get<std::string>());
    st.tau = s.value("tau", 1.0);
    if (s.contains("weights")) {
      const auto w = s["weights"].get<std::vector<double>>();
      if (w.size() != 3) throw ConfigError("soft_target.weights needs 3 entries");
      st.w_dirac = w[0];
      st.w_uniform = w[1];
      st.w_exp = w[2];
    }
    m.soft = st;
  }
  return m;
}

inline json config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (const auto& m : c.methods) methods.push_back(method_to_json(m));
  return {
      {"dataset",
       {{"path", c.dataset.path},
        {"format", c.dataset.format},
        {"header", c.dataset.header},
        {"sex", c.dataset.sex == data::SexEncoding::Drop ? "drop" : "onehot"},
        {"ring_edges", c.dataset.ring_edges}}},
      {"split", {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}, {"stratified", c.split.stratified}}},
      {"model", {{"hidden", c.hidden}, {"activation", std::string(nn::to_string(c.activation))},
                 {"family", std::string(to_string(c.family))}, {"ot_m", c.ot_m}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"learning_rate", c.train.learning_rate},
        {"lr_decay_epochs", c.train.lr_decay_epochs},
        {"lr_decay_factor", c.train.lr_decay_factor},
        {"weight_decay", c.train.weight_decay},
        {"adam_betas", {c.train.beta1, c.train.beta2}}}},
      {"pom", {{"max_iterations", c.pom.max_iterations}, {"learning_rate", c.pom.learning_rate}, {"tolerance", c.pom.tolerance}}},
      {"methods", methods},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir},
      {"metadata", {{"entropy_units", "nats"}, {"histogram_bins", metrics::kHistogramBins},
                    {"splits", "resampled per seed"}}},
  };
}

/// Reads a config; every key is optional and falls back to the defaults above.
inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("dataset")) {
      const json& d = j["dataset"];
      c.dataset.path = d.value("path", c.dataset.path);
      c.dataset.format = d.value("format", c.dataset.format);
      c.dataset.header = d.value("header", c.dataset.header);
      const std::string sex = d.value("sex", std::string("drop"));
      if (sex != "drop" && sex != "onehot") throw ConfigError("dataset.sex must be 'drop' or 'onehot'");
      c.dataset.sex = sex == "drop" ? data::SexEncoding::Drop : data::SexEncoding::OneHot;
      if (d.contains("ring_edges")) c.dataset.ring_edges = d["ring_edges"].get<std::vector<int>>();
      if (c.dataset.format != "uci" && c.dataset.format != "labeled")
        throw ConfigError("dataset.format must be 'uci' or 'labeled'");
    }
    if (j.contains("split")) {
      const json& s = j["split"];
      c.split.train = s.value("train", c.split.train);
      c.split.val = s.value("val", c.split.val);
      c.split.test = s.value("test", c.split.test);
      c.split.stratified = s.value("stratified", c.split.stratified);
    }
    if (j.contains("model")) {
      const json& m = j["model"];
      if (m.contains("hidden")) c.hidden = m["hidden"].get<std::vector<int>>();
      if (m.contains("activation")) c.activation = nn::activation_from_string(m["activation"].get<std::string>());
      if (m.contains("family")) c.family = family_from_string(m["family"].get<std::string>());
      c.ot_m = m.value("ot_m", c.ot_m);
    }
    if (j.contains("train")) {
      const json& t = j["train"];
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.lr_decay_epochs = t.value("lr_decay_epochs", c.train.lr_decay_epochs);
      c.train.lr_decay_factor = t.value("lr_decay_factor", c.train.lr_decay_factor);
      c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
      if (t.contains("adam_betas")) {
        const auto b = t["adam_betas"].get<std::vector<double>>();
        if (b.size() != 2) throw ConfigError("train.adam_betas needs 2 entries");
        c.train.beta1 = b[0];
        c.train.beta2 = b[1];
      }
    }
    if (j.contains("pom")) {
      const json& p = j["pom"];
      c.pom.max_iterations = p.value("max_iterations", c.pom.max_iterations);
      c.pom.learning_rate = p.value("learning_rate", c.pom.learning_rate);
      c.pom.tolerance = p.value("tolerance", c.pom.tolerance);
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const json& m : j["methods"]) {
        if (m.is_string()) {
          bool found = false;
          for (const auto& d : default_methods())
            if (d.name == m.get<std::string>()) {
              c.methods.push_back(d);
              found = true;
            }
          if (!found) throw ConfigError("unknown built-in method '" + m.get<std::string>() + "'");
        } else {
          c.methods.push_back(method_from_json(m));
        }
      }
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    else if (j.contains("n_trials")) {
      const int n = j["n_trials"].get<int>();
      if (n < 1) throw ConfigError("n_trials must be >= 1");
      c.seeds.clear();
      for (int s = 1; s <= n; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

/// 64-bit FNV-1a of the canonical config dump, hex encoded.
inline std::string digest(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline data::OrdinalDataset load_dataset(const DatasetConfig& d, std::string* note = nullptr) {
  if (d.path.empty()) throw ConfigError("dataset path is not set");
  if (d.format == "labeled") return data::load_labeled_csv(d.path);
  const data::AbaloneTable t = data::load_abalone(d.path, d.header);
  std::size_t clamped = 0;
  auto ds = data::abalone_dataset(t, d.ring_edges, d.sex, &clamped);
  if (note && clamped > 0) *note = std::to_string(clamped) + " ring counts fell outside the bin edges and were clamped";
  return ds;
}

// ---- runs -------------------------------------------------------------------

struct RunRow {
  std::string method;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  metrics::EvalResult eval;
  nn::TrainingCurve curve;
  std::string config_digest;
  double wall_seconds = 0.0;
};

struct TrainedRun {
  RunRow row;
  std::optional<AnyModel> model;
};

inline nn::MlpSpec mlp_spec_for(const ExperimentConfig& c, const MethodSpec& m, int input_dim, int k, std::uint64_t seed) {
  nn::MlpSpec s;
  s.input_dim = input_dim;
  s.hidden = c.hidden;
  s.activation = c.activation;
  s.head = nn::HeadKind{m.head, k, c.family};
  s.seed = seed;
  return s;
}

/// Trains one method on one prepared split and evaluates it on the test rows.
inline TrainedRun train_method(const ExperimentConfig& c, const MethodSpec& m, const data::PreparedSplit& ps,
                               std::uint64_t seed) {
  TrainedRun out;
  out.row.method = m.name;
  out.row.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const int d = static_cast<int>(ps.train.X.cols());
    const int k = ps.train.k;
    if (m.kind == MethodKind::Pom) {
      pom::FitResult fit = pom::pom_fit(ps.train, c.pom);
      for (double ll : fit.log_likelihood) out.row.curve.push_back(-ll);
      out.model = PomModel(std::move(fit.params));
    } else {
      nn::TrainConfig tc = c.train;
      tc.seed = seed;
      const nn::LossKind loss{m.loss, c.ot_m};
      if (m.soft) {
        nn::Mlp mlp = train_with_soft_targets(mlp_spec_for(c, m, d, k, seed), ps.train, *m.soft, loss, tc, &out.row.curve);
        out.model = NetModel(std::move(mlp));
      } else {
        nn::Mlp mlp(mlp_spec_for(c, m, d, k, seed));
        out.row.curve = nn::train(mlp, ps.train, loss, tc);
        out.model = NetModel(std::move(mlp));
      }
    }
    out.row.eval = evaluate_any(*out.model, ps.test);
    out.row.ok = true;
  } catch (const std::exception& e) {
    out.row.ok = false;
    out.row.error = e.what();
    out.model.reset();
  }
  out.row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct MetricSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 when n < 2
};

inline MetricSummary summarize_values(const std::vector<double>& v) {
  MetricSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  double total = 0.0;
  for (double x : v) total += x;
  s.mean = total / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

struct Aggregate {
  std::string method;
  std::size_t n_runs = 0, n_failed = 0;
  MetricSummary mae, unimodal_rate, entropy_ratio, mean_sigma, mode_correct, mode_incorrect;
  metrics::Histogram hist_correct, hist_incorrect;  // summed over runs
};

struct RunReport {
  json config;
  std::vector<RunRow> runs;

  bool partial() const {
    return std::any_of(runs.begin(), runs.end(), [](const RunRow& r) { return !r.ok; });
  }

  std::vector<std::string> method_order() const {
    std::vector<std::string> names;
    for (const auto& r : runs)
      if (std::find(names.begin(), names.end(), r.method) == names.end()) names.push_back(r.method);
    return names;
  }

  /// Pure function of the run rows.
  std::vector<Aggregate> aggregates() const {
    std::vector<Aggregate> out;
    for (const auto& name : method_order()) {
      Aggregate a;
      a.method = name;
      std::vector<double> mae, uni, er, sig, mc, mi;
      for (const auto& r : runs) {
        if (r.method != name) continue;
        if (!r.ok) {
          ++a.n_failed;
          continue;
        }
        ++a.n_runs;
        mae.push_back(r.eval.mae);
        if (r.eval.unimodal_rate) uni.push_back(*r.eval.unimodal_rate);
        if (r.eval.entropy_ratio) er.push_back(*r.eval.entropy_ratio);
        if (r.eval.mean_sigma) sig.push_back(*r.eval.mean_sigma);
        if (r.eval.mean_mode_correct) mc.push_back(*r.eval.mean_mode_correct);
        if (r.eval.mean_mode_incorrect) mi.push_back(*r.eval.mean_mode_incorrect);
        for (std::size_t b = 0; b < metrics::kHistogramBins; ++b) {
          a.hist_correct.counts[b] += r.eval.mode_hist_correct.counts[b];
          a.hist_incorrect.counts[b] += r.eval.mode_hist_incorrect.counts[b];
        }
      }
      a.mae = summarize_values(mae);
      a.unimodal_rate = summarize_values(uni);
      a.entropy_ratio = summarize_values(er);
      a.mean_sigma = summarize_values(sig);
      a.mode_correct = summarize_values(mc);
      a.mode_incorrect = summarize_values(mi);
      out.push_back(std::move(a));
    }
    return out;
  }

  const Aggregate* find(const std::vector<Aggregate>& aggs, const std::string& method) const {
    for (const auto& a : aggs)
      if (a.method == method) return &a;
    return nullptr;
  }
};

using Logger = std::function<void(const std::string&)>;

/// Every method x seed on the given dataset. Within a seed all methods share one split.
inline RunReport run_benchmark(const ExperimentConfig& c, const data::OrdinalDataset& ds, int jobs = 1,
                               const Logger& log = {}) {
  c.validate();
  RunReport report;
  report.config = config_to_json(c);
  const std::string dig = digest(report.config);

  std::map<std::uint64_t, data::PreparedSplit> prepared;
  for (std::uint64_t seed : c.seeds) {
    data::SplitSpec spec = c.split;
    spec.seed = seed;
    std::string warning;
    const auto idx = data::split(ds.data, spec, &warning);
    if (!warning.empty() && log) log("seed " + std::to_string(seed) + ": " + warning);
    prepared.emplace(seed, data::prepare(ds.data, idx));
  }

  struct Job {
    const MethodSpec* method;
    std::uint64_t seed;
  };
  std::vector<Job> work;
  for (const auto& m : c.methods)
    for (std::uint64_t seed : c.seeds) work.push_back({&m, seed});
  report.runs.resize(work.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      TrainedRun tr = train_method(c, *work[i].method, prepared.at(work[i].seed), work[i].seed);
      tr.row.config_digest = dig;
      if (log) {
        std::lock_guard lock(log_mutex);
        std::ostringstream msg;
        msg << tr.row.method << " seed " << tr.row.seed << ": ";
        if (tr.row.ok) msg << "test MAE " << tr.row.eval.mae;
        else msg << "FAILED (" << tr.row.error << ")";
        msg << " [" << static_cast<int>(tr.row.wall_seconds) << " s]";
        log(msg.str());
      }
      report.runs[i] = std::move(tr.row);
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

// ---- serialization ----------------------------------------------------------

namespace detail {

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
inline std::optional<double> opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline std::string num(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

inline std::string pm(const MetricSummary& s, int digits = 2) {
  if (s.n == 0) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f +- %.*f", digits, s.mean, digits, s.std);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace detail

inline json eval_to_json(const metrics::EvalResult& e) {
  return {{"n", e.n},
          {"n_correct", e.n_correct},
          {"mae", e.mae},
          {"unimodal_rate", detail::opt(e.unimodal_rate)},
          {"entropy_ratio", detail::opt(e.entropy_ratio)},
          {"mean_entropy_correct", detail::opt(e.mean_entropy_correct)},
          {"mean_entropy_incorrect", detail::opt(e.mean_entropy_incorrect)},
          {"mean_mode_correct", detail::opt(e.mean_mode_correct)},
          {"mean_mode_incorrect", detail::opt(e.mean_mode_incorrect)},
          {"mean_sigma", detail::opt(e.mean_sigma)},
          {"mode_hist_correct", e.mode_hist_correct.counts},
          {"mode_hist_incorrect", e.mode_hist_incorrect.counts}};
}

inline metrics::EvalResult eval_from_json(const json& j) {
  metrics::EvalResult e;
  e.n = j.at("n").get<std::size_t>();
  e.n_correct = j.at("n_correct").get<std::size_t>();
  e.mae = j.at("mae").get<double>();
  e.unimodal_rate = detail::opt(j.at("unimodal_rate"));
  e.entropy_ratio = detail::opt(j.at("entropy_ratio"));
  e.mean_entropy_correct = detail::opt(j.at("mean_entropy_correct"));
  e.mean_entropy_incorrect = detail::opt(j.at("mean_entropy_incorrect"));
  e.mean_mode_correct = detail::opt(j.at("mean_mode_correct"));
  e.mean_mode_incorrect = detail::opt(j.at("mean_mode_incorrect"));
  e.mean_sigma = detail::opt(j.at("mean_sigma"));
  e.mode_hist_correct.counts = j.at("mode_hist_correct").get<std::array<std::size_t, metrics::kHistogramBins>>();
  e.mode_hist_incorrect.counts = j.at("mode_hist_incorrect").get<std::array<std::size_t, metrics::kHistogramBins>>();
  return e;
}

inline json aggregates_to_json(const std::vector<Aggregate>& aggs) {
  json out = json::array();
  for (const auto& a : aggs) {
    const auto ms = [](const MetricSummary& s) { return json{{"n", s.n}, {"mean", s.mean}, {"std", s.std}}; };
    out.push_back({{"method", a.method},
                   {"n_runs", a.n_runs},
                   {"n_failed", a.n_failed},
                   {"mae", ms(a.mae)},
                   {"unimodal_rate", ms(a.unimodal_rate)},
                   {"entropy_ratio", ms(a.entropy_ratio)},
                   {"mean_sigma", ms(a.mean_sigma)}});
  }
  return out;
}

inline json report_to_json(const RunReport& r) {
  json runs = json::array();
  for (const auto& row : r.runs) {
    runs.push_back({{"method", row.method},
                    {"seed", row.seed},
                    {"ok", row.ok},
                    {"error", row.error},
                    {"config_digest", row.config_digest},
                    {"eval", eval_to_json(row.eval)},
                    {"curve", row.curve}});
  }
  return {{"format", "uniord-report v1"},
          {"partial", r.partial()},
          {"config", r.config},
          {"runs", runs},
          {"aggregate", aggregates_to_json(r.aggregates())}};
}

/// Parses report.json and checks that the stored aggregate block matches the run rows.
inline RunReport report_from_json(const json& j) {
  if (j.value("format", "") != "uniord-report v1") throw IoError("report: unknown format");
  RunReport r;
  r.config = j.at("config");
  for (const json& row : j.at("runs")) {
    RunRow rr;
    rr.method = row.at("method").get<std::string>();
    rr.seed = row.at("seed").get<std::uint64_t>();
    rr.ok = row.at("ok").get<bool>();
    rr.error = row.at("error").get<std::string>();
    rr.config_digest = row.at("config_digest").get<std::string>();
    rr.eval = eval_from_json(row.at("eval"));
    rr.curve = row.at("curve").get<std::vector<double>>();
    r.runs.push_back(std::move(rr));
  }
  const json recomputed = aggregates_to_json(r.aggregates());
  const json& stored = j.at("aggregate");
  if (stored.size() != recomputed.size()) throw IoError("report: aggregate block does not match run rows");
  for (std::size_t i = 0; i < stored.size(); ++i) {
    for (const char* key : {"mae", "unimodal_rate", "entropy_ratio", "mean_sigma"}) {
      const double a = stored[i][key]["mean"].get<double>(), b = recomputed[i][key]["mean"].get<double>();
      if (std::abs(a - b) > 1e-12) throw IoError("report: aggregate '" + std::string(key) + "' disagrees with run rows");
    }
  }
  return r;
}

inline RunReport load_report(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "report.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return report_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw IoError("report '" + path.string() + "': " + e.what());
  }
}

/// Creates dir and verifies it accepts files; called before any training starts.
inline void ensure_writable(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = std::filesystem::path(dir) / ".uniord-write-test";
  {
    std::ofstream out(probe);
    if (!out || ec) throw IoError("output directory '" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

/// Human-readable table: one line per method, mean +- std over trials.
inline std::string render_table(const RunReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-16s %-16s %-16s %-16s %s\n", "Method", "MAE", "Unimodal", "EntropyRatio",
                "Sigma", "Runs");
  out << line << std::string(96, '-') << '\n';
  for (const auto& a : r.aggregates()) {
    std::snprintf(line, sizeof line, "%-20s %-16s %-16s %-16s %-16s %zu%s\n", a.method.c_str(),
                  detail::pm(a.mae).c_str(), detail::pm(a.unimodal_rate).c_str(), detail::pm(a.entropy_ratio).c_str(),
                  detail::pm(a.mean_sigma, 3).c_str(), a.n_runs, a.n_failed ? " (some failed)" : "");
    out << line;
  }
  if (r.partial()) out << "\nPARTIAL REPORT: at least one run failed; see runs.csv.\n";
  return out.str();
}

/// Writes report.json, runs.csv, aggregate.csv, curves.csv, table.txt and per-method histograms.
///
/// Wall-clock times go to timings.csv only, so every other file is reproducible.
inline void emit_report(const RunReport& r, const std::string& dir, bool with_timings = true) {
  ensure_writable(dir);
  namespace fs = std::filesystem;
  const fs::path root(dir);
  {
    auto out = detail::open_out(root / "report.json");
    out << report_to_json(r).dump(2) << '\n';
  }
  {
    auto out = detail::open_out(root / "runs.csv");
    out << "method,seed,status,n_test,mae,unimodal_rate,entropy_ratio,mean_entropy_correct,mean_entropy_incorrect,"
           "mean_mode_correct,mean_mode_incorrect,mean_sigma,config_digest,error\n";
    for (const auto& row : r.runs) {
      const auto& e = row.eval;
      std::string err = row.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      out << row.method << ',' << row.seed << ',' << (row.ok ? "ok" : "failed") << ',' << e.n << ','
          << (row.ok ? detail::num(e.mae) : "NA") << ',' << detail::num(e.unimodal_rate) << ','
          << detail::num(e.entropy_ratio) << ',' << detail::num(e.mean_entropy_correct) << ','
          << detail::num(e.mean_entropy_incorrect) << ',' << detail::num(e.mean_mode_correct) << ','
          << detail::num(e.mean_mode_incorrect) << ',' << detail::num(e.mean_sigma) << ',' << row.config_digest << ','
          << err << '\n';
    }
  }
  const auto aggs = r.aggregates();
  {
    auto out = detail::open_out(root / "aggregate.csv");
    out << "method,n_runs,n_failed,mae_mean,mae_std,unimodal_rate_mean,unimodal_rate_std,entropy_ratio_mean,"
           "entropy_ratio_std,mean_sigma_mean,mean_sigma_std,mode_correct_mean,mode_incorrect_mean\n";
    const auto cell = [](const MetricSummary& s, bool std_dev) {
      return s.n == 0 ? std::string("NA") : detail::num(std_dev ? s.std : s.mean);
    };
    for (const auto& a : aggs) {
      out << a.method << ',' << a.n_runs << ',' << a.n_failed << ',' << cell(a.mae, false) << ',' << cell(a.mae, true)
          << ',' << cell(a.unimodal_rate, false) << ',' << cell(a.unimodal_rate, true) << ','
          << cell(a.entropy_ratio, false) << ',' << cell(a.entropy_ratio, true) << ',' << cell(a.mean_sigma, false)
          << ',' << cell(a.mean_sigma, true) << ',' << cell(a.mode_correct, false) << ','
          << cell(a.mode_incorrect, false) << '\n';
    }
  }
  {
    auto out = detail::open_out(root / "curves.csv");
    out << "method,seed,epoch,train_loss\n";
    for (const auto& row : r.runs)
      for (std::size_t e = 0; e < row.curve.size(); ++e)
        out << row.method << ',' << row.seed << ',' << e << ',' << detail::num(row.curve[e]) << '\n';
  }
  {
    auto out = detail::open_out(root / "table.txt");
    out << render_table(r);
  }
  fs::create_directories(root / "histograms");
  for (const auto& a : aggs) {
    for (const auto& [suffix, hist] : {std::pair{"correct", &a.hist_correct}, std::pair{"incorrect", &a.hist_incorrect}}) {
      auto out = detail::open_out(root / "histograms" / (a.method + "_" + suffix + ".tsv"));
      for (std::size_t b = 0; b < metrics::kHistogramBins; ++b)
        out << detail::num(metrics::Histogram::bin_lower(b)) << '\t' << hist->counts[b] << '\n';
    }
  }
  if (with_timings) {
    auto out = detail::open_out(root / "timings.csv");
    out << "method,seed,wall_seconds\n";
    for (const auto& row : r.runs) out << row.method << ',' << row.seed << ',' << detail::num(row.wall_seconds) << '\n';
  }
}

}  // namespace uniord::bench
