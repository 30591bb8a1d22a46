// Release acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance core      criteria 1-5 (self-contained)
//   acceptance abalone   criteria 6-9 (needs the UCI Abalone file)
//
// The Abalone file is taken from $UNIORD_ABALONE, else tests/data/abalone.data.
// Exit status: 0 all selected criteria pass, 77 only data-blocked criteria failed, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include "json.hpp"
#include "uniord/bench.hpp"
#include "uniord/verify.hpp"

using namespace uniord;

namespace {

// Tolerances and thresholds.
constexpr double kCriterion1Seconds = 60.0;
constexpr double kCriterion2Seconds = 60.0;
constexpr double kOtTolerance = 1e-9;          // enforced inside the oracle suites
constexpr double kGradTolerance = 1e-4;        // enforced inside the gradient suites
constexpr int kGradProbes = 100;
constexpr double kCeTolerance = 1e-12;
constexpr double kWitnessTolerance = 1e-12;
constexpr double kOtGap = 0.1;
constexpr double kProposedMaeCeiling = 1.10;
constexpr double kPomGap = 0.2;
constexpr double kHybridBand = 0.1;
constexpr double kSigmaFactor = 2.0;

enum class Outcome { Pass, Fail, Blocked };

int failures = 0, blocked = 0;

void report(int id, Outcome o, const std::string& detail) {
  const char* tag = o == Outcome::Pass ? "PASS" : "FAIL";
  std::printf("criterion %d: %s  %s%s\n", id, tag, o == Outcome::Blocked ? "(blocked) " : "", detail.c_str());
  std::fflush(stdout);
  if (o == Outcome::Fail) ++failures;
  if (o == Outcome::Blocked) ++blocked;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = verify::lemma1_fuzz(verify::Budget::full());
  const double s = seconds_since(t0);
  const bool ok = r.passed() && r.checks == 100000 && s < kCriterion1Seconds;
  report(1, ok ? Outcome::Pass : Outcome::Fail,
         std::to_string(r.checks) + " draws, " + std::to_string(r.failures) + " non-unimodal, " + fmt("%.1f s", s) +
             (r.failures ? " first: " + r.first_failure : ""));
}

void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dirac = verify::ot_dirac_oracle(verify::Budget::full());
  const auto general = verify::ot_cmf_oracle(verify::Budget::full());
  const double s = seconds_since(t0);
  const bool ok = dirac.passed() && general.passed() && s < kCriterion2Seconds;
  report(2, ok ? Outcome::Pass : Outcome::Fail,
         "point-mass " + std::to_string(dirac.checks - dirac.failures) + "/" + std::to_string(dirac.checks) +
             ", general " + std::to_string(general.checks - general.failures) + "/" + std::to_string(general.checks) +
             fmt(" within %.0e, %.1f s", kOtTolerance, s) + (dirac.failures ? " " + dirac.first_failure : "") +
             (general.failures ? " " + general.first_failure : ""));
}

void criterion3() {
  verify::Budget b = verify::Budget::full();
  b.grad_probes = kGradProbes;
  std::size_t pipelines = 0, bad = 0, probes = 0;
  std::string first;
  for (const auto& pl : verify::benchmark_pipelines()) {
    const auto r = verify::pipeline_gradient(pl, b);
    ++pipelines;
    probes += r.checks;
    if (!r.passed() || r.checks < static_cast<std::size_t>(kGradProbes)) {
      ++bad;
      if (first.empty()) first = pl.name + ": " + r.first_failure;
    }
  }
  report(3, bad == 0 ? Outcome::Pass : Outcome::Fail,
         std::to_string(pipelines - bad) + "/" + std::to_string(pipelines) + " pipelines, " + std::to_string(probes) +
             fmt(" probes, rel err < %.0e", kGradTolerance) + (first.empty() ? "" : " first: " + first));
}

bool close(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > kWitnessTolerance) return false;
  return true;
}

void criterion4() {
  std::ifstream in(std::string(UNIORD_FIXTURE_DIR) + "/non_unimodal_witnesses.json");
  if (!in) {
    report(4, Outcome::Fail, "archived witness file missing");
    return;
  }
  const auto j = nlohmann::json::parse(in);
  bool ok = true;
  int pom_found = 0;
  for (const auto& w : j.at("proportional_odds")) {
    const int k = w.at("k").get<int>();
    const auto live = pom::find_non_unimodal(k, 10000, w.at("search_seed").get<std::uint64_t>());
    const pom::PomParams p{w.at("beta").get<std::vector<double>>(), w.at("alpha").get<std::vector<double>>()};
    const auto probs = pom::pom_class_probs(p, w.at("x").get<std::vector<double>>());
    const bool match = live && live->trial == w.at("trial").get<int>() && !is_unimodal(probs) && k >= 4 &&
                       close(probs.vec(), w.at("probs").get<std::vector<double>>());
    ok = ok && match;
    pom_found += match;
  }
  const auto& s = j.at("softmax");
  const auto live = verify::find_softmax_non_unimodal(s.at("k").get<int>(), 10000, s.at("search_seed").get<std::uint64_t>());
  const nn::Mlp net(nn::MlpSpec{4, {8}, nn::Activation::ReLU, nn::HeadKind::softmax(s.at("k").get<int>()),
                                s.at("net_seed").get<std::uint64_t>()});
  const auto out = net.forward(s.at("x").get<std::vector<double>>());
  const bool soft_ok = live && live->net_seed == s.at("net_seed").get<std::uint64_t>() && !is_unimodal(*out.probs) &&
                       close(out.probs->vec(), s.at("probs").get<std::vector<double>>());
  ok = ok && soft_ok && pom_found > 0;
  report(4, ok ? Outcome::Pass : Outcome::Fail,
         std::to_string(pom_found) + " proportional-odds witnesses (k >= 4) and " + (soft_ok ? "1" : "0") +
             " softmax witness reproduced from fixtures");
}

void criterion5() {
  const nn::HeadOutput a{ProbVector({0.5, 0.2, 0.3}), 0.0, std::nullopt};
  const nn::HeadOutput b{ProbVector({0.5, 0.3, 0.2}), 0.0, std::nullopt};
  const nn::Target y{1, nullptr};
  const double ce = std::abs(nn::loss(nn::LossKind::cross_entropy(), a, y) - nn::loss(nn::LossKind::cross_entropy(), b, y));
  const double ot = nn::loss(nn::LossKind::optimal_transport(1.0), a, y) - nn::loss(nn::LossKind::optimal_transport(1.0), b, y);
  const bool ok = ce <= kCeTolerance && std::abs(ot - kOtGap) <= kCeTolerance;
  report(5, ok ? Outcome::Pass : Outcome::Fail, fmt("|dCE| = %.1e, dOT = %.15f", ce, ot));
}

std::string abalone_path() {
  if (const char* env = std::getenv("UNIORD_ABALONE"); env && *env) return env;
  return std::string(UNIORD_SOURCE_DIR) + "/tests/data/abalone.data";
}

struct MethodStats {
  double mae = 0.0;
  std::vector<const bench::RunRow*> rows;
};

void abalone_criteria() {
  const std::string path = abalone_path();
  if (!std::filesystem::exists(path)) {
    const std::string why = "UCI Abalone file not found at " + path + " (set UNIORD_ABALONE)";
    for (int id = 6; id <= 9; ++id) report(id, Outcome::Blocked, why);
    return;
  }
  bench::ExperimentConfig cfg;  // defaults: 10 methods, seeds 1..5
  cfg.dataset.path = path;
  const auto ds = bench::load_dataset(cfg.dataset);
  const int jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  const auto first = bench::run_benchmark(cfg, ds, jobs);
  const double s = seconds_since(t0);
  if (const char* out = std::getenv("UNIORD_ACCEPTANCE_OUT"); out && *out) bench::emit_report(first, out);
  const auto aggs = first.aggregates();
  const auto mean_mae = [&](const std::string& m) {
    const auto* a = first.find(aggs, m);
    return a && a->n_runs ? a->mae.mean : 1e9;
  };
  const auto rows_of = [&](const std::string& m) {
    std::vector<const bench::RunRow*> out;
    for (const auto& r : first.runs)
      if (r.method == m) out.push_back(&r);
    return out;
  };

  // 6
  const double prop = mean_mae("proposed"), pom = mean_mae("pom"), cls = mean_mae("classification"),
               reg = mean_mae("regression"), cot = mean_mae("classification_ot"), uce = mean_mae("unimodal_ce");
  const double worst = std::max({pom, cls, reg});
  const bool a = prop <= kProposedMaeCeiling, b = pom - prop >= kPomGap, c = prop <= cls;
  const bool d = cot >= prop - kHybridBand && cot <= worst + kHybridBand && uce >= prop - kHybridBand &&
                 uce <= worst + kHybridBand;
  report(6, a && b && c && d && !first.partial() ? Outcome::Pass : Outcome::Fail,
         fmt("proposed %.3f, pom %.3f, classification %.3f, regression %.3f", prop, pom, cls, reg) +
             fmt("; hybrids %.3f / %.3f; ", cot, uce) + std::string("(a)") + (a ? "ok" : "x") + " (b)" + (b ? "ok" : "x") +
             " (c)" + (c ? "ok" : "x") + " (d)" + (d ? "ok" : "x") + fmt(", %.0f s", s));

  // 7
  bool ratio_ok = true, sigma_ok = true;
  double mode_c = 0.0, mode_i = 0.0, min_ratio = 1e9, min_sigma = 1e9;
  const auto prop_rows = rows_of("proposed");
  for (const auto* r : prop_rows) {
    const auto& e = r->eval;
    ratio_ok = ratio_ok && r->ok && e.entropy_ratio && *e.entropy_ratio > 1.0;
    if (e.entropy_ratio) min_ratio = std::min(min_ratio, *e.entropy_ratio);
    sigma_ok = sigma_ok && e.mean_sigma && *e.mean_sigma >= kSigmaFactor * tol::kSigmaFloor;
    if (e.mean_sigma) min_sigma = std::min(min_sigma, *e.mean_sigma);
    mode_c += e.mean_mode_correct.value_or(0.0) / static_cast<double>(prop_rows.size());
    mode_i += e.mean_mode_incorrect.value_or(1.0) / static_cast<double>(prop_rows.size());
  }
  report(7, ratio_ok && sigma_ok && mode_c > mode_i && !prop_rows.empty() ? Outcome::Pass : Outcome::Fail,
         fmt("min entropy ratio %.3f, mode prob correct %.3f vs incorrect %.3f, min mean sigma %.4f", min_ratio, mode_c,
             mode_i, min_sigma));

  // 8
  bool exact = true;
  for (const char* m : {"proposed", "binomial"})
    for (const auto* r : rows_of(m)) exact = exact && r->ok && r->eval.unimodal_rate && *r->eval.unimodal_rate == 1.0;
  double lowest_soft = 1.0;
  std::string lowest_method = "-";
  for (const char* m : {"dldl", "sord", "liu"})
    for (const auto* r : rows_of(m))
      if (r->ok && r->eval.unimodal_rate && *r->eval.unimodal_rate < lowest_soft) {
        lowest_soft = *r->eval.unimodal_rate;
        lowest_method = m;
      }
  report(8, exact && lowest_soft < 1.0 ? Outcome::Pass : Outcome::Fail,
         std::string("unimodal and binomial heads at 1.0: ") + (exact ? "yes" : "no") +
             fmt("; lowest soft-target unimodal rate %.4f", lowest_soft) + " (" + lowest_method + ")");

  // 9
  const auto second = bench::run_benchmark(cfg, ds, jobs);
  const bool same = bench::report_to_json(first).dump() == bench::report_to_json(second).dump();
  report(9, same ? Outcome::Pass : Outcome::Fail, same ? "repeat run is bit-identical" : "repeat run differs");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  if (which != "core" && which != "abalone" && which != "all") {
    std::fprintf(stderr, "usage: acceptance [core|abalone|all]\n");
    return 2;
  }
  if (which != "abalone") {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
  }
  if (which != "core") abalone_criteria();
  if (failures) return 1;
  return blocked ? 77 : 0;
}
