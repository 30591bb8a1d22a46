#pragma once

// Randomized property and oracle suites. Shared by the CLI `verify` command and the test suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uniord/constants.hpp"
#include "uniord/data.hpp"
#include "uniord/metrics.hpp"
#include "uniord/nn.hpp"
#include "uniord/pom.hpp"
#include "uniord/prob.hpp"
#include "uniord/soft_targets.hpp"
#include "uniord/transport.hpp"
#include "uniord/unimodal_head.hpp"

namespace uniord::verify {

struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string first_failure;

  explicit SuiteResult(std::string n) : name(std::move(n)) {}

  bool passed() const { return checks > 0 && failures == 0; }

  void check(bool ok, const std::function<std::string()>& describe) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first_failure = describe();
  }
};

/// Per-suite sample counts. `full()` uses the sizes required for release acceptance.
struct Budget {
  int lemma_draws = 100000;
  int ot_draws = 10000;
  int grad_probes = 100;
  int search_trials = 10000;
  int generic = 2000;

  static Budget full() { return {}; }
  static Budget quick() { return {5000, 1000, 100, 10000, 300}; }
};

/// |a - b| relative to the larger magnitude, with a floor for near-zero derivatives.
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

namespace detail {

inline std::string fmt(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(17);
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  out << ']';
  return out.str();
}

inline ProbVector random_simplex(std::mt19937_64& rng, int k, bool sparse = false) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(0.3);
  std::vector<double> w(static_cast<std::size_t>(k));
  for (double& x : w) x = (sparse && zero(rng)) ? 0.0 : e(rng);
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
  return ProbVector::normalized(std::move(w));
}

inline Family random_family(std::mt19937_64& rng) {
  static constexpr Family all[] = {Family::Normal, Family::Logistic, Family::Cauchy};
  return all[std::uniform_int_distribution<int>(0, 2)(rng)];
}

}  // namespace detail

// ---- prob-core ----------------------------------------------------------------

inline SuiteResult prob_core_properties(const Budget& b, std::uint64_t seed = 11) {
  SuiteResult r{"prob-core invariants"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(2, 20);
  for (int t = 0; t < b.generic; ++t) {
    const int k = kd(rng);
    const ProbVector p = detail::random_simplex(rng, k, t % 2 == 0);
    r.check(is_unimodal(p) == is_unimodal(p.reversed()), [&] { return "reversal changes is_unimodal for " + detail::fmt(p.vec()); });
    const auto c = cmf(p);
    bool mono = true;
    for (std::size_t i = 1; i < c.size(); ++i) mono = mono && c[i] >= c[i - 1];
    r.check(mono && std::abs(c.back() - 1.0) <= tol::kSumToOne, [&] { return "cmf not monotone to 1 for " + detail::fmt(p.vec()); });
    const double h = entropy(p);
    r.check(h >= 0.0 && h <= std::log(static_cast<double>(k)) + 1e-12, [&] { return "entropy out of range for " + detail::fmt(p.vec()); });
  }
  return r;
}

// ---- unimodal head --------------------------------------------------------------

/// Random (family, mu, sigma, k) draws; every head output must be unimodal.
inline SuiteResult lemma1_fuzz(const Budget& b, std::uint64_t seed = 1) {
  SuiteResult r{"unimodal head fuzz"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(-3.0, 3.0), log_sigma(std::log(tol::kSigmaFloor), std::log(10.0));
  std::uniform_int_distribution<int> kd(2, 20);
  for (int t = 0; t < b.lemma_draws; ++t) {
    const Family f = detail::random_family(rng);
    const double m = mu(rng), s = std::exp(log_sigma(rng));
    const int k = kd(rng);
    const ProbVector p = head_probs(BinGrid(k), LocationScale(f, m, s));
    r.check(is_unimodal(p), [&] {
      std::ostringstream o;
      o.precision(17);
      o << to_string(f) << " mu=" << m << " sigma=" << s << " k=" << k << " -> " << detail::fmt(p.vec());
      return o.str();
    });
  }
  return r;
}

/// Sub-bin inequalities around the bin holding mu, checked by quadrature.
inline SuiteResult lemma1_subbin(const Budget& b, std::uint64_t seed = 2) {
  SuiteResult r{"sub-bin mass inequalities"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(-0.999, 0.999), log_sigma(std::log(tol::kSigmaFloor), std::log(10.0));
  std::uniform_int_distribution<int> kd(2, 20);
  const int n = std::max(50, b.generic / 10);
  for (int t = 0; t < n; ++t) {
    const Family f = detail::random_family(rng);
    const int k = kd(rng);
    const BinGrid grid(k);
    const double m = mu(rng), s = std::exp(log_sigma(rng));
    const bool on_edge = std::any_of(grid.edges().begin(), grid.edges().end(), [&](double e) { return e == m; });
    if (on_edge) continue;
    const LocationScale ls(f, m, s);
    r.check(verify_lemma1_inequalities(grid, ls), [&] {
      std::ostringstream o;
      o.precision(17);
      o << to_string(f) << " mu=" << m << " sigma=" << s << " k=" << k;
      return o.str();
    });
  }
  return r;
}

inline SuiteResult head_limits(const Budget& b, std::uint64_t seed = 3) {
  SuiteResult r{"unimodal head limits"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(2, 20);
  for (int t = 0; t < std::max(20, b.generic / 20); ++t) {
    const Family f = detail::random_family(rng);
    const int k = kd(rng);
    const BinGrid grid(k);
    const double s = std::exp(std::uniform_real_distribution<double>(std::log(0.02), std::log(5.0))(rng));
    int prev = 1;
    bool mono = true;
    for (int i = 0; i <= 400; ++i) {
      const double m = -1.5 + 3.0 * i / 400.0;
      const int c = argmax_class(head_probs(grid, LocationScale(f, m, s)));
      mono = mono && c >= prev;
      prev = c;
    }
    r.check(mono, [&] { return std::string(to_string(f)) + ": mode not monotone in mu, k=" + std::to_string(k); });

    const ProbVector flat = head_probs(grid, LocationScale(f, std::uniform_real_distribution<double>(-1, 1)(rng), 1e4));
    double dev = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) dev = std::max(dev, std::abs(flat[i] - 1.0 / k));
    r.check(dev < 1e-3, [&] { return "wide scale not uniform, deviation " + std::to_string(dev); });
  }
  // Narrowest scale with mu at a bin centre. Heavy Cauchy tails need bins of width >= 0.25 here.
  for (Family f : {Family::Normal, Family::Logistic, Family::Cauchy}) {
    const int kmax = f == Family::Cauchy ? 8 : 20;
    for (int k = 2; k <= kmax; ++k) {
      const BinGrid grid(k);
      for (int i = 1; i <= k; ++i) {
        const double centre = 0.5 * (grid.edge(i - 1) + grid.edge(i));
        const ProbVector p = head_probs(grid, LocationScale(f, centre, tol::kSigmaFloor));
        r.check(p.at_class(i) > 0.99, [&] {
          return std::string(to_string(f)) + " k=" + std::to_string(k) + " bin " + std::to_string(i) + " holds " +
                 std::to_string(p.at_class(i));
        });
      }
    }
  }
  return r;
}

inline SuiteResult head_gradient(const Budget& b, std::uint64_t seed = 4) {
  SuiteResult r{"unimodal head gradient"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(-1.5, 1.5), log_sigma(std::log(0.05), std::log(5.0));
  std::uniform_int_distribution<int> kd(2, 12);
  for (int t = 0; t < b.generic / 4; ++t) {
    const Family f = detail::random_family(rng);
    const int k = kd(rng);
    const BinGrid grid(k);
    const double m = mu(rng), s = std::exp(log_sigma(rng)), h = 1e-6;
    const HeadGradient g = head_grad(grid, LocationScale(f, m, s));
    const ProbVector pm = head_probs(grid, LocationScale(f, m + h, s)), mm = head_probs(grid, LocationScale(f, m - h, s));
    const ProbVector ps = head_probs(grid, LocationScale(f, m, s + h)), ms = head_probs(grid, LocationScale(f, m, s - h));
    double worst = 0.0;
    for (std::size_t i = 0; i < pm.size(); ++i) {
      worst = std::max(worst, rel_error(g.d_mu[i], (pm[i] - mm[i]) / (2 * h), 1e-4));
      worst = std::max(worst, rel_error(g.d_sigma[i], (ps[i] - ms[i]) / (2 * h), 1e-4));
    }
    r.check(worst < 1e-5, [&] { return "head_grad relative error " + std::to_string(worst); });
  }
  return r;
}

// ---- transport -----------------------------------------------------------------

inline SuiteResult ot_dirac_oracle(const Budget& b, std::uint64_t seed = 5) {
  SuiteResult r{"transport to a point mass vs exact oracle"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(2, 8);
  for (int t = 0; t < b.ot_draws; ++t) {
    const int k = kd(rng);
    const int j = std::uniform_int_distribution<int>(1, k)(rng);
    const GroundCost cost(t % 2 == 0 ? 1.0 : 2.0);
    const ProbVector q = detail::random_simplex(rng, k, t % 3 == 0);
    const double fast = ot_dirac(q, j, cost);
    const double exact = ot_lp_oracle(ProbVector::one_hot(k, j), q, cost).first;
    r.check(std::abs(fast - exact) <= 1e-9, [&] { return "q=" + detail::fmt(q.vec()) + " j=" + std::to_string(j); });
  }
  return r;
}

inline SuiteResult ot_cmf_oracle(const Budget& b, std::uint64_t seed = 6) {
  SuiteResult r{"cumulative-mass distance vs exact oracle"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(2, 8);
  for (int t = 0; t < b.ot_draws; ++t) {
    const int k = kd(rng);
    const ProbVector p = detail::random_simplex(rng, k, t % 3 == 0), q = detail::random_simplex(rng, k, t % 5 == 0);
    const double fast = ot_cmf_l1(p, q);
    const double exact = ot_lp_oracle(p, q, GroundCost(1.0)).first;
    r.check(std::abs(fast - exact) <= 1e-9, [&] { return "p=" + detail::fmt(p.vec()) + " q=" + detail::fmt(q.vec()); });
    r.check(ot_cmf_l1(p, q) == ot_cmf_l1(q, p), [&] { return "asymmetric for p=" + detail::fmt(p.vec()); });
    r.check(ot_cmf_l1(p, p) == 0.0, [&] { return "nonzero self distance for " + detail::fmt(p.vec()); });
    double diff = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) diff = std::max(diff, std::abs(p[i] - q[i]));
    if (diff > 1e-6) r.check(fast > 1e-9, [&] { return "zero distance between distinct vectors"; });
  }
  return r;
}

inline SuiteResult ot_dirac_gradient(const Budget& b, std::uint64_t seed = 7) {
  SuiteResult r{"transport gradient"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(2, 8);
  for (int t = 0; t < b.generic; ++t) {
    const int k = kd(rng), j = std::uniform_int_distribution<int>(1, k)(rng);
    const GroundCost cost(t % 2 == 0 ? 1.0 : 2.0);
    const auto g = ot_dirac_grad(k, j, cost);
    const ProbVector q = detail::random_simplex(rng, k);
    // The cost is linear in q; perturb single coordinates of the unnormalized sum.
    const auto value = [&](const std::vector<double>& v) {
      double s = 0.0;
      for (int i = 1; i <= k; ++i) s += v[static_cast<std::size_t>(i - 1)] * cost(i, j);
      return s;
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      auto up = q.vec(), dn = q.vec();
      up[i] += 1e-6;
      dn[i] -= 1e-6;
      worst = std::max(worst, rel_error(g[i], (value(up) - value(dn)) / 2e-6, 1.0));
    }
    r.check(worst < 1e-6 && std::abs(value(q.vec()) - ot_dirac(q, j, cost)) < 1e-12,
            [&] { return "gradient error " + std::to_string(worst); });
  }
  return r;
}

// ---- network pipelines -----------------------------------------------------------

struct Pipeline {
  std::string name;
  nn::HeadKind head;
  nn::LossKind loss;
  std::optional<SoftTargetSpec> soft;
};

/// Every head x loss combination trained by the benchmark grid.
inline std::vector<Pipeline> benchmark_pipelines(int k = 5) {
  using nn::HeadKind;
  using nn::LossKind;
  using nn::LossType;
  return {
      {"regression/mse", HeadKind::regression(k), LossKind{LossType::MSE}, std::nullopt},
      {"softmax/ce", HeadKind::softmax(k), LossKind{LossType::CrossEntropy}, std::nullopt},
      {"softmax/ot", HeadKind::softmax(k), LossKind{LossType::OptimalTransport, 1.0}, std::nullopt},
      {"softmax/ot-m2", HeadKind::softmax(k), LossKind{LossType::OptimalTransport, 2.0}, std::nullopt},
      {"unimodal-normal/ce", HeadKind::unimodal(k, Family::Normal), LossKind{LossType::CrossEntropy}, std::nullopt},
      {"unimodal-normal/ot", HeadKind::unimodal(k, Family::Normal), LossKind{LossType::OptimalTransport, 1.0}, std::nullopt},
      {"unimodal-logistic/ot", HeadKind::unimodal(k, Family::Logistic), LossKind{LossType::OptimalTransport, 1.0}, std::nullopt},
      {"unimodal-cauchy/ot", HeadKind::unimodal(k, Family::Cauchy), LossKind{LossType::OptimalTransport, 1.0}, std::nullopt},
      {"binomial/ot", HeadKind::binomial(k), LossKind{LossType::OptimalTransport, 1.0}, std::nullopt},
      {"softmax/kl squared_exp", HeadKind::softmax(k), LossKind{LossType::KLToSoftTarget},
       SoftTargetSpec{SoftTargetKind::SquaredExp, 1.0}},
      {"softmax/kl linear_exp", HeadKind::softmax(k), LossKind{LossType::KLToSoftTarget},
       SoftTargetSpec{SoftTargetKind::LinearExp, 1.0}},
      {"softmax/ot mix", HeadKind::softmax(k), LossKind{LossType::OptimalTransport, 1.0},
       SoftTargetSpec{SoftTargetKind::DiracUniformLinearMix, 1.0}},
  };
}

/// Central finite differences on random parameters of a random 8-8 tanh network, one probe per coordinate.
inline SuiteResult pipeline_gradient(const Pipeline& pl, const Budget& b, std::uint64_t seed = 8) {
  SuiteResult r{"gradient check " + pl.name};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  nn::MlpSpec spec{8, {8}, nn::Activation::Tanh, pl.head, seed};
  std::vector<ProbVector> table;
  if (pl.soft) table = soft_target_table(*pl.soft, pl.head.k);
  int probes = 0;
  for (int net = 0; probes < b.grad_probes; ++net) {
    spec.seed = seed + static_cast<std::uint64_t>(net);
    nn::Mlp model(spec);
    std::vector<double> x(8);
    for (double& v : x) v = gauss(rng);
    const int cls = std::uniform_int_distribution<int>(1, pl.head.k)(rng);
    const nn::Target target = nn::Mlp::make_target(cls, table);
    std::vector<double> grad(model.params().size(), 0.0);
    model.accumulate_grad(x, target, pl.loss, grad);
    std::vector<double> theta(model.params().begin(), model.params().end());
    const auto at = [&](std::size_t i, double delta) {
      auto t2 = theta;
      t2[i] += delta;
      model.set_params(t2);
      return nn::loss(pl.loss, model.forward(x), target);
    };
    for (int probe = 0; probe < 25 && probes < b.grad_probes; ++probe, ++probes) {
      const auto i = std::uniform_int_distribution<std::size_t>(0, theta.size() - 1)(rng);
      const double h = 1e-5;
      const double fd = (at(i, h) - at(i, -h)) / (2 * h);
      const double err = rel_error(grad[i], fd);
      r.check(err < 1e-4, [&] {
        std::ostringstream o;
        o.precision(10);
        o << "param " << i << ": analytic " << grad[i] << " vs numeric " << fd << " (rel " << err << ")";
        return o.str();
      });
    }
    model.set_params(theta);
  }
  return r;
}

inline SuiteResult binomial_unimodal(const Budget& b, std::uint64_t seed = 9) {
  SuiteResult r{"binomial head unimodality"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pd(1e-6, 1.0 - 1e-6);
  std::uniform_int_distribution<int> kd(2, 20);
  for (int t = 0; t < b.generic; ++t) {
    const double p = pd(rng);
    const int k = kd(rng);
    const std::vector<double> z{std::log(p) - std::log1p(-p)};
    const auto out = nn::apply_head(nn::HeadKind::binomial(k), z);
    r.check(is_unimodal(*out.probs), [&] { return "p=" + std::to_string(p) + " k=" + std::to_string(k); });
  }
  return r;
}

struct SoftmaxWitness {
  std::uint64_t net_seed = 0;
  std::vector<double> x;
  std::vector<double> probs;
};

/// Random networks and inputs until a softmax output with two separate peaks appears.
inline std::optional<SoftmaxWitness> find_softmax_non_unimodal(int k, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t net_seed = seed * 1000003ULL + static_cast<std::uint64_t>(t);
    const nn::Mlp model(nn::MlpSpec{4, {8}, nn::Activation::ReLU, nn::HeadKind::softmax(k), net_seed});
    std::vector<double> x(4);
    for (double& v : x) v = gauss(rng);
    const auto out = model.forward(x);
    if (!is_unimodal(*out.probs)) return SoftmaxWitness{net_seed, x, out.probs->vec()};
  }
  return std::nullopt;
}

inline SuiteResult non_unimodal_search(const Budget& b) {
  SuiteResult r{"non-unimodal outputs from unconstrained models"};
  for (int k : {4, 5, 8}) {
    const auto w = pom::find_non_unimodal(k, b.search_trials, 2024);
    r.check(w.has_value(), [&] { return "no proportional-odds witness for k=" + std::to_string(k); });
  }
  const auto s = find_softmax_non_unimodal(5, b.search_trials, 7);
  r.check(s.has_value(), [&] { return std::string("no softmax witness"); });
  return r;
}

/// Two outputs with identical cross-entropy but different transport cost.
inline SuiteResult ce_invariance_witness() {
  SuiteResult r{"cross-entropy invariance witness"};
  const nn::HeadOutput a{ProbVector({0.5, 0.2, 0.3}), 0.0, std::nullopt};
  const nn::HeadOutput b{ProbVector({0.5, 0.3, 0.2}), 0.0, std::nullopt};
  const nn::Target y{1, nullptr};
  const double ce_a = nn::loss(nn::LossKind{nn::LossType::CrossEntropy}, a, y);
  const double ce_b = nn::loss(nn::LossKind{nn::LossType::CrossEntropy}, b, y);
  const double ot_a = nn::loss(nn::LossKind{nn::LossType::OptimalTransport, 1.0}, a, y);
  const double ot_b = nn::loss(nn::LossKind{nn::LossType::OptimalTransport, 1.0}, b, y);
  r.check(std::abs(ce_a - ce_b) <= 1e-12, [&] { return "cross-entropy differs"; });
  r.check(std::abs(ot_a - 0.8) <= 1e-12 && std::abs(ot_b - 0.7) <= 1e-12, [&] { return "transport costs not 0.8 / 0.7"; });
  r.check(std::abs((ot_a - ot_b) - 0.1) <= 1e-12, [&] { return "transport difference not 0.1"; });
  return r;
}

/// Two separable blobs; a softmax network trained with transport loss must fit them.
inline SuiteResult separable_training() {
  SuiteResult r{"separable toy training"};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.3);
  LabeledSet data;
  data.k = 2;
  for (int i = 0; i < 200; ++i) {
    const int cls = 1 + i % 2;
    const double c = cls == 1 ? -2.0 : 2.0;
    data.X.append_row(std::vector<double>{c + noise(rng), c + noise(rng)});
    data.y.push_back(cls);
  }
  nn::Mlp model(nn::MlpSpec{2, {8}, nn::Activation::ReLU, nn::HeadKind::softmax(2), 5});
  nn::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-2;
  const auto curve = nn::train(model, data, nn::LossKind{nn::LossType::OptimalTransport, 1.0}, cfg);
  r.check(curve.back() < 0.05, [&] { return "final training loss " + std::to_string(curve.back()); });
  return r;
}

// ---- proportional odds ------------------------------------------------------------

inline SuiteResult pom_properties(const Budget& b, std::uint64_t seed = 12) {
  SuiteResult r{"proportional-odds invariants"};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int t = 0; t < b.generic; ++t) {
    const int k = std::uniform_int_distribution<int>(2, 10)(rng);
    const pom::detail::Reparam rp{k, 3};
    std::vector<double> theta(rp.size());
    for (double& v : theta) v = gauss(rng) * 3.0;
    const pom::PomParams p = rp.unpack(theta);
    bool increasing = true;
    for (std::size_t j = 1; j < p.alpha.size(); ++j) increasing = increasing && p.alpha[j] > p.alpha[j - 1];
    r.check(increasing, [&] { return "thresholds not increasing: " + detail::fmt(p.alpha); });
    std::vector<double> x(3);
    for (double& v : x) v = gauss(rng) * 5.0;
    const ProbVector probs = pom::pom_class_probs(p, x);
    double s = 0.0;
    for (double v : probs.values()) s += v;
    r.check(std::abs(s - 1.0) <= tol::kSumToOne, [&] { return "probabilities sum to " + std::to_string(s); });
  }

  // Log-likelihood history of a small fit is non-decreasing.
  LabeledSet data;
  data.k = 4;
  std::uniform_real_distribution<double> unit(1e-12, 1.0 - 1e-12);
  const auto noise = [&](std::mt19937_64& g) {
    const double v = unit(g);
    return std::log(v / (1.0 - v));
  };
  for (int i = 0; i < 500; ++i) {
    const double x0 = gauss(rng) / 2.0, x1 = gauss(rng) / 2.0;
    const double latent = 1.0 * x0 - 0.5 * x1 + noise(rng);
    const int cls = latent < -1.0 ? 1 : latent < 0.0 ? 2 : latent < 1.5 ? 3 : 4;
    data.X.append_row(std::vector<double>{x0, x1});
    data.y.push_back(cls);
  }
  pom::FitOptions opts;
  opts.max_iterations = 400;
  const auto fit = pom::pom_fit(data, opts);
  bool monotone = true;
  for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
    monotone = monotone && fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-10;
  r.check(monotone, [&] { return std::string("log-likelihood decreased during fitting"); });
  return r;
}

// ---- soft targets, data, metrics ----------------------------------------------------

inline SuiteResult soft_target_properties() {
  SuiteResult r{"soft target invariants"};
  for (SoftTargetKind kind : {SoftTargetKind::SquaredExp, SoftTargetKind::LinearExp, SoftTargetKind::DiracUniformLinearMix}) {
    for (double tau : {0.25, 1.0, 3.0}) {
      SoftTargetSpec spec{kind, tau};
      for (int k = 2; k <= 12; ++k) {
        for (int j = 1; j <= k; ++j) {
          const ProbVector t = make_soft_target(spec, j, k);
          r.check(is_unimodal(t) && argmax_class(t) == j, [&] {
            return std::string(to_string(kind)) + " k=" + std::to_string(k) + " j=" + std::to_string(j);
          });
          const ProbVector mirror = make_soft_target(spec, k + 1 - j, k).reversed();
          double dev = 0.0;
          for (std::size_t i = 0; i < t.size(); ++i) dev = std::max(dev, std::abs(t[i] - mirror[i]));
          r.check(dev <= 1e-15, [&] { return std::string(to_string(kind)) + " not symmetric"; });
        }
      }
    }
  }
  return r;
}

inline SuiteResult data_properties(const Budget& b, std::uint64_t seed = 13) {
  SuiteResult r{"data preparation invariants"};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(5.0, 3.0);
  LabeledSet set;
  set.k = 3;
  for (int i = 0; i < 120; ++i) {
    set.X.append_row(std::vector<double>{gauss(rng), gauss(rng) * 10.0, 1.0});
    set.y.push_back(1 + i % 3);
  }
  const auto idx = data::split(set, data::SplitSpec{});
  const auto scaler = data::Standardizer::fit(set.X, idx.train);
  const Matrix back = scaler.invert(scaler.apply(set.X));
  double dev = 0.0;
  for (std::size_t i = 0; i < set.X.rows(); ++i)
    for (std::size_t c = 0; c < set.X.cols(); ++c) dev = std::max(dev, std::abs(back(i, c) - set.X(i, c)));
  r.check(dev <= 1e-9, [&] { return "standardizer round trip error " + std::to_string(dev); });

  // Changing held-out rows must not move the fitted statistics.
  LabeledSet perturbed = set;
  for (std::size_t i : idx.test) perturbed.X(i, 0) += 1e6;
  const auto scaler2 = data::Standardizer::fit(perturbed.X, idx.train);
  r.check(scaler2.mean == scaler.mean && scaler2.stddev == scaler.stddev, [&] { return std::string("test rows leak into scaling"); });

  std::uniform_int_distribution<int> ring(-5, 40);
  for (int t = 0; t < b.generic; ++t) {
    std::vector<int> rings{ring(rng), ring(rng)};
    std::sort(rings.begin(), rings.end());
    const auto labels = data::bin_rings(rings, data::default_ring_edges()).labels;
    r.check(labels[0] <= labels[1], [&] { return "binning not monotone at " + std::to_string(rings[0]); });
  }
  return r;
}

inline SuiteResult metric_properties(const Budget& b, std::uint64_t seed = 14) {
  SuiteResult r{"metric invariants"};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (const auto& head : {nn::HeadKind::unimodal(6), nn::HeadKind::unimodal(6, Family::Cauchy), nn::HeadKind::binomial(6)}) {
    std::vector<metrics::Prediction> preds;
    std::vector<int> truth;
    for (int t = 0; t < b.generic / 4; ++t) {
      std::vector<double> z(static_cast<std::size_t>(head.raw_dim()));
      for (double& v : z) v = gauss(rng);
      auto out = nn::apply_head(head, z);
      preds.push_back({nn::predict_class(head, out), out.probs, std::nullopt});
      truth.push_back(std::uniform_int_distribution<int>(1, 6)(rng));
    }
    const auto e = metrics::summarize(preds, truth);
    r.check(e.unimodal_rate && *e.unimodal_rate == 1.0, [&] { return std::string(nn::to_string(head.type)) + " head unimodal rate below 1"; });
    r.check(e.mode_hist_correct.total() == e.n_correct && e.mode_hist_incorrect.total() == e.n - e.n_correct,
            [&] { return std::string("histogram mass not conserved"); });
  }
  std::uniform_int_distribution<int> cls(1, 8);
  for (int t = 0; t < b.generic / 10; ++t) {
    std::vector<int> p(20), y(20), pr(20), yr(20);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = cls(rng);
      y[i] = cls(rng);
      pr[i] = 9 - p[i];
      yr[i] = 9 - y[i];
    }
    r.check(metrics::mae(p, y) == metrics::mae(pr, yr), [&] { return std::string("mae changes under class reversal"); });
  }
  return r;
}

/// All suites in a fixed order.
inline std::vector<SuiteResult> run_all(const Budget& b) {
  std::vector<SuiteResult> out;
  out.push_back(prob_core_properties(b));
  out.push_back(lemma1_fuzz(b));
  out.push_back(lemma1_subbin(b));
  out.push_back(head_limits(b));
  out.push_back(head_gradient(b));
  out.push_back(ot_dirac_oracle(b));
  out.push_back(ot_cmf_oracle(b));
  out.push_back(ot_dirac_gradient(b));
  for (const auto& pl : benchmark_pipelines()) out.push_back(pipeline_gradient(pl, b));
  out.push_back(binomial_unimodal(b));
  out.push_back(non_unimodal_search(b));
  out.push_back(ce_invariance_witness());
  out.push_back(separable_training());
  out.push_back(pom_properties(b));
  out.push_back(soft_target_properties());
  out.push_back(data_properties(b));
  out.push_back(metric_properties(b));
  return out;
}

}  // namespace uniord::verify
