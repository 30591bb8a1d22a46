#pragma once

// Feedforward network with hand-written reverse mode, the output heads compared in the
// Abalone ablation, their losses, and an Adam trainer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uniord/constants.hpp"
#include "uniord/dataset.hpp"
#include "uniord/errors.hpp"
#include "uniord/prob.hpp"
#include "uniord/transport.hpp"
#include "uniord/unimodal_head.hpp"

namespace uniord::nn {

enum class Activation { ReLU, Tanh };

inline std::string_view to_string(Activation a) { return a == Activation::ReLU ? "relu" : "tanh"; }

inline Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

enum class HeadType { LinearRegression, Softmax, Unimodal, Binomial };

struct HeadKind {
  HeadType type = HeadType::Softmax;
  int k = 2;
  Family family = Family::Normal;  // Unimodal only

  static HeadKind regression(int k) { return {HeadType::LinearRegression, k, Family::Normal}; }
  static HeadKind softmax(int k) { return {HeadType::Softmax, k, Family::Normal}; }
  static HeadKind unimodal(int k, Family f = Family::Normal) { return {HeadType::Unimodal, k, f}; }
  static HeadKind binomial(int k) { return {HeadType::Binomial, k, Family::Normal}; }

  /// Width of the final linear layer feeding the head.
  int raw_dim() const {
    switch (type) {
      case HeadType::LinearRegression: return 1;
      case HeadType::Softmax: return k;
      case HeadType::Unimodal: return 2;
      case HeadType::Binomial: return 1;
    }
    return 0;
  }
  bool probabilistic() const { return type != HeadType::LinearRegression; }
  bool operator==(const HeadKind&) const = default;
};

inline std::string_view to_string(HeadType t) {
  switch (t) {
    case HeadType::LinearRegression: return "regression";
    case HeadType::Softmax: return "softmax";
    case HeadType::Unimodal: return "unimodal";
    case HeadType::Binomial: return "binomial";
  }
  return "?";
}

inline HeadType head_type_from_string(std::string_view s) {
  if (s == "regression") return HeadType::LinearRegression;
  if (s == "softmax") return HeadType::Softmax;
  if (s == "unimodal") return HeadType::Unimodal;
  if (s == "binomial") return HeadType::Binomial;
  throw ConfigError("unknown head '" + std::string(s) + "'");
}

enum class LossType { MSE, CrossEntropy, OptimalTransport, KLToSoftTarget };

struct LossKind {
  LossType type = LossType::OptimalTransport;
  double m = 1.0;  // ground-cost exponent, OptimalTransport only

  static LossKind mse() { return {LossType::MSE, 1.0}; }
  static LossKind cross_entropy() { return {LossType::CrossEntropy, 1.0}; }
  static LossKind optimal_transport(double m = 1.0) { return {LossType::OptimalTransport, m}; }
  static LossKind kl() { return {LossType::KLToSoftTarget, 1.0}; }
};

inline std::string_view to_string(LossType t) {
  switch (t) {
    case LossType::MSE: return "mse";
    case LossType::CrossEntropy: return "ce";
    case LossType::OptimalTransport: return "ot";
    case LossType::KLToSoftTarget: return "kl";
  }
  return "?";
}

inline LossType loss_type_from_string(std::string_view s) {
  if (s == "mse") return LossType::MSE;
  if (s == "ce") return LossType::CrossEntropy;
  if (s == "ot") return LossType::OptimalTransport;
  if (s == "kl") return LossType::KLToSoftTarget;
  throw ConfigError("unknown loss '" + std::string(s) + "'");
}

/// Throws ConfigError unless the loss can be applied to the head's output.
inline void check_compatible(const HeadKind& head, const LossKind& loss) {
  const bool regression = head.type == HeadType::LinearRegression;
  if (regression != (loss.type == LossType::MSE))
    throw ConfigError(std::string("loss '") + std::string(to_string(loss.type)) + "' cannot be used with head '" +
                      std::string(to_string(head.type)) + "'");
  if (loss.type == LossType::OptimalTransport) GroundCost{loss.m};
}

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden;
  Activation activation = Activation::ReLU;
  HeadKind head;
  std::uint64_t seed = 1;

  void validate() const {
    if (input_dim < 1) throw ConfigError("MlpSpec: input_dim must be >= 1");
    for (int w : hidden)
      if (w < 1) throw ConfigError("MlpSpec: hidden widths must be >= 1");
    if (head.k < 2) throw ConfigError("MlpSpec: head needs k >= 2");
  }
};

/// What the model emits for one input.
struct HeadOutput {
  std::optional<ProbVector> probs;      // probability heads
  double value = 0.0;                   // regression head
  std::optional<LocationScale> latent;  // unimodal head
};

/// Supervision for one item: the true class and, optionally, a soft target distribution.
struct Target {
  int cls = 1;
  const ProbVector* soft = nullptr;
};

namespace detail {

inline std::vector<double> binomial_probs(int k, double z) {
  // log pmf of Binomial(k - 1, sigmoid(z)) in a numerically safe form
  const double log_pi = -softplus(-z), log_1mpi = -softplus(z);
  std::vector<double> logp(static_cast<std::size_t>(k));
  double log_coeff = 0.0;
  const int n = k - 1;
  for (int i = 0; i <= n; ++i) {
    if (i > 0) log_coeff += std::log(static_cast<double>(n - i + 1)) - std::log(static_cast<double>(i));
    logp[static_cast<std::size_t>(i)] = log_coeff + i * log_pi + (n - i) * log_1mpi;
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  std::vector<double> p(logp.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logp[i] - mx);
  return p;
}

inline std::vector<double> softmax(std::span<const double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - mx);
  return p;
}

}  // namespace detail

/// Maps the final linear layer's output z to the head's prediction.
inline HeadOutput apply_head(const HeadKind& head, std::span<const double> z) {
  if (z.size() != static_cast<std::size_t>(head.raw_dim())) throw DomainError("apply_head: wrong raw output width");
  HeadOutput out;
  switch (head.type) {
    case HeadType::LinearRegression: out.value = z[0]; break;
    case HeadType::Softmax: out.probs = ProbVector::normalized(detail::softmax(z)); break;
    case HeadType::Binomial: out.probs = ProbVector::normalized(detail::binomial_probs(head.k, z[0])); break;
    case HeadType::Unimodal: {
      const LocationScale ls = location_scale_from_raw(head.family, z[0], z[1]);
      out.probs = head_probs(BinGrid(head.k), ls);
      out.latent = ls;
      break;
    }
  }
  return out;
}

/// Scalar loss of one prediction against one target.
inline double loss(const LossKind& kind, const HeadOutput& out, const Target& target) {
  if (kind.type == LossType::MSE) {
    if (out.probs) throw ConfigError("mse loss requires a regression output");
    const double d = out.value - target.cls;
    return d * d;
  }
  if (!out.probs) throw ConfigError(std::string(to_string(kind.type)) + " loss requires a probability output");
  const ProbVector& p = *out.probs;
  switch (kind.type) {
    case LossType::CrossEntropy: return -std::log(std::max(p.at_class(target.cls), tol::kLogClamp));
    case LossType::OptimalTransport:
      if (target.soft) {
        if (kind.m != 1.0) throw ConfigError("soft-target transport loss is defined for m = 1 only");
        return ot_cmf_l1(p, *target.soft);
      }
      return ot_dirac(p, target.cls, GroundCost{kind.m});
    case LossType::KLToSoftTarget: {
      if (!target.soft) return -std::log(std::max(p.at_class(target.cls), tol::kLogClamp));
      double total = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double t = (*target.soft)[i];
        if (t > 0.0) total += t * (std::log(t) - std::log(std::max(p[i], tol::kLogClamp)));
      }
      return total;
    }
    case LossType::MSE: break;
  }
  return 0.0;
}

namespace detail {

// dL/dp for the probability losses.
inline std::vector<double> loss_grad_probs(const LossKind& kind, const ProbVector& p, const Target& target) {
  std::vector<double> g(p.size(), 0.0);
  const auto y = static_cast<std::size_t>(target.cls - 1);
  switch (kind.type) {
    case LossType::CrossEntropy:
      if (p[y] > tol::kLogClamp) g[y] = -1.0 / p[y];
      break;
    case LossType::OptimalTransport:
      if (target.soft) return ot_cmf_l1_grad(p, *target.soft);
      return ot_dirac_grad(p.k(), target.cls, GroundCost{kind.m});
    case LossType::KLToSoftTarget:
      if (!target.soft) {
        if (p[y] > tol::kLogClamp) g[y] = -1.0 / p[y];
      } else {
        for (std::size_t i = 0; i < p.size(); ++i)
          if (p[i] > tol::kLogClamp) g[i] = -(*target.soft)[i] / p[i];
      }
      break;
    case LossType::MSE: throw ConfigError("mse loss requires a regression output");
  }
  return g;
}

}  // namespace detail

/// Loss and its gradient with respect to the raw head input z.
inline double loss_and_grad_raw(const HeadKind& head, const LossKind& kind, std::span<const double> z,
                                const Target& target, std::span<double> dz) {
  const HeadOutput out = apply_head(head, z);
  const double value = loss(kind, out, target);
  switch (head.type) {
    case HeadType::LinearRegression: dz[0] = 2.0 * (out.value - target.cls); break;
    case HeadType::Softmax: {
      const auto g = detail::loss_grad_probs(kind, *out.probs, target);
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += (*out.probs)[i] * g[i];
      for (std::size_t i = 0; i < g.size(); ++i) dz[i] = (*out.probs)[i] * (g[i] - dot);
      break;
    }
    case HeadType::Binomial: {
      const auto g = detail::loss_grad_probs(kind, *out.probs, target);
      // dp_i/dz = p_i (i - (k - 1) sigmoid(z)), i zero-based
      const double pi = sigmoid(z[0]);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        acc += g[i] * (*out.probs)[i] * (static_cast<double>(i) - (head.k - 1) * pi);
      dz[0] = acc;
      break;
    }
    case HeadType::Unimodal: {
      const auto g = detail::loss_grad_probs(kind, *out.probs, target);
      const HeadGradient hg = head_grad(BinGrid(head.k), *out.latent);
      double dmu = 0.0, dsigma = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        dmu += g[i] * hg.d_mu[i];
        dsigma += g[i] * hg.d_sigma[i];
      }
      dz[0] = dmu;
      dz[1] = dsigma * sigmoid(z[1]);  // d softplus / ds
      break;
    }
  }
  return value;
}

/// Class decision rule shared by every head.
inline int predict_class(const HeadKind& head, const HeadOutput& out) {
  if (out.probs) return argmax_class(*out.probs);
  // round half to even, then clamp into 1..k
  const double r = std::nearbyint(out.value);
  return static_cast<int>(std::clamp(r, 1.0, static_cast<double>(head.k)));
}

/// Fully connected network: hidden layers with a shared activation, then a linear layer into the head.
///
/// Parameters live in one flat array; layer l stores its weight matrix (out x in, row-major)
/// followed by its bias vector.
class Mlp {
public:
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    dims_.push_back(spec_.input_dim);
    for (int w : spec_.hidden) dims_.push_back(w);
    dims_.push_back(spec_.head.raw_dim());
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      offsets_.push_back(offset);
      offset += static_cast<std::size_t>(dims_[l + 1]) * (static_cast<std::size_t>(dims_[l]) + 1);
    }
    params_.assign(offset, 0.0);
    initialize(spec_.seed);
  }

  const MlpSpec& spec() const { return spec_; }
  const HeadKind& head() const { return spec_.head; }
  std::size_t num_layers() const { return offsets_.size(); }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }

  void set_params(std::span<const double> values) {
    if (values.size() != params_.size()) throw DomainError("Mlp::set_params: wrong parameter count");
    std::copy(values.begin(), values.end(), params_.begin());
  }

  /// Weight entries get weight decay; biases do not.
  std::vector<bool> decay_mask() const {
    std::vector<bool> mask(params_.size(), false);
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto n = static_cast<std::size_t>(dims_[l + 1]) * static_cast<std::size_t>(dims_[l]);
      std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(offsets_[l]), n, true);
    }
    return mask;
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
      const auto n = static_cast<std::size_t>(dims_[l + 1]) * (static_cast<std::size_t>(dims_[l]) + 1);
      for (std::size_t i = 0; i < n; ++i) params_[offsets_[l] + i] = (2.0 * unit(rng) - 1.0) * bound;
    }
  }

  std::vector<double> raw_output(std::span<const double> x) const {
    std::vector<std::vector<double>> acts;
    forward_pass(x, acts);
    return acts.back();
  }

  HeadOutput forward(std::span<const double> x) const { return apply_head(spec_.head, raw_output(x)); }

  int predict_class(std::span<const double> x) const { return nn::predict_class(spec_.head, forward(x)); }

  /// Adds d loss / d params for one item into grad and returns the loss.
  double accumulate_grad(std::span<const double> x, const Target& target, const LossKind& kind,
                         std::span<double> grad) const {
    std::vector<std::vector<double>> acts;
    forward_pass(x, acts);
    std::vector<double> delta(acts.back().size());
    const double value = loss_and_grad_raw(spec_.head, kind, acts.back(), target, delta);
    for (std::size_t l = num_layers(); l-- > 0;) {
      const auto in = static_cast<std::size_t>(dims_[l]);
      const auto out = static_cast<std::size_t>(dims_[l + 1]);
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + out * in;
      const std::vector<double>& a_in = acts[l];
      std::vector<double> prev(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        gb[o] += d;
        if (d == 0.0) continue;
        const double* wrow = w + o * in;
        double* grow = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          grow[i] += d * a_in[i];
          prev[i] += d * wrow[i];
        }
      }
      if (l == 0) break;
      // back through the hidden activation that produced acts[l]
      for (std::size_t i = 0; i < in; ++i) {
        const double a = a_in[i];
        prev[i] *= spec_.activation == Activation::ReLU ? (a > 0.0 ? 1.0 : 0.0) : (1.0 - a * a);
      }
      delta = std::move(prev);
    }
    return value;
  }

  /// Mean loss over the given rows (no weight decay term).
  double batch_loss(const LabeledSet& data, std::span<const std::size_t> rows, const LossKind& kind,
                    std::span<const ProbVector> soft_table = {}) const {
    double total = 0.0;
    for (std::size_t r : rows) total += loss(kind, forward(data.X.row(r)), make_target(data.y[r], soft_table));
    return total / static_cast<double>(rows.size());
  }

  static Target make_target(int cls, std::span<const ProbVector> soft_table) {
    return Target{cls, soft_table.empty() ? nullptr : &soft_table[static_cast<std::size_t>(cls - 1)]};
  }

private:
  static double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

  void forward_pass(std::span<const double> x, std::vector<std::vector<double>>& acts) const {
    if (x.size() != static_cast<std::size_t>(spec_.input_dim)) throw DomainError("Mlp: input width mismatch");
    for (double v : x)
      if (!std::isfinite(v)) throw DomainError("Mlp: non-finite input feature");
    acts.clear();
    acts.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto in = static_cast<std::size_t>(dims_[l]);
      const auto out = static_cast<std::size_t>(dims_[l + 1]);
      const double* w = params_.data() + offsets_[l];
      const double* b = w + out * in;
      const std::vector<double>& a = acts.back();
      std::vector<double> next(out);
      for (std::size_t o = 0; o < out; ++o) {
        double s = b[o];
        const double* wrow = w + o * in;
        for (std::size_t i = 0; i < in; ++i) s += wrow[i] * a[i];
        next[o] = s;
      }
      if (l + 1 < num_layers())
        for (double& v : next) v = spec_.activation == Activation::ReLU ? std::max(v, 0.0) : std::tanh(v);
      acts.push_back(std::move(next));
    }
  }

  MlpSpec spec_;
  std::vector<int> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int lr_decay_epochs = 100;
  double lr_decay_factor = 0.1;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;

  void validate() const {
    if (epochs < 1 || batch_size < 1 || lr_decay_epochs < 1) throw ConfigError("TrainConfig: counts must be >= 1");
    if (!(learning_rate >= 0.0) || !(lr_decay_factor > 0.0) || !(weight_decay >= 0.0))
      throw ConfigError("TrainConfig: rates must be non-negative");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("TrainConfig: betas must lie in (0, 1)");
  }

  /// Step decay: lr * factor^(floor(epoch / decay_epochs)).
  double lr_at(int epoch) const { return learning_rate * std::pow(lr_decay_factor, epoch / lr_decay_epochs); }
};

/// Adam with L2 weight decay added to the gradient of masked parameters.
class Adam {
public:
  Adam(std::size_t n, const TrainConfig& cfg, std::vector<bool> decay_mask)
      : cfg_(cfg), m_(n, 0.0), v_(n, 0.0), mask_(std::move(decay_mask)) {}

  void step(std::span<double> params, std::span<const double> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      double g = grad[i];
      if (!mask_.empty() && mask_[i]) g += cfg_.weight_decay * params[i];
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.adam_eps);
    }
  }

  long steps() const { return t_; }

private:
  TrainConfig cfg_;
  std::vector<double> m_, v_;
  std::vector<bool> mask_;
  long t_ = 0;
};

/// One Adam update on the mean loss of the given rows. Returns the batch loss.
inline double backward_step(Mlp& model, const LabeledSet& data, std::span<const std::size_t> rows,
                            const LossKind& kind, Adam& opt, double lr, std::span<const ProbVector> soft_table = {}) {
  if (rows.empty()) throw DomainError("backward_step: empty batch");
  std::vector<double> grad(model.params().size(), 0.0);
  double total = 0.0;
  for (std::size_t r : rows) total += model.accumulate_grad(data.X.row(r), Mlp::make_target(data.y[r], soft_table), kind, grad);
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad) g *= scale;
  const double mean = total * scale;
  if (!std::isfinite(mean)) throw TrainingError("backward_step: loss became non-finite");
  for (double g : grad)
    if (!std::isfinite(g)) throw TrainingError("backward_step: gradient became non-finite");
  opt.step(model.params(), grad, lr);
  return mean;
}

/// Deterministic Fisher-Yates shuffle driven by a 64-bit Mersenne twister.
inline void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

/// Mean training loss per epoch.
using TrainingCurve = std::vector<double>;

/// Mini-batch Adam training. Soft targets, when given, are indexed by class - 1.
inline TrainingCurve train(Mlp& model, const LabeledSet& data, const LossKind& kind, const TrainConfig& cfg,
                           std::span<const ProbVector> soft_table = {}) {
  cfg.validate();
  data.check();
  check_compatible(model.head(), kind);
  if (data.size() == 0) throw DomainError("train: empty training set");
  if (data.k != model.head().k) throw ConfigError("train: dataset k differs from head k");

  Adam opt(model.params().size(), cfg, model.decay_mask());
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainingCurve curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs));
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    const double lr = cfg.lr_at(epoch);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t n = std::min(bs, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, n);
      weighted += backward_step(model, data, batch, kind, opt, lr, soft_table) * static_cast<double>(n);
    }
    curve.push_back(weighted / static_cast<double>(order.size()));
  }
  return curve;
}

}  // namespace uniord::nn
