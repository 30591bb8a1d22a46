#pragma once

// Soft label distributions used by label-smoothing style ordinal methods.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "uniord/errors.hpp"
#include "uniord/nn.hpp"
#include "uniord/prob.hpp"

namespace uniord {

enum class SoftTargetKind { SquaredExp, LinearExp, DiracUniformLinearMix };

inline std::string_view to_string(SoftTargetKind k) {
  switch (k) {
    case SoftTargetKind::SquaredExp: return "squared_exp";
    case SoftTargetKind::LinearExp: return "linear_exp";
    case SoftTargetKind::DiracUniformLinearMix: return "mix";
  }
  return "?";
}

inline SoftTargetKind soft_target_kind_from_string(std::string_view s) {
  if (s == "squared_exp") return SoftTargetKind::SquaredExp;
  if (s == "linear_exp") return SoftTargetKind::LinearExp;
  if (s == "mix") return SoftTargetKind::DiracUniformLinearMix;
  throw ConfigError("unknown soft target kind '" + std::string(s) + "'");
}

struct SoftTargetSpec {
  SoftTargetKind kind = SoftTargetKind::LinearExp;
  double tau = 1.0;
  double w_dirac = 0.5, w_uniform = 0.1, w_exp = 0.4;  // mixture only

  void validate() const {
    if (!(tau > 0.0) || std::isnan(tau)) throw ConfigError("SoftTargetSpec: tau must be > 0");
    if (kind == SoftTargetKind::DiracUniformLinearMix) {
      if (w_dirac < 0.0 || w_uniform < 0.0 || w_exp < 0.0) throw ConfigError("SoftTargetSpec: negative mixture weight");
      if (std::abs(w_dirac + w_uniform + w_exp - 1.0) > 1e-9) throw ConfigError("SoftTargetSpec: mixture weights must sum to 1");
    }
  }
};

namespace detail {

inline std::vector<double> exp_decay(int k, int j, double tau, double power) {
  std::vector<double> w(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) w[static_cast<std::size_t>(i - 1)] = std::exp(-tau * std::pow(std::abs(i - j), power));
  return w;
}

}  // namespace detail

/// Target distribution over k classes for true class j.
inline ProbVector make_soft_target(const SoftTargetSpec& spec, int j, int k) {
  spec.validate();
  if (k < 2 || j < 1 || j > k) throw DomainError("make_soft_target: class out of range");
  switch (spec.kind) {
    case SoftTargetKind::SquaredExp: return ProbVector::normalized(detail::exp_decay(k, j, spec.tau, 2.0));
    case SoftTargetKind::LinearExp: return ProbVector::normalized(detail::exp_decay(k, j, spec.tau, 1.0));
    case SoftTargetKind::DiracUniformLinearMix: {
      const ProbVector lin = ProbVector::normalized(detail::exp_decay(k, j, spec.tau, 1.0));
      std::vector<double> p(static_cast<std::size_t>(k));
      for (int i = 1; i <= k; ++i)
        p[static_cast<std::size_t>(i - 1)] =
            (i == j ? spec.w_dirac : 0.0) + spec.w_uniform / k + spec.w_exp * lin.at_class(i);
      return ProbVector::normalized(std::move(p));
    }
  }
  throw ConfigError("make_soft_target: unhandled kind");
}

/// One target per class, indexed by class - 1.
inline std::vector<ProbVector> soft_target_table(const SoftTargetSpec& spec, int k) {
  std::vector<ProbVector> table;
  table.reserve(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) table.push_back(make_soft_target(spec, j, k));
  return table;
}

/// Trains a softmax classifier against soft targets with KL or transport loss.
inline nn::Mlp train_with_soft_targets(const nn::MlpSpec& model_spec, const LabeledSet& data,
                                       const SoftTargetSpec& spec, const nn::LossKind& loss,
                                       const nn::TrainConfig& cfg, nn::TrainingCurve* curve = nullptr) {
  if (model_spec.head.type != nn::HeadType::Softmax) throw ConfigError("soft targets require a softmax head");
  if (loss.type != nn::LossType::KLToSoftTarget && loss.type != nn::LossType::OptimalTransport)
    throw ConfigError("soft targets are trained with kl or ot loss");
  const auto table = soft_target_table(spec, model_spec.head.k);
  nn::Mlp model(model_spec);
  auto c = nn::train(model, data, loss, cfg, table);
  if (curve) *curve = std::move(c);
  return model;
}

}  // namespace uniord
