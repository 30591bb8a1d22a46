#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <span>
#include <vector>

#include "uniord/dataset.hpp"
#include "uniord/errors.hpp"
#include "uniord/prob.hpp"

namespace uniord::metrics {

inline constexpr std::size_t kHistogramBins = 20;

/// Fixed 20-bin histogram over [0, 1]; the last bin is closed.
struct Histogram {
  std::array<std::size_t, kHistogramBins> counts{};

  void add(double v) {
    auto b = static_cast<std::size_t>(std::floor(v * kHistogramBins));
    if (b >= kHistogramBins) b = kHistogramBins - 1;
    ++counts[b];
  }
  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
  static double bin_lower(std::size_t b) { return static_cast<double>(b) / kHistogramBins; }
};

struct EvalResult {
  std::size_t n = 0;
  std::size_t n_correct = 0;
  double mae = 0.0;
  std::optional<double> unimodal_rate;         // absent for point-prediction models
  std::optional<double> entropy_ratio;         // needs both correct and incorrect items
  std::optional<double> mean_entropy_correct;
  std::optional<double> mean_entropy_incorrect;
  std::optional<double> mean_mode_correct;     // mean of max_i p_i
  std::optional<double> mean_mode_incorrect;
  std::optional<double> mean_sigma;            // unimodal head only
  Histogram mode_hist_correct, mode_hist_incorrect;
};

/// Mean absolute difference of class indices.
inline double mae(std::span<const int> preds, std::span<const int> truth) {
  if (preds.size() != truth.size()) throw DomainError("mae: length mismatch");
  if (preds.empty()) throw DomainError("mae: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) total += std::abs(preds[i] - truth[i]);
  return total / static_cast<double>(preds.size());
}

/// One model output: predicted class plus, for probabilistic models, the distribution.
struct Prediction {
  int cls = 1;
  std::optional<ProbVector> probs;
  std::optional<double> sigma;
};

/// Aggregates per-item predictions into the evaluation record. Sums run in item order.
inline EvalResult summarize(std::span<const Prediction> preds, std::span<const int> truth) {
  if (preds.empty()) throw DomainError("evaluate: empty split");
  if (preds.size() != truth.size()) throw DomainError("evaluate: prediction/label count mismatch");
  EvalResult r;
  r.n = preds.size();
  std::vector<int> cls(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) cls[i] = preds[i].cls;
  r.mae = mae(cls, truth);

  std::size_t n_prob = 0, n_unimodal = 0, n_sigma = 0, n_inc = 0;
  double h_cor = 0.0, h_inc = 0.0, m_cor = 0.0, m_inc = 0.0, sigma_sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool correct = preds[i].cls == truth[i];
    if (correct) ++r.n_correct; else ++n_inc;
    if (preds[i].sigma) {
      sigma_sum += *preds[i].sigma;
      ++n_sigma;
    }
    if (!preds[i].probs) continue;
    const ProbVector& p = *preds[i].probs;
    ++n_prob;
    if (is_unimodal(p)) ++n_unimodal;
    const double h = entropy(p), mode = mode_probability(p);
    if (correct) {
      h_cor += h;
      m_cor += mode;
      r.mode_hist_correct.add(mode);
    } else {
      h_inc += h;
      m_inc += mode;
      r.mode_hist_incorrect.add(mode);
    }
  }
  if (n_sigma > 0) r.mean_sigma = sigma_sum / static_cast<double>(n_sigma);
  if (n_prob == 0) return r;
  if (n_prob != preds.size()) throw DomainError("evaluate: mixed point and probability predictions");
  r.unimodal_rate = static_cast<double>(n_unimodal) / static_cast<double>(n_prob);
  if (r.n_correct > 0) {
    r.mean_entropy_correct = h_cor / static_cast<double>(r.n_correct);
    r.mean_mode_correct = m_cor / static_cast<double>(r.n_correct);
  }
  if (n_inc > 0) {
    r.mean_entropy_incorrect = h_inc / static_cast<double>(n_inc);
    r.mean_mode_incorrect = m_inc / static_cast<double>(n_inc);
  }
  if (r.n_correct > 0 && n_inc > 0 && *r.mean_entropy_correct > 0.0)
    r.entropy_ratio = *r.mean_entropy_incorrect / *r.mean_entropy_correct;
  return r;
}

/// Evaluates any model exposing `Prediction predict(std::span<const double>) const`.
template <typename Model>
EvalResult evaluate(const Model& model, const LabeledSet& split) {
  if (split.size() == 0) throw DomainError("evaluate: empty split");
  std::vector<Prediction> preds;
  preds.reserve(split.size());
  for (std::size_t i = 0; i < split.size(); ++i) preds.push_back(model.predict(split.X.row(i)));
  return summarize(preds, split.y);
}

}  // namespace uniord::metrics
