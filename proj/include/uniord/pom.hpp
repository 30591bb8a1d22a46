#pragma once

// Proportional odds (cumulative logit) model: Pr(Y <= j | x) = F(alpha_j - beta . x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uniord/dataset.hpp"
#include "uniord/errors.hpp"
#include "uniord/prob.hpp"
#include "uniord/unimodal_head.hpp"

namespace uniord::pom {

struct PomParams {
  std::vector<double> beta;   // length d
  std::vector<double> alpha;  // length k - 1, strictly increasing

  int k() const { return static_cast<int>(alpha.size()) + 1; }
  std::size_t dim() const { return beta.size(); }

  void validate() const {
    if (alpha.empty()) throw DomainError("PomParams: need at least one threshold");
    for (std::size_t j = 1; j < alpha.size(); ++j)
      if (!(alpha[j] > alpha[j - 1])) throw DomainError("PomParams: thresholds must be strictly increasing");
  }
};

namespace detail {

inline double linear_predictor(const PomParams& params, std::span<const double> x) {
  if (x.size() != params.dim()) throw DomainError("pom: feature width mismatch");
  double eta = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) eta += params.beta[i] * x[i];
  return eta;
}

inline double logistic_pdf(double t) {
  const double s = sigmoid(t);
  return s * (1.0 - s);
}

// F(u) - F(l) for l < u, with infinite ends allowed, computed from the tail that avoids cancellation.
inline double logistic_mass(double l, double u) {
  if (l >= 0.0) return sigmoid(-l) - sigmoid(-u);
  return sigmoid(u) - sigmoid(l);
}

}  // namespace detail

/// Cumulative probabilities F(alpha_j - beta . x), j = 1..k-1.
inline std::vector<double> pom_cumulative(const PomParams& params, std::span<const double> x) {
  const double eta = detail::linear_predictor(params, x);
  std::vector<double> c(params.alpha.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = sigmoid(params.alpha[j] - eta);
  return c;
}

/// Class probabilities as successive differences of the cumulative curve.
inline ProbVector pom_class_probs(const PomParams& params, std::span<const double> x) {
  const double eta = detail::linear_predictor(params, x);
  const int k = params.k();
  std::vector<double> p(static_cast<std::size_t>(k));
  for (int y = 1; y <= k; ++y) {
    const double l = y == 1 ? -INFINITY : params.alpha[static_cast<std::size_t>(y - 2)] - eta;
    const double u = y == k ? INFINITY : params.alpha[static_cast<std::size_t>(y - 1)] - eta;
    p[static_cast<std::size_t>(y - 1)] = std::max(0.0, detail::logistic_mass(l, u));
  }
  return ProbVector::normalized(std::move(p));
}

struct FitOptions {
  int max_iterations = 5000;
  double learning_rate = 0.05;
  double tolerance = 1e-8;  // minimum mean log-likelihood gain over `window` accepted steps
  int window = 10;
};

struct FitResult {
  PomParams params;
  std::vector<double> log_likelihood;  // mean log-likelihood after every accepted step
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Unconstrained coordinates: theta = (a1, r_2..r_{k-1}, beta), alpha_j = a1 + sum_{l<=j} softplus(r_l).
struct Reparam {
  int k;
  std::size_t d;

  std::size_t size() const { return static_cast<std::size_t>(k - 1) + d; }

  PomParams unpack(std::span<const double> theta) const {
    PomParams p;
    p.alpha.resize(static_cast<std::size_t>(k - 1));
    p.alpha[0] = theta[0];
    for (std::size_t j = 1; j < p.alpha.size(); ++j) p.alpha[j] = p.alpha[j - 1] + softplus(theta[j]);
    p.beta.assign(theta.begin() + (k - 1), theta.end());
    return p;
  }

  std::vector<double> pack(const PomParams& p) const {
    std::vector<double> theta(size());
    theta[0] = p.alpha[0];
    for (std::size_t j = 1; j < p.alpha.size(); ++j) {
      const double inc = p.alpha[j] - p.alpha[j - 1];
      theta[j] = inc > 30.0 ? inc : std::log(std::expm1(inc));  // softplus inverse
    }
    std::copy(p.beta.begin(), p.beta.end(), theta.begin() + (k - 1));
    return theta;
  }
};

// Mean log-likelihood and its gradient in theta coordinates.
inline double log_likelihood(const Reparam& rp, std::span<const double> theta, const LabeledSet& data,
                             std::vector<double>* grad) {
  const PomParams p = rp.unpack(theta);
  const auto km1 = static_cast<std::size_t>(rp.k - 1);
  std::vector<double> g_alpha(km1, 0.0), g_beta(rp.d, 0.0);
  double total = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.X.row(n);
    const double eta = linear_predictor(p, x);
    const int y = data.y[n];
    const bool has_lo = y > 1, has_hi = y < rp.k;
    const double l = has_lo ? p.alpha[static_cast<std::size_t>(y - 2)] - eta : -INFINITY;
    const double u = has_hi ? p.alpha[static_cast<std::size_t>(y - 1)] - eta : INFINITY;
    const double mass = logistic_mass(l, u);
    if (!(mass > 0.0)) throw TrainingError("pom_fit: likelihood underflowed to zero");
    total += std::log(mass);
    if (!grad) continue;
    const double fu = has_hi ? logistic_pdf(u) : 0.0;
    const double fl = has_lo ? logistic_pdf(l) : 0.0;
    if (has_hi) g_alpha[static_cast<std::size_t>(y - 1)] += fu / mass;
    if (has_lo) g_alpha[static_cast<std::size_t>(y - 2)] -= fl / mass;
    const double d_eta = (fl - fu) / mass;
    for (std::size_t i = 0; i < rp.d; ++i) g_beta[i] += d_eta * x[i];
  }
  const double inv_n = 1.0 / static_cast<double>(data.size());
  if (grad) {
    grad->assign(rp.size(), 0.0);
    // alpha_j depends on a1 and on r_l for l <= j
    double suffix = 0.0;
    for (std::size_t j = km1; j-- > 0;) {
      suffix += g_alpha[j];
      if (j == 0) (*grad)[0] = suffix * inv_n;
      else (*grad)[j] = suffix * sigmoid(theta[j]) * inv_n;
    }
    for (std::size_t i = 0; i < rp.d; ++i) (*grad)[km1 + i] = g_beta[i] * inv_n;
  }
  return total * inv_n;
}

}  // namespace detail

/// Initial parameters: beta = 0 and thresholds at the logits of the empirical cumulative frequencies.
inline PomParams pom_initial(const LabeledSet& data) {
  std::vector<double> counts(static_cast<std::size_t>(data.k), 0.0);
  for (int y : data.y) counts[static_cast<std::size_t>(y - 1)] += 1.0;
  PomParams p;
  p.beta.assign(data.X.cols(), 0.0);
  double cum = 0.0;
  for (int j = 1; j < data.k; ++j) {
    cum += counts[static_cast<std::size_t>(j - 1)];
    const double f = std::clamp(cum / static_cast<double>(data.size()), 1e-3, 1.0 - 1e-3);
    double a = std::log(f / (1.0 - f));
    if (!p.alpha.empty()) a = std::max(a, p.alpha.back() + 1e-2);
    p.alpha.push_back(a);
  }
  return p;
}

/// Maximum-likelihood fit by full-batch Adam on the ordered reparameterization.
///
/// A step that lowers the likelihood is undone and the step size halved, so the recorded
/// log-likelihood sequence never decreases.
inline FitResult pom_fit(const LabeledSet& data, const FitOptions& opts = {}) {
  data.check();
  if (data.size() == 0) throw DomainError("pom_fit: empty training set");
  {
    const int first = data.y.front();
    if (std::all_of(data.y.begin(), data.y.end(), [first](int y) { return y == first; }))
      throw DomainError("pom_fit: labels must span at least two classes");
  }
  const detail::Reparam rp{data.k, data.X.cols()};
  std::vector<double> theta = rp.pack(pom_initial(data));
  std::vector<double> grad, m(theta.size(), 0.0), v(theta.size(), 0.0);
  double ll = detail::log_likelihood(rp, theta, data, &grad);
  if (!std::isfinite(ll)) throw TrainingError("pom_fit: non-finite initial likelihood");

  FitResult res;
  res.log_likelihood.push_back(ll);
  double lr = opts.learning_rate;
  const double b1 = 0.9, b2 = 0.999;
  long t = 0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    ++t;
    std::vector<double> cand = theta, m_new = m, v_new = v;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = -grad[i];  // minimize the negative log-likelihood
      m_new[i] = b1 * m[i] + (1.0 - b1) * g;
      v_new[i] = b2 * v[i] + (1.0 - b2) * g * g;
      cand[i] -= lr * (m_new[i] / c1) / (std::sqrt(v_new[i] / c2) + 1e-8);
    }
    std::vector<double> cand_grad;
    double cand_ll = -INFINITY;
    try {
      cand_ll = detail::log_likelihood(rp, cand, data, &cand_grad);
    } catch (const TrainingError&) {
      cand_ll = -INFINITY;
    }
    res.iterations = it + 1;
    if (!(cand_ll >= ll)) {
      --t;
      lr *= 0.5;
      if (lr < 1e-12) {
        res.converged = true;
        break;
      }
      continue;
    }
    theta = std::move(cand);
    grad = std::move(cand_grad);
    m = std::move(m_new);
    v = std::move(v_new);
    ll = cand_ll;
    res.log_likelihood.push_back(ll);
    const auto& h = res.log_likelihood;
    const auto w = static_cast<std::size_t>(opts.window);
    if (h.size() > w && h.back() - h[h.size() - 1 - w] < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  if (!std::isfinite(ll)) throw TrainingError("pom_fit: non-finite likelihood");
  res.params = rp.unpack(theta);
  return res;
}

/// Mean log-likelihood of fitted parameters on a data set.
inline double pom_log_likelihood(const PomParams& params, const LabeledSet& data) {
  const detail::Reparam rp{params.k(), params.dim()};
  const auto theta = rp.pack(params);
  return detail::log_likelihood(rp, theta, data, nullptr);
}

/// A configuration where the model's class probabilities are not unimodal.
struct NonUnimodalWitness {
  PomParams params;
  std::vector<double> x;
  ProbVector probs;
  int trial = 0;
};

/// Randomized search over thresholds and shifts for a multi-modal probability vector.
inline std::optional<NonUnimodalWitness> find_non_unimodal(int k, int trials, std::uint64_t seed) {
  if (k < 3) throw DomainError("find_non_unimodal: need k >= 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start(-3.0, 3.0), step(0.05, 3.0), shift(-3.0, 3.0);
  for (int t = 0; t < trials; ++t) {
    PomParams params;
    params.beta = {1.0};
    double a = start(rng);
    for (int j = 1; j < k; ++j) {
      params.alpha.push_back(a);
      a += step(rng);
    }
    std::vector<double> x{shift(rng)};
    ProbVector p = pom_class_probs(params, x);
    if (!is_unimodal(p)) return NonUnimodalWitness{std::move(params), std::move(x), std::move(p), t};
  }
  return std::nullopt;
}

}  // namespace uniord::pom
