#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "uniord/constants.hpp"
#include "uniord/errors.hpp"

namespace uniord {

/// Ordered label set {1, ..., k}; class indices are 1-based throughout the library.
class LabelSpace {
public:
  explicit LabelSpace(int k) : k_(k) {
    if (k < 2) throw DomainError("LabelSpace: need k >= 2, got " + std::to_string(k));
  }
  int k() const { return k_; }
  bool contains(int cls) const { return cls >= 1 && cls <= k_; }

private:
  int k_;
};

/// Nonnegative mass over k ordered classes, summing to one.
///
/// Construction validates the simplex invariant; once built the vector is immutable.
class ProbVector {
public:
  explicit ProbVector(std::vector<double> p) : p_(std::move(p)) { validate(); }

  /// Renormalizes nonnegative weights into a probability vector.
  static ProbVector normalized(std::vector<double> w) {
    double total = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("ProbVector::normalized: negative or non-finite weight");
      total += v;
    }
    if (!(total > 0.0)) throw DomainError("ProbVector::normalized: weights sum to zero");
    for (double& v : w) v /= total;
    return ProbVector(std::move(w));
  }

  static ProbVector one_hot(int k, int cls) {
    if (cls < 1 || cls > k) throw DomainError("ProbVector::one_hot: class out of range");
    std::vector<double> p(static_cast<std::size_t>(k), 0.0);
    p[static_cast<std::size_t>(cls - 1)] = 1.0;
    return ProbVector(std::move(p));
  }

  static ProbVector uniform(int k) {
    return ProbVector(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
  }

  int k() const { return static_cast<int>(p_.size()); }
  std::size_t size() const { return p_.size(); }
  /// Zero-based access.
  double operator[](std::size_t i) const { return p_[i]; }
  /// One-based access by class index.
  double at_class(int cls) const { return p_.at(static_cast<std::size_t>(cls - 1)); }
  std::span<const double> values() const { return p_; }
  const std::vector<double>& vec() const { return p_; }

  ProbVector reversed() const { return ProbVector(std::vector<double>(p_.rbegin(), p_.rend())); }

private:
  void validate() const {
    if (p_.size() < 2) throw DomainError("ProbVector: need at least 2 classes");
    double total = 0.0;
    for (double v : p_) {
      if (!std::isfinite(v) || v < 0.0) throw DomainError("ProbVector: entries must be finite and >= 0");
      total += v;
    }
    if (std::abs(total - 1.0) > tol::kSumToOne)
      throw DomainError("ProbVector: entries sum to " + std::to_string(total) + ", expected 1");
  }

  std::vector<double> p_;
};

/// True iff p rises (non-strictly) to some index and falls (non-strictly) afterwards.
///
/// The first strict descent fixes the only candidate mode position, so one pass suffices.
inline bool is_unimodal(std::span<const double> p, double slack = tol::kUnimodalAdjacent) {
  std::size_t i = 0;
  while (i + 1 < p.size() && p[i + 1] >= p[i] - slack) ++i;
  while (i + 1 < p.size() && p[i + 1] <= p[i] + slack) ++i;
  return i + 1 >= p.size();
}

inline bool is_unimodal(const ProbVector& p) { return is_unimodal(p.values()); }

/// Shannon entropy in nats, with 0 ln 0 = 0.
inline double entropy(const ProbVector& p) {
  double h = 0.0;
  for (double v : p.values())
    if (v > 0.0) h -= v * std::log(v);
  return std::max(h, 0.0);
}

/// 1-based index of the largest entry; ties go to the lowest class.
inline int argmax_class(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  return static_cast<int>(best) + 1;
}

inline int argmax_class(const ProbVector& p) { return argmax_class(p.values()); }

/// Largest entry (the mode probability).
inline double mode_probability(const ProbVector& p) {
  return *std::max_element(p.values().begin(), p.values().end());
}

/// Cumulative mass function (prefix sums).
inline std::vector<double> cmf(std::span<const double> p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  return c;
}

inline std::vector<double> cmf(const ProbVector& p) { return cmf(p.values()); }

}  // namespace uniord
