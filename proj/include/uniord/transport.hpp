#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "uniord/constants.hpp"
#include "uniord/errors.hpp"
#include "uniord/prob.hpp"

namespace uniord {

/// Ground cost |i - j|^m between ordinal classes.
class GroundCost {
public:
  explicit GroundCost(double m = 1.0) : m_(m) {
    if (!(m >= 1.0) || !std::isfinite(m)) throw DomainError("GroundCost: exponent must be >= 1");
  }
  double exponent() const { return m_; }
  double operator()(int i, int j) const {
    const double d = std::abs(static_cast<double>(i - j));
    return m_ == 1.0 ? d : std::pow(d, m_);
  }

private:
  double m_;
};

/// k x k matrix of mass flows, row i = source class i+1, column j = target class j+1.
struct TransportPlan {
  int k = 0;
  std::vector<double> flow;  // row-major

  double operator()(int i, int j) const { return flow[static_cast<std::size_t>(i * k + j)]; }
  double& operator()(int i, int j) { return flow[static_cast<std::size_t>(i * k + j)]; }
  std::vector<double> row_sums() const {
    std::vector<double> r(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) r[static_cast<std::size_t>(i)] += (*this)(i, j);
    return r;
  }
  std::vector<double> col_sums() const {
    std::vector<double> c(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) c[static_cast<std::size_t>(j)] += (*this)(i, j);
    return c;
  }
};

/// Transport cost from q to the point mass at class j: sum_i q_i |i - j|^m.
inline double ot_dirac(const ProbVector& q, int j, const GroundCost& cost = GroundCost{}) {
  if (j < 1 || j > q.k())
    throw DomainError("ot_dirac: true class " + std::to_string(j) + " outside 1.." + std::to_string(q.k()));
  double total = 0.0;
  for (int i = 1; i <= q.k(); ++i) total += q.at_class(i) * cost(i, j);
  return total;
}

/// d ot_dirac / d q_i = |i - j|^m (zero-based output).
inline std::vector<double> ot_dirac_grad(int k, int j, const GroundCost& cost = GroundCost{}) {
  if (j < 1 || j > k) throw DomainError("ot_dirac_grad: true class out of range");
  std::vector<double> g(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) g[static_cast<std::size_t>(i - 1)] = cost(i, j);
  return g;
}

/// l1 distance between cumulative mass functions; equals OT with m = 1 on ordered classes.
inline double ot_cmf_l1(const ProbVector& p, const ProbVector& q) {
  if (p.k() != q.k()) throw DomainError("ot_cmf_l1: length mismatch");
  double cp = 0.0, cq = 0.0, total = 0.0;
  // The last CMF entry is 1 for both vectors and contributes nothing.
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    cp += p[i];
    cq += q[i];
    total += std::abs(cp - cq);
  }
  return total;
}

/// Subgradient of ot_cmf_l1 with respect to p: g_l = sum_{i >= l, i < k} sign(CMF(p)_i - CMF(q)_i).
inline std::vector<double> ot_cmf_l1_grad(const ProbVector& p, const ProbVector& q) {
  if (p.k() != q.k()) throw DomainError("ot_cmf_l1_grad: length mismatch");
  const std::size_t k = p.size();
  std::vector<double> sgn(k, 0.0);
  double cp = 0.0, cq = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    cp += p[i];
    cq += q[i];
    const double d = cp - cq;
    sgn[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  std::vector<double> g(k, 0.0);
  double acc = 0.0;
  for (std::size_t l = k; l-- > 0;) {
    acc += sgn[l];
    g[l] = acc;
  }
  return g;
}

/// Exact optimal transport between p and q on the ordered support {1..k}.
///
/// Uses monotone (north-west corner) matching of the two CMFs, which is optimal for any
/// convex cost of |i - j|. Intended as a test oracle, so k is capped.
inline std::pair<double, TransportPlan> ot_lp_oracle(const ProbVector& p, const ProbVector& q,
                                                     const GroundCost& cost = GroundCost{}) {
  if (p.k() != q.k()) throw DomainError("ot_lp_oracle: length mismatch");
  const int k = p.k();
  if (k > tol::kOracleMaxClasses)
    throw DomainError("ot_lp_oracle: k = " + std::to_string(k) + " exceeds oracle limit " +
                      std::to_string(tol::kOracleMaxClasses));

  TransportPlan plan{k, std::vector<double>(static_cast<std::size_t>(k * k), 0.0)};
  std::vector<double> supply(p.vec()), demand(q.vec());
  int i = 0, j = 0;
  double value = 0.0;
  while (i < k && j < k) {
    const double moved = std::min(supply[static_cast<std::size_t>(i)], demand[static_cast<std::size_t>(j)]);
    plan(i, j) += moved;
    value += moved * cost(i + 1, j + 1);
    supply[static_cast<std::size_t>(i)] -= moved;
    demand[static_cast<std::size_t>(j)] -= moved;
    // At least one side is exhausted exactly; ties advance both.
    const bool row_done = supply[static_cast<std::size_t>(i)] <= 0.0;
    const bool col_done = demand[static_cast<std::size_t>(j)] <= 0.0;
    if (row_done) ++i;
    if (col_done) ++j;
  }
  return {value, std::move(plan)};
}

}  // namespace uniord
