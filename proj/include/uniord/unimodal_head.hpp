#pragma once

// Unimodal output layer: a symmetric location-scale density binned over k equal,
// fixed intervals of [-1, 1] and renormalized. Every output is unimodal.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "uniord/constants.hpp"
#include "uniord/errors.hpp"
#include "uniord/prob.hpp"

namespace uniord {

enum class Family { Normal, Logistic, Cauchy };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Normal: return "normal";
    case Family::Logistic: return "logistic";
    case Family::Cauchy: return "cauchy";
  }
  return "?";
}

inline Family family_from_string(std::string_view s) {
  if (s == "normal") return Family::Normal;
  if (s == "logistic") return Family::Logistic;
  if (s == "cauchy") return Family::Cauchy;
  throw ConfigError("unknown location-scale family '" + std::string(s) + "'");
}

namespace detail {

// Standardized (mu = 0, sigma = 1) distribution functions.

inline double std_pdf(Family f, double z) {
  switch (f) {
    case Family::Normal: return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    case Family::Logistic: {
      const double e = std::exp(-std::abs(z));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Family::Cauchy: return 1.0 / (std::numbers::pi * (1.0 + z * z));
  }
  return 0.0;
}

/// Upper tail P(Z > z), accurate for large positive z.
inline double std_sf(Family f, double z) {
  switch (f) {
    case Family::Normal: return 0.5 * std::erfc(z / std::numbers::sqrt2);
    case Family::Logistic: return 1.0 / (1.0 + std::exp(z));
    case Family::Cauchy:
      if (z > 0.0) return std::atan(1.0 / z) / std::numbers::pi;
      return 0.5 - std::atan(z) / std::numbers::pi;
  }
  return 0.0;
}

/// Lower tail P(Z <= z); symmetric families give cdf(z) = sf(-z).
inline double std_cdf(Family f, double z) { return std_sf(f, -z); }

}  // namespace detail

/// Fixed thresholds -1 = a_0 < a_1 < ... < a_k = 1 with spacing 2/k.
class BinGrid {
public:
  explicit BinGrid(int k) : k_(k) {
    if (k < 2) throw DomainError("BinGrid: need k >= 2");
    edges_.resize(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) edges_[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / k;
    edges_.back() = 1.0;
  }
  int k() const { return k_; }
  double width() const { return 2.0 / k_; }
  /// Threshold a_i, i in 0..k.
  double edge(int i) const { return edges_.at(static_cast<std::size_t>(i)); }
  const std::vector<double>& edges() const { return edges_; }

private:
  int k_;
  std::vector<double> edges_;
};

/// Location-scale distribution (family, mu, sigma) with sigma >= the global floor.
struct LocationScale {
  Family family = Family::Normal;
  double mu = 0.0;
  double sigma = 1.0;

  LocationScale(Family f, double m, double s) : family(f), mu(m), sigma(s) {
    if (!std::isfinite(m)) throw DomainError("LocationScale: non-finite location");
    if (!(s >= tol::kSigmaFloor) || !std::isfinite(s))
      throw DomainError("LocationScale: scale " + std::to_string(s) + " below floor");
  }

  double pdf(double t) const { return detail::std_pdf(family, (t - mu) / sigma) / sigma; }

  /// Mass on [a, b], evaluated from whichever tail avoids cancellation.
  double mass(double a, double b) const {
    const double za = (a - mu) / sigma, zb = (b - mu) / sigma;
    if (za >= 0.0) return detail::std_sf(family, za) - detail::std_sf(family, zb);
    if (zb <= 0.0) return detail::std_cdf(family, zb) - detail::std_cdf(family, za);
    return (0.5 - detail::std_sf(family, zb)) + (0.5 - detail::std_cdf(family, za));
  }
};

/// CDF of the family at t.
inline double cdf(Family family, double mu, double sigma, double t) {
  if (!(sigma > 0.0)) throw DomainError("cdf: sigma must be > 0");
  return detail::std_cdf(family, (t - mu) / sigma);
}

/// Density of the family at t.
inline double pdf(Family family, double mu, double sigma, double t) {
  if (!(sigma > 0.0)) throw DomainError("pdf: sigma must be > 0");
  return detail::std_pdf(family, (t - mu) / sigma) / sigma;
}

namespace detail {

// Unnormalized bin masses, with the per-bin floor applied when the total underflows.
inline std::vector<double> raw_bin_masses(const BinGrid& grid, const LocationScale& ls) {
  std::vector<double> raw(static_cast<std::size_t>(grid.k()));
  double total = 0.0;
  for (int i = 1; i <= grid.k(); ++i) {
    const double m = std::max(0.0, ls.mass(grid.edge(i - 1), grid.edge(i)));
    raw[static_cast<std::size_t>(i - 1)] = m;
    total += m;
  }
  if (total < tol::kHeadUnderflow)
    for (double& m : raw) m += tol::kHeadBinFloor;
  return raw;
}

}  // namespace detail

/// Class probabilities p_i proportional to the mass of bin i.
inline ProbVector head_probs(const BinGrid& grid, const LocationScale& ls) {
  return ProbVector::normalized(detail::raw_bin_masses(grid, ls));
}

struct HeadGradient {
  std::vector<double> d_mu;     // dp_i / dmu
  std::vector<double> d_sigma;  // dp_i / dsigma
};

/// Exact derivatives of head_probs with respect to mu and sigma.
inline HeadGradient head_grad(const BinGrid& grid, const LocationScale& ls) {
  const auto k = static_cast<std::size_t>(grid.k());
  const std::vector<double> raw = detail::raw_bin_masses(grid, ls);
  double total = 0.0;
  for (double m : raw) total += m;

  // d/dmu F((a - mu)/sigma) = -f(a);  d/dsigma F((a - mu)/sigma) = -f(a) (a - mu) / sigma.
  std::vector<double> f(k + 1), fs(k + 1);
  for (std::size_t i = 0; i <= k; ++i) {
    const double a = grid.edge(static_cast<int>(i));
    f[i] = ls.pdf(a);
    fs[i] = f[i] * (a - ls.mu) / ls.sigma;
  }
  std::vector<double> draw_mu(k), draw_sigma(k);
  double sum_mu = 0.0, sum_sigma = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    draw_mu[i] = f[i] - f[i + 1];
    draw_sigma[i] = fs[i] - fs[i + 1];
    sum_mu += draw_mu[i];
    sum_sigma += draw_sigma[i];
  }
  HeadGradient g{std::vector<double>(k), std::vector<double>(k)};
  for (std::size_t i = 0; i < k; ++i) {
    const double p = raw[i] / total;
    g.d_mu[i] = (draw_mu[i] - p * sum_mu) / total;
    g.d_sigma[i] = (draw_sigma[i] - p * sum_sigma) / total;
  }
  return g;
}

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to relative accuracy `rel`.
///
/// The error budget is relative to the coarse estimate, so f should not hide its mass
/// away from both endpoints and the midpoint (true for a density peaked at an endpoint).
inline double integrate(const std::function<double(double)>& f, double a, double b, double rel = 1e-13,
                        int max_depth = 40) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double eps = rel * std::abs(whole) + 1e-300;
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, eps, max_depth);
}

/// Outcome of the sub-bin comparison for one neighbouring bin.
struct SubBinCheck {
  int bin = 0;            // bin containing mu
  int neighbour = 0;      // adjacent bin being compared
  double near_inner = 0;  // mass of the sub-bin of `bin` adjacent to the neighbour
  double near_outer = 0;  // mass of the matching-length sub-bin of the neighbour next to it
  double far_inner = 0;   // mass of the other sub-bin of `bin`
  double far_outer = 0;   // mass of the far sub-bin of the neighbour
  bool holds = false;
};

namespace detail {

inline bool strictly_greater(double lhs, double rhs) {
  if (lhs > rhs) return true;
  // Both masses underflowed: the comparison carries no information.
  return lhs <= tol::kLemmaDegenerate && rhs <= tol::kLemmaDegenerate && std::abs(lhs - rhs) <= tol::kLemmaDegenerate;
}

}  // namespace detail

/// Splits the bin containing mu at mu into sub-bins of lengths a (left) and b (right),
/// splits each neighbouring bin into mirrored lengths, integrates the density over every
/// sub-bin, and checks that each sub-bin of mu's bin outweighs its mirrored partner.
inline std::vector<SubBinCheck> lemma1_subbin_checks(const BinGrid& grid, const LocationScale& ls) {
  int bin = 0;
  for (int i = 1; i <= grid.k(); ++i)
    if (ls.mu > grid.edge(i - 1) && ls.mu < grid.edge(i)) bin = i;
  if (bin == 0) throw DomainError("lemma1 check: mu must lie strictly inside a bin of [-1, 1]");

  const auto density = [&ls](double t) { return ls.pdf(t); };
  const double lo = grid.edge(bin - 1), hi = grid.edge(bin);
  const double a = ls.mu - lo, b = hi - ls.mu;
  std::vector<SubBinCheck> out;

  if (bin < grid.k()) {  // right neighbour: lengths b then a
    SubBinCheck c;
    c.bin = bin;
    c.neighbour = bin + 1;
    c.near_inner = integrate(density, ls.mu, hi);
    c.near_outer = integrate(density, hi, hi + b);
    c.far_inner = integrate(density, lo, ls.mu);
    c.far_outer = integrate(density, hi + b, grid.edge(bin + 1));
    c.holds = detail::strictly_greater(c.near_inner, c.near_outer) && detail::strictly_greater(c.far_inner, c.far_outer);
    out.push_back(c);
  }
  if (bin > 1) {  // left neighbour, mirrored
    SubBinCheck c;
    c.bin = bin;
    c.neighbour = bin - 1;
    c.near_inner = integrate(density, lo, ls.mu);
    c.near_outer = integrate(density, lo - a, lo);
    c.far_inner = integrate(density, ls.mu, hi);
    c.far_outer = integrate(density, grid.edge(bin - 2), lo - a);
    c.holds = detail::strictly_greater(c.near_inner, c.near_outer) && detail::strictly_greater(c.far_inner, c.far_outer);
    out.push_back(c);
  }
  return out;
}

/// True iff every sub-bin inequality around mu's bin holds.
inline bool verify_lemma1_inequalities(const BinGrid& grid, const LocationScale& ls) {
  for (const auto& c : lemma1_subbin_checks(grid, ls))
    if (!c.holds) return false;
  return true;
}

/// Raw network output (mu_raw, s) to a location-scale triple: mu = mu_raw, sigma = softplus(s) + floor.
inline double softplus(double x) { return x > 30.0 ? x : (x < -30.0 ? std::exp(x) : std::log1p(std::exp(x))); }
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline LocationScale location_scale_from_raw(Family family, double mu_raw, double s_raw) {
  return LocationScale(family, mu_raw, softplus(s_raw) + tol::kSigmaFloor);
}

}  // namespace uniord
