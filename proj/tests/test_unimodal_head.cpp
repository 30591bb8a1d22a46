#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "uniord/errors.hpp"
#include "uniord/unimodal_head.hpp"

using namespace uniord;

TEST(Cdf, SymmetryAndReferenceValues) {
  EXPECT_DOUBLE_EQ(cdf(Family::Normal, 0, 1, 0), 0.5);
  EXPECT_DOUBLE_EQ(cdf(Family::Logistic, 0, 1, 0), 0.5);
  EXPECT_DOUBLE_EQ(cdf(Family::Cauchy, 0, 1, 0), 0.5);
  EXPECT_NEAR(oracle::normal_cdf(1.0), 0.841345, 1e-6);
  EXPECT_NEAR(cdf(Family::Normal, 0, 1, 1), oracle::normal_cdf(1.0), 1e-14);
  EXPECT_THROW(cdf(Family::Normal, 0, 0, 1), DomainError);
  EXPECT_THROW(pdf(Family::Normal, 0, -1, 1), DomainError);
}

TEST(Cdf, MatchesIndependentOracles) {
  for (double t = -6.0; t <= 6.0; t += 0.37) {
    EXPECT_NEAR(cdf(Family::Normal, 0.3, 1.7, t), oracle::normal_cdf((t - 0.3) / 1.7), 1e-13);
    EXPECT_NEAR(cdf(Family::Logistic, -0.2, 0.6, t), oracle::logistic_cdf((t + 0.2) / 0.6), 1e-14);
    EXPECT_NEAR(cdf(Family::Cauchy, 0.1, 0.4, t), oracle::cauchy_cdf((t - 0.1) / 0.4), 1e-14);
  }
}

TEST(Cdf, DensityIntegratesToCdfDifferences) {
  for (Family f : {Family::Normal, Family::Logistic, Family::Cauchy}) {
    const double q = oracle::simpson([&](double t) { return pdf(f, 0.2, 0.5, t); }, -0.4, 0.9);
    EXPECT_NEAR(q, cdf(f, 0.2, 0.5, 0.9) - cdf(f, 0.2, 0.5, -0.4), 1e-12) << to_string(f);
  }
}

TEST(Family, StringRoundTrip) {
  for (Family f : {Family::Normal, Family::Logistic, Family::Cauchy}) EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_THROW(family_from_string("gamma"), ConfigError);
}

TEST(LocationScale, RejectsScaleBelowFloor) {
  EXPECT_THROW(LocationScale(Family::Normal, 0.0, 1e-4), DomainError);
  EXPECT_THROW(LocationScale(Family::Normal, NAN, 1.0), DomainError);
  EXPECT_NO_THROW(LocationScale(Family::Normal, 0.0, tol::kSigmaFloor));
}

TEST(BinGrid, Edges) {
  const BinGrid g(4);
  EXPECT_EQ(g.edges(), (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
  EXPECT_DOUBLE_EQ(g.width(), 0.5);
  EXPECT_THROW(BinGrid(1), DomainError);
}

TEST(HeadProbs, SymmetricAtCentre) {
  for (double s : {0.01, 0.3, 1.0, 20.0}) {
    const auto p = head_probs(BinGrid(4), LocationScale(Family::Normal, 0.0, s));
    EXPECT_NEAR(p[0], p[3], 1e-15);
    EXPECT_NEAR(p[1], p[2], 1e-15);
  }
}

TEST(HeadProbs, ConcentratesInNarrowLimit) {
  const auto p = head_probs(BinGrid(4), LocationScale(Family::Normal, 0.75, 1e-3));
  EXPECT_NEAR(p[3], 1.0, 1e-12);
  EXPECT_LT(p[0] + p[1] + p[2], 1e-12);
}

TEST(HeadProbs, MatchesQuadratureOracle) {
  // k = 3 edges (-1, -1/3, 1/3, 1)
  const double mu = 0.2, sigma = 0.5;
  const std::vector<double> a{-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0};
  std::vector<double> mass(3);
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    mass[i] = oracle::normal_cdf((a[i + 1] - mu) / sigma) - oracle::normal_cdf((a[i] - mu) / sigma);
    total += mass[i];
  }
  const auto p = head_probs(BinGrid(3), LocationScale(Family::Normal, mu, sigma));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], mass[i] / total, 1e-13);
  EXPECT_TRUE(is_unimodal(p));
}

TEST(HeadProbs, FarTailsStayFiniteAndUnimodal) {
  for (Family f : {Family::Normal, Family::Logistic, Family::Cauchy}) {
    for (double mu : {-40.0, -3.0, 3.0, 40.0}) {
      const auto p = head_probs(BinGrid(10), LocationScale(f, mu, tol::kSigmaFloor));
      EXPECT_TRUE(is_unimodal(p)) << to_string(f) << " mu=" << mu;
      if (f == Family::Cauchy) {
        EXPECT_EQ(argmax_class(p), mu < 0 ? 1 : 10);
      } else {
        // every bin underflows; the additive floor leaves a uniform vector
        for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(p[i], 0.1);
      }
    }
  }
}

TEST(HeadGrad, SymmetryAndNormalization) {
  const auto g = head_grad(BinGrid(5), LocationScale(Family::Normal, 0.0, 0.4));
  EXPECT_NEAR(g.d_mu[2], 0.0, 1e-15);
  double sm = 0.0, ss = 0.0;
  for (int i = 0; i < 5; ++i) {
    sm += g.d_mu[i];
    ss += g.d_sigma[i];
  }
  EXPECT_NEAR(sm, 0.0, 1e-14);
  EXPECT_NEAR(ss, 0.0, 1e-14);
}

TEST(HeadGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mu(-1.2, 1.2), sig(0.1, 2.0);
  for (int t = 0; t < 200; ++t) {
    const Family f = static_cast<Family>(t % 3);
    const double m = mu(rng), s = sig(rng), h = 1e-6;
    const BinGrid grid(5);
    const auto g = head_grad(grid, LocationScale(f, m, s));
    const auto pp = head_probs(grid, LocationScale(f, m + h, s)), pm = head_probs(grid, LocationScale(f, m - h, s));
    const auto sp = head_probs(grid, LocationScale(f, m, s + h)), sm = head_probs(grid, LocationScale(f, m, s - h));
    for (int i = 0; i < 5; ++i) {
      const double fd_mu = (pp[i] - pm[i]) / (2 * h), fd_s = (sp[i] - sm[i]) / (2 * h);
      EXPECT_LT(std::abs(g.d_mu[i] - fd_mu) / std::max({std::abs(fd_mu), std::abs(g.d_mu[i]), 1e-4}), 1e-5);
      EXPECT_LT(std::abs(g.d_sigma[i] - fd_s) / std::max({std::abs(fd_s), std::abs(g.d_sigma[i]), 1e-4}), 1e-5);
    }
  }
}

TEST(SubBinInequalities, Examples) {
  EXPECT_TRUE(verify_lemma1_inequalities(BinGrid(4), LocationScale(Family::Normal, 0.1, 0.3)));
  EXPECT_TRUE(verify_lemma1_inequalities(BinGrid(8), LocationScale(Family::Logistic, -0.6, 0.05)));
  for (Family f : {Family::Normal, Family::Logistic, Family::Cauchy}) {
    // bin midpoint of bin 3 for k = 5
    EXPECT_TRUE(verify_lemma1_inequalities(BinGrid(5), LocationScale(f, 0.0, 0.7)));
  }
  EXPECT_THROW(lemma1_subbin_checks(BinGrid(4), LocationScale(Family::Normal, 0.5, 0.3)), DomainError);
  EXPECT_THROW(lemma1_subbin_checks(BinGrid(4), LocationScale(Family::Normal, 1.5, 0.3)), DomainError);
}

TEST(SubBinInequalities, QuadratureAgreesWithOracle) {
  const LocationScale ls(Family::Normal, 0.1, 0.3);
  const auto checks = lemma1_subbin_checks(BinGrid(4), ls);
  ASSERT_EQ(checks.size(), 2u);
  // mu = 0.1 lies in bin 3 = (0, 0.5)
  const auto& right = checks[0];
  EXPECT_EQ(right.neighbour, 4);
  const auto F = [](double t) { return oracle::normal_cdf((t - 0.1) / 0.3); };
  EXPECT_NEAR(right.near_inner, F(0.5) - F(0.1), 1e-12);
  EXPECT_NEAR(right.near_outer, F(0.9) - F(0.5), 1e-12);
  EXPECT_NEAR(right.far_outer, F(1.0) - F(0.9), 1e-12);
}

TEST(Integrate, PolynomialAndPeak) {
  EXPECT_NEAR(integrate([](double x) { return x * x * x; }, 0.0, 2.0), 4.0, 1e-13);
  const LocationScale ls(Family::Normal, 0.0, 1e-3);
  EXPECT_NEAR(integrate([&](double t) { return ls.pdf(t); }, 0.0, 0.5), 0.5, 1e-12);
}

TEST(RawParameterization, SigmaFloorAndSoftplus) {
  const auto ls = location_scale_from_raw(Family::Normal, 0.3, -100.0);
  EXPECT_NEAR(ls.sigma, tol::kSigmaFloor, 1e-15);
  EXPECT_NEAR(location_scale_from_raw(Family::Normal, 0.0, 0.0).sigma, std::log(2.0) + tol::kSigmaFloor, 1e-15);
  EXPECT_NEAR(softplus(50.0), 50.0, 1e-12);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(sigmoid(0.0), 0.5, 0.0);
}
