#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "qrx/phase_noise.hpp"

using namespace qrx;

// e^{-sigma^2/2} and e^{-9 sigma^2/2} at sigma = 0.45, evaluated with mpmath at 40 digits.
constexpr double kCosAvg045 = 0.9037070778731960557565;
constexpr double kCos3Avg045 = 0.4020213830946548717826;

TEST(PhaseNoise, RejectsInvalidSigma)
{
  EXPECT_THROW(PhaseNoise{-0.1}, ArgumentError);
  EXPECT_THROW(PhaseNoise{std::nan("")}, ArgumentError);
  EXPECT_THROW(PhaseNoise{INFINITY}, ArgumentError);
  EXPECT_NO_THROW(PhaseNoise(0.0));
}

TEST(BuildRule, NoiselessIsSingleNode)
{
  for (int order : {1, 7, 64}) {
    const auto r = build_rule(PhaseNoise(0.0), order);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r.nodes[0], 0.0);
    EXPECT_EQ(r.weights[0], 1.0);
  }
}

TEST(BuildRule, RejectsNonPositiveOrder)
{
  EXPECT_THROW(build_rule(PhaseNoise(0.3), 0), ArgumentError);
  EXPECT_THROW(build_rule(PhaseNoise(0.3), -4), ArgumentError);
}

TEST(BuildRule, WeightsNormalisedAndNodesSymmetric)
{
  for (int order : {1, 2, 5, 32, 64, 128, 256, 512}) {
    const auto r = build_rule(PhaseNoise(0.45), order);
    ASSERT_EQ(r.size(), std::size_t(order));
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_GE(r.weights[i], 0.0);
      EXPECT_EQ(r.nodes[i], -r.nodes[r.size() - 1 - i]);
      EXPECT_EQ(r.weights[i], r.weights[r.size() - 1 - i]);
      sum += r.weights[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12) << "order " << order;
  }
}

TEST(BuildRule, CharacteristicFunctionAtOrder64)
{
  const auto r = build_rule(PhaseNoise(0.45), 64);
  double c = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) c += r.weights[i] * std::cos(r.nodes[i]);
  EXPECT_NEAR(c, kCosAvg045, 1e-13);
}

TEST(BuildRule, GaussianMomentsExact)
{
  // an n-point rule integrates polynomials up to degree 2n-1 exactly
  const double s = 0.7;
  const auto r = build_rule(PhaseNoise(s), 8);
  double m2 = 0.0, m4 = 0.0, m6 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x2 = r.nodes[i] * r.nodes[i];
    m2 += r.weights[i] * x2;
    m4 += r.weights[i] * x2 * x2;
    m6 += r.weights[i] * x2 * x2 * x2;
  }
  EXPECT_NEAR(m2, s * s, 1e-14);
  EXPECT_NEAR(m4, 3 * std::pow(s, 4), 1e-14);
  EXPECT_NEAR(m6, 15 * std::pow(s, 6), 1e-13);
}

TEST(Average, Constant)
{
  EXPECT_NEAR(average(PhaseNoise(0.3), [](double) { return 0.7; }), 0.7, 1e-15);
}

TEST(Average, CosineClosedForms)
{
  const PhaseNoise n(0.45);
  EXPECT_NEAR(average(n, [](double p) { return std::cos(p); }), kCosAvg045, 1e-12);
  EXPECT_NEAR(average(n, [](double p) { return std::cos(3 * p); }), kCos3Avg045, 1e-12);
}

TEST(Average, NoiselessReturnsValueAtZero)
{
  EXPECT_EQ(average(PhaseNoise(0.0), [](double p) { return std::exp(p) + 2.5; }), 3.5);
}

TEST(Average, CharacteristicFunctionGrid)
{
  for (double s = 0.05; s <= 1.0 + 1e-12; s += 0.05) {
    const PhaseNoise n(s);
    for (int m = 0; m <= 20; ++m) {
      const double expect = std::exp(-0.5 * m * m * s * s);
      const double got = average(n, [m](double p) { return std::cos(m * p); });
      EXPECT_NEAR(got, expect, 1e-9) << "sigma " << s << " m " << m;
    }
  }
}

TEST(Average, LinearAndEven)
{
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const PhaseNoise n(0.05 + 0.9 * (u(gen) + 1.0) / 2.0);
    const double a = u(gen), b = u(gen), c1 = 3 * u(gen), c2 = 3 * u(gen), shift = u(gen);
    auto f = [&](double p) { return std::exp(c1 * std::cos(p + shift)); };
    auto g = [&](double p) { return std::pow(std::sin(c2 * p + shift), 2); };
    const double fa = average(n, f), ga = average(n, g);
    const double combo = average(n, [&](double p) { return a * f(p) + b * g(p); });
    EXPECT_NEAR(combo, a * fa + b * ga, 1e-9 * (std::abs(fa) + std::abs(ga)));
    const double mirrored = average(n, [&](double p) { return f(-p); });
    EXPECT_NEAR(mirrored, fa, 1e-10 * std::abs(fa));
  }
}

TEST(Average, VectorValued)
{
  const PhaseNoise n(0.45);
  std::vector<double> out(3);
  average_many(
      n,
      [](double p, std::span<double> v) {
        v[0] = 1.0;
        v[1] = std::cos(p);
        v[2] = std::cos(3 * p);
      },
      std::span<double>(out));
  EXPECT_NEAR(out[0], 1.0, 1e-14);
  EXPECT_NEAR(out[1], kCosAvg045, 1e-12);
  EXPECT_NEAR(out[2], kCos3Avg045, 1e-12);
}

TEST(Average, ReportsNonConvergence)
{
  QuadratureOptions opts;
  opts.max_order = 64;
  // far too oscillatory for a 64-point rule
  auto f = [](double p) { return std::cos(400.0 * p) + 1.0; };
  try {
    average(PhaseNoise(1.0), f, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("did not converge"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(" vs "), std::string::npos);
  }
}

TEST(Average, RejectsNonPositiveTolerance)
{
  EXPECT_THROW(average(PhaseNoise(0.2), [](double) { return 1.0; }, QuadratureOptions{0.0}), ArgumentError);
}

TEST(Average, ConcurrentCallsAgree)
{
  const PhaseNoise n(0.6);
  auto f = [](double p) { return std::exp(-4.0 * (1.0 + std::cos(p))); };
  const double ref = average(n, f);
  std::vector<double> got(4);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 4; ++t) pool.emplace_back([&, t] { got[t] = average(n, f); });
  }
  for (double g : got) EXPECT_EQ(g, ref);
}
