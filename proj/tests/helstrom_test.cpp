#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qrx/helstrom.hpp"
#include "qrx/receivers.hpp"

using namespace qrx;

TEST(FockState, VacuumForAnyNoise)
{
  for (double s : {0.0, 0.4, 3.0}) {
    const auto rho = phase_diffused_state(0.0, PhaseNoise(s), 12);
    for (std::size_t m = 0; m < 12; ++m)
      for (std::size_t n = 0; n < 12; ++n) EXPECT_EQ(rho(m, n), std::complex<double>(m == 0 && n == 0 ? 1.0 : 0.0));
  }
}

TEST(FockState, NoiselessIsCoherentProjector)
{
  const ComplexAmplitude a(1.1, -0.6);
  const auto rho = phase_diffused_state(a, PhaseNoise(0.0), 40);
  for (std::size_t m = 0; m < 6; ++m) {
    for (std::size_t n = 0; n < 6; ++n) {
      const auto expect = std::exp(-std::norm(a)) * std::pow(a, double(m)) * std::pow(std::conj(a), double(n)) /
                          std::sqrt(std::tgamma(m + 1.0) * std::tgamma(n + 1.0));
      EXPECT_NEAR(std::abs(rho(m, n) - expect), 0.0, 1e-15);
    }
  }
  EXPECT_NEAR(rho.purity(), 1.0, 1e-12);
}

TEST(FockState, FullDephasingLeavesPoissonDiagonal)
{
  const double mean = 4.0;
  const auto rho = phase_diffused_state(2.0, PhaseNoise(50.0), 47);
  for (std::size_t m = 0; m < 47; ++m) {
    for (std::size_t n = 0; n < 47; ++n) {
      if (m == n)
        EXPECT_NEAR(rho(m, m).real(), std::exp(-mean) * std::pow(mean, double(m)) / std::tgamma(m + 1.0), 1e-15);
      else
        EXPECT_LT(std::abs(rho(m, n)), 1e-12);
    }
  }
}

TEST(FockState, DephasingFactorMatchesPhaseAverage)
{
  // the closed-form off-diagonal factor must equal <e^{i d phi}>, whose
  // imaginary part vanishes for the even Gaussian
  for (double s : {0.1, 0.45, 0.9}) {
    const PhaseNoise noise(s);
    for (int d = 1; d <= 15; ++d) {
      const double re = average(noise, [d](double p) { return std::cos(d * p); });
      const double im = average(noise, [d](double p) { return std::sin(d * p); });
      EXPECT_NEAR(re, std::exp(-0.5 * d * d * s * s), 1e-12);
      EXPECT_NEAR(im, 0.0, 1e-14);
    }
    const ComplexAmplitude a(0.9, 0.4);
    const auto pure = phase_diffused_state(a, PhaseNoise(0.0), 30);
    const auto mixed = phase_diffused_state(a, noise, 30);
    for (std::size_t m = 0; m < 8; ++m)
      for (std::size_t n = 0; n < 8; ++n) {
        const int d = int(m) - int(n);
        const double factor = average(noise, [d](double p) { return std::cos(d * p); });
        EXPECT_NEAR(std::abs(mixed(m, n) - pure(m, n) * factor), 0.0, 1e-13);
      }
  }
}

TEST(FockState, StructuralInvariants)
{
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-2.5, 2.5), us(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const ComplexAmplitude a(u(gen), u(gen));
    const PhaseNoise noise(us(gen));
    const std::size_t dim = default_fock_dim({a, 0.0});
    const auto rho = phase_diffused_state(a, noise, dim);
    EXPECT_LT(rho.hermiticity_defect(), 1e-12);
    EXPECT_LE(rho.trace(), 1.0 + 1e-14);
    EXPECT_GE(rho.trace(), 1.0 - default_fock_tail);
    for (std::size_t i = 0; i < dim; ++i) EXPECT_GE(rho(i, i).real(), 0.0);
    // positive semidefinite: rho - 0 has no eigenvalue below the truncation bound
    const FockDensityMatrix zero(dim);
    for (double l : difference_eigenvalues(zero, rho)) EXPECT_GE(l, -1e-10);
  }
}

TEST(FockState, TooSmallDimensionNamesRequirement)
{
  try {
    phase_diffused_state(3.0, PhaseNoise(0.1), 10);
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("need at least " + std::to_string(required_fock_dim(3.0))), std::string::npos) << msg;
  }
  EXPECT_THROW(phase_diffused_state(0.0, PhaseNoise(0.1), 0), ArgumentError);
}

TEST(Helstrom, NoiselessMatchesClosedForm)
{
  EXPECT_NEAR(perr_helstrom(make_bpsk(2.0), PhaseNoise(0.0)), 8.387269160402486357e-5, 1e-12);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 15; ++t) {
    const BinaryConstellation c{{u(gen), u(gen) * (t % 2)}, {u(gen), u(gen) * (t % 2)}};
    if (c.mean_photon_number() > 10.0) continue;
    EXPECT_NEAR(perr_helstrom(c, PhaseNoise(0.0)), perr_helstrom_noiseless(c), 1e-8);
  }
}

TEST(Helstrom, FullDephasingOok)
{
  EXPECT_NEAR(perr_helstrom(make_ook(2.0), PhaseNoise(50.0)), 0.5 * std::exp(-4.0), 1e-6);
}

TEST(Helstrom, IdenticalStates)
{
  for (double s : {0.0, 0.3, 2.0}) EXPECT_NEAR(perr_helstrom({{1.0, 0.5}, {1.0, 0.5}}, PhaseNoise(s)), 0.5, 1e-12);
}

TEST(Helstrom, NonDecreasingInSigma)
{
  for (const auto& c : {make_bpsk(2.0), make_ook(2.0), BinaryConstellation{-0.3, 1.97}}) {
    double prev = 0.0;
    for (double s = 0.0; s <= 1.2; s += 0.1) {
      const double p = perr_helstrom(c, PhaseNoise(s));
      EXPECT_GE(p, prev - 1e-12) << s;
      prev = p;
    }
  }
}

TEST(Helstrom, RobustToDimension)
{
  for (double s : {0.0, 0.2, 0.6}) {
    const auto c = BinaryConstellation{-1.2, 1.6};
    const std::size_t dim = default_fock_dim(c);
    EXPECT_NEAR(perr_helstrom(c, PhaseNoise(s), dim), perr_helstrom(c, PhaseNoise(s), 2 * dim), 1e-9);
  }
}

TEST(Helstrom, DifferenceIsTraceless)
{
  const BinaryConstellation c{{0.3, -0.8}, {1.5, 0.2}};
  const std::size_t dim = default_fock_dim(c);
  const PhaseNoise n(0.35);
  double sum = 0.0;
  for (double l : difference_eigenvalues(phase_diffused_state(c.alpha0, n, dim), phase_diffused_state(c.alpha1, n, dim)))
    sum += l;
  EXPECT_NEAR(sum, 0.0, 1e-9);
}

TEST(Helstrom, ComplexEmbeddingAgreesWithRealPath)
{
  // a common phase rotation makes the matrices complex without changing the answer
  const BinaryConstellation c{-0.4, 1.8};
  const auto rot = std::polar(1.0, 0.7);
  const BinaryConstellation r{c.alpha0 * rot, c.alpha1 * rot};
  for (double s : {0.0, 0.45}) EXPECT_NEAR(perr_helstrom(r, PhaseNoise(s)), perr_helstrom(c, PhaseNoise(s)), 1e-12);
}

TEST(Helstrom, LowerBoundsThresholdReceiver)
{
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0), us(0.0, 0.8);
  for (int t = 0; t < 20; ++t) {
    const BinaryConstellation c{u(gen), u(gen)};
    const PhaseNoise n(us(gen));
    const ReceiverConfig cfg{u(gen), t % 3, 3};
    EXPECT_LE(perr_helstrom(c, n), perr_generalized_kennedy(c, cfg, n) + 1e-12);
  }
}
