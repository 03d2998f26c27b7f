#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qrx/constellation.hpp"

using namespace qrx;

TEST(Constellation, MeanPhotonNumber)
{
  EXPECT_DOUBLE_EQ(mean_photon_number({0.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(mean_photon_number({-std::sqrt(2.0), std::sqrt(2.0)}), 2.0);
  EXPECT_EQ(mean_photon_number({0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(mean_photon_number({{1.0, 1.0}, {0.0, -2.0}}), 3.0);
}

TEST(Constellation, OokAndBpsk)
{
  const auto ook = make_ook(2.0);
  EXPECT_EQ(ook.alpha0, ComplexAmplitude(0.0));
  EXPECT_EQ(ook.alpha1, ComplexAmplitude(2.0));

  const auto bpsk = make_bpsk(2.0);
  EXPECT_NEAR(bpsk.alpha0.real(), -1.4142135623730950488, 1e-15);
  EXPECT_NEAR(bpsk.alpha1.real(), 1.4142135623730950488, 1e-15);

  EXPECT_EQ(make_ook(0.0), (BinaryConstellation{0.0, 0.0}));
  EXPECT_THROW(make_ook(-1.0), ArgumentError);
  EXPECT_THROW(make_bpsk(-1e-9), ArgumentError);
}

TEST(Constellation, PowerConstraintHoldsForStandardFamilies)
{
  for (double n = 0.0; n <= 20.0; n += 0.37) {
    EXPECT_NEAR(make_ook(n).mean_photon_number(), n, 1e-14 * (1 + n));
    EXPECT_NEAR(make_bpsk(n).mean_photon_number(), n, 1e-14 * (1 + n));
  }
}

TEST(Constellation, GlobalPhaseInvariance)
{
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const BinaryConstellation c{{g(gen), g(gen)}, {g(gen), g(gen)}};
    const auto rot = std::polar(1.0, 6.0 * g(gen));
    const BinaryConstellation r{c.alpha0 * rot, c.alpha1 * rot};
    EXPECT_NEAR(r.mean_photon_number(), c.mean_photon_number(), 1e-13);
  }
}

TEST(Constellation, Attenuation)
{
  const auto c = make_ook(2.0).attenuated(0.5);
  EXPECT_NEAR(c.mean_photon_number(), 1.0, 1e-15);
  EXPECT_THROW(make_ook(1.0).attenuated(1.5), ArgumentError);
}

TEST(Psd, TelecomCalibration)
{
  // h c / 1550 nm with exact SI constants (mpmath)
  constexpr double quantum = 1.281577972354147548e-19;
  EXPECT_NEAR(psd_watts_per_hz(1.0, 1550e-9), quantum, 1e-12 * quantum);
  EXPECT_NEAR(psd_watts_per_hz(2.0, 1550e-9), 2 * quantum, 1e-12 * quantum);
  EXPECT_EQ(psd_watts_per_hz(0.0, 800e-9), 0.0);
  EXPECT_NEAR(psd_watts_per_hz(3.3), 3.3 * quantum, 1e-12 * quantum);
}

TEST(Psd, LinearInPhotonNumber)
{
  const double unit = psd_watts_per_hz(1.0, 1310e-9);
  for (double n : {0.1, 0.5, 4.0, 17.0}) EXPECT_NEAR(psd_watts_per_hz(n, 1310e-9), n * unit, 1e-15 * n * unit);
}

TEST(Psd, RejectsBadWavelength)
{
  EXPECT_THROW(psd_watts_per_hz(1.0, 0.0), ArgumentError);
  EXPECT_THROW(psd_watts_per_hz(1.0, -1e-6), ArgumentError);
}
