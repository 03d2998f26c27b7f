#pragma once

#include <cmath>
#include <complex>

#include "qrx/error.hpp"

namespace qrx {

/// Field amplitude in units of sqrt(photons): |alpha|^2 is the mean photon number.
using ComplexAmplitude = std::complex<double>;

/// Two equiprobable symbols alpha0 (bit 0) and alpha1 (bit 1).
struct BinaryConstellation
{
  ComplexAmplitude alpha0{};
  ComplexAmplitude alpha1{};

  /// Average photon number per symbol, (|alpha0|^2 + |alpha1|^2) / 2.
  double mean_photon_number() const noexcept
  {
    return 0.5 * (std::norm(alpha0) + std::norm(alpha1));
  }

  /// Both symbols multiplied by sqrt(eta); models a detector of efficiency eta.
  BinaryConstellation attenuated(double eta) const
  {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ArgumentError("efficiency must lie in [0, 1]");
    const double s = std::sqrt(eta);
    return {s * alpha0, s * alpha1};
  }

  bool operator==(const BinaryConstellation&) const = default;
};

inline double mean_photon_number(const BinaryConstellation& c) noexcept
{
  return c.mean_photon_number();
}

inline void check_nbar(double nbar)
{
  if (!std::isfinite(nbar) || nbar < 0.0)
    throw ArgumentError("mean photon number must be finite and non-negative");
}

/// On-off keying: (0, sqrt(2 nbar)).
inline BinaryConstellation make_ook(double nbar)
{
  check_nbar(nbar);
  return {0.0, std::sqrt(2.0 * nbar)};
}

/// Binary phase shift keying: (-sqrt(nbar), +sqrt(nbar)).
inline BinaryConstellation make_bpsk(double nbar)
{
  check_nbar(nbar);
  const double a = std::sqrt(nbar);
  return {-a, a};
}

namespace constants {
inline constexpr double planck = 6.62607015e-34;      // J s, exact (SI 2019)
inline constexpr double speed_of_light = 299792458.0;  // m / s, exact
inline constexpr double telecom_wavelength = 1550e-9;  // m
}  // namespace constants

/// Power spectral density (W/Hz) of nbar photons per symbol at one symbol per
/// unit time-bandwidth product: nbar * h * c / lambda.
inline double psd_watts_per_hz(double nbar, double wavelength = constants::telecom_wavelength)
{
  check_nbar(nbar);
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw ArgumentError("wavelength must be positive");
  return nbar * constants::planck * constants::speed_of_light / wavelength;
}

}  // namespace qrx
