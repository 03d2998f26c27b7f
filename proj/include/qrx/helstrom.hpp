#pragma once

// Quantum-optimal (Helstrom) discrimination of two phase-diffused coherent
// states, from the trace distance of their Fock-space density matrices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qrx/constellation.hpp"
#include "qrx/error.hpp"
#include "qrx/jacobi.hpp"
#include "qrx/phase_noise.hpp"
#include "qrx/receivers.hpp"

namespace qrx {

class FockDensityMatrix
{
 public:
  FockDensityMatrix() = default;
  explicit FockDensityMatrix(std::size_t dim)
      : dim_(dim)
      , rho_(dim * dim)
  {
  }

  std::size_t dim() const noexcept { return dim_; }
  std::complex<double>& operator()(std::size_t m, std::size_t n) { return rho_[m * dim_ + n]; }
  const std::complex<double>& operator()(std::size_t m, std::size_t n) const
  {
    return rho_[m * dim_ + n];
  }

  double trace() const
  {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += rho_[i * dim_ + i].real();
    return t;
  }

  /// Largest |rho_mn - conj(rho_nm)|.
  double hermiticity_defect() const
  {
    double worst = 0.0;
    for (std::size_t m = 0; m < dim_; ++m)
      for (std::size_t n = 0; n < dim_; ++n)
        worst = std::max(worst, std::abs((*this)(m, n) - std::conj((*this)(n, m))));
    return worst;
  }

  double purity() const
  {
    // tr(rho^2) = sum |rho_mn|^2 for Hermitian rho
    double s = 0.0;
    for (const auto& v : rho_) s += std::norm(v);
    return s;
  }

  bool is_real() const
  {
    return std::all_of(rho_.begin(), rho_.end(), [](const auto& v) { return v.imag() == 0.0; });
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::complex<double>> rho_;
};

inline constexpr double default_fock_tail = 1e-12;

/// Fock cut-off used for a pair of symbols: ceil(M + 10 sqrt(M + 1) + 20), M the larger |alpha|^2.
inline std::size_t default_fock_dim(const BinaryConstellation& c)
{
  const double m = std::max(std::norm(c.alpha0), std::norm(c.alpha1));
  return static_cast<std::size_t>(std::ceil(m + 10.0 * std::sqrt(m + 1.0) + 20.0));
}

/// Smallest dimension whose Poisson tail beyond it is below `tail`.
inline std::size_t required_fock_dim(ComplexAmplitude alpha, double tail = default_fock_tail)
{
  const double mean = std::norm(alpha);
  double cdf = 0.0;
  std::size_t n = 0;
  while (true) {
    cdf += detail::poisson_pmf(static_cast<int>(n), mean);
    ++n;
    if (1.0 - cdf <= tail) return n;
  }
}

/**
 * Density matrix of a coherent state after Gaussian phase diffusion,
 *
 *   rho_mn = e^{-|a|^2} a^m conj(a)^n / sqrt(m! n!) * exp(-(m - n)^2 sigma^2 / 2),
 *
 * where the last factor is <e^{i(m-n)phi}>_phi. Elements are built in log
 * space so that factorials never overflow.
 */
inline FockDensityMatrix phase_diffused_state(ComplexAmplitude alpha, const PhaseNoise& noise,
                                              std::size_t dim, double tail = default_fock_tail)
{
  if (dim == 0) throw ArgumentError("Fock dimension must be positive");
  const std::size_t needed = required_fock_dim(alpha, tail);
  if (dim < needed)
    throw ArgumentError("Fock dimension " + std::to_string(dim) + " too small for |alpha|^2 = " +
                        std::to_string(std::norm(alpha)) + "; need at least " +
                        std::to_string(needed));

  FockDensityMatrix rho(dim);
  const double mean = std::norm(alpha);
  if (mean == 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double log_amp = 0.5 * std::log(mean);
  const double arg = std::arg(alpha);
  const double s2 = noise.sigma() * noise.sigma();
  std::vector<double> half_log(dim);
  for (std::size_t n = 0; n < dim; ++n)
    half_log[n] = n * log_amp - 0.5 * detail::log_factorial(static_cast<int>(n));

  for (std::size_t m = 0; m < dim; ++m) {
    for (std::size_t n = 0; n < dim; ++n) {
      const double diff = static_cast<double>(m) - static_cast<double>(n);
      const double magnitude = std::exp(-mean + half_log[m] + half_log[n] - 0.5 * diff * diff * s2);
      rho(m, n) = m == n ? std::complex<double>(magnitude) : std::polar(magnitude, diff * arg);
    }
  }
  return rho;
}

/// Eigenvalues of rho1 - rho0, real-symmetric when possible, otherwise via
/// the 2N real embedding [[Re, -Im], [Im, Re]] (each eigenvalue appears twice).
inline std::vector<double> difference_eigenvalues(const FockDensityMatrix& rho0,
                                                  const FockDensityMatrix& rho1)
{
  if (rho0.dim() != rho1.dim()) throw ArgumentError("density matrices differ in dimension");
  const std::size_t n = rho0.dim();
  if (rho0.is_real() && rho1.is_real()) {
    SymmetricMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = rho1(i, j).real() - rho0(i, j).real();
    return jacobi_eigenvalues(std::move(d));
  }
  SymmetricMatrix d(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = rho1(i, j) - rho0(i, j);
      d(i, j) = v.real();
      d(i + n, j + n) = v.real();
      d(i + n, j) = v.imag();
      d(i, j + n) = -v.imag();
    }
  }
  auto doubled = jacobi_eigenvalues(std::move(d));
  std::vector<double> eig;
  eig.reserve(n);
  for (std::size_t i = 0; i < doubled.size(); i += 2) eig.push_back(0.5 * (doubled[i] + doubled[i + 1]));
  return eig;
}

/// Trace distance, half the sum of absolute eigenvalues of the difference.
inline double trace_distance(const FockDensityMatrix& rho0, const FockDensityMatrix& rho1)
{
  double s = 0.0;
  for (double l : difference_eigenvalues(rho0, rho1)) s += std::abs(l);
  return 0.5 * s;
}

/// Helstrom error probability (1 - D) / 2 for equiprobable phase-diffused symbols.
inline double perr_helstrom(const BinaryConstellation& c, const PhaseNoise& noise,
                            std::size_t dim = 0)
{
  if (dim == 0) dim = default_fock_dim(c);
  const auto rho0 = phase_diffused_state(c.alpha0, noise, dim);
  const auto rho1 = phase_diffused_state(c.alpha1, noise, dim);
  return std::clamp(0.5 * (1.0 - trace_distance(rho0, rho1)), 0.0, 0.5);
}

}  // namespace qrx
