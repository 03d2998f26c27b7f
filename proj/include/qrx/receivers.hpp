#pragma once

// Error probabilities of the structured receivers: direct detection,
// homodyne, and the displacement + photon-number-resolving threshold
// receiver (Kennedy and its generalisation), all under Gaussian phase noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qrx/constellation.hpp"
#include "qrx/error.hpp"
#include "qrx/phase_noise.hpp"

namespace qrx {

namespace detail {

inline double log_factorial(int k)
{
  static const auto table = [] {
    std::array<double, 256> t{};
    for (int i = 1; i < 256; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  if (k < 256) return table[k];
  return std::lgamma(k + 1.0);
}

/// Poisson pmf evaluated in log space; exact 0/1 at mean zero.
inline double poisson_pmf(int k, double mean)
{
  if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(mean) - mean - log_factorial(k));
}

/// Mean photon number reaching the detector for phase phi: |alpha e^{i phi} + beta|^2.
inline double displaced_intensity(ComplexAmplitude alpha, ComplexAmplitude beta, double phi)
{
  return std::norm(alpha * std::polar(1.0, phi) + beta);
}

}  // namespace detail

/// Which symbol is declared when the count exceeds the threshold K.
enum class Orientation
{
  standard,  // k > K decides bit 1 (alpha1)
  swapped,   // k > K decides bit 0 (alpha0)
};

inline const char* to_string(Orientation o)
{
  return o == Orientation::standard ? "standard" : "swapped";
}

/// Displacement, count threshold and photon-number-resolution ceiling.
struct ReceiverConfig
{
  ComplexAmplitude beta{};
  int threshold_k = 0;
  int pnr_ceiling = 1;

  void validate() const
  {
    if (pnr_ceiling < 1) throw ArgumentError("PNR ceiling must be at least 1");
    if (threshold_k < 0) throw ArgumentError("count threshold must be non-negative");
    if (threshold_k >= pnr_ceiling)
      throw ConstraintError("count threshold K = " + std::to_string(threshold_k) +
                            " must stay below the PNR ceiling " + std::to_string(pnr_ceiling));
  }
};

struct PhotocountDistribution
{
  std::vector<double> probs;  // p_0 ... p_N
  int truncation = 0;         // N
  double tail_mass = 0.0;     // 1 - sum(probs)
};

// --- conventional detection ----------------------------------------------

/// On-off keying with direct detection: exp(-2 nbar) / 2. Immune to phase noise.
inline double perr_ook_dd(double nbar)
{
  check_nbar(nbar);
  return 0.5 * std::exp(-2.0 * nbar);
}

/// Shot-noise limited quadrature distribution, variance 1/2.
inline double homodyne_pdf(double x, ComplexAmplitude alpha)
{
  const double d = x - std::numbers::sqrt2 * alpha.real();
  return std::exp(-d * d) / std::sqrt(std::numbers::pi);
}

/// BPSK read out by homodyne detection with the threshold at x = 0. The x
/// integral is done in closed form, leaving <erfc(sqrt(2 nbar) cos phi)/2>.
inline double perr_bpsk_hom(double nbar, const PhaseNoise& noise, const QuadratureOptions& opts = {})
{
  check_nbar(nbar);
  const double a = std::sqrt(2.0 * nbar);
  return average(
      noise, [a](double phi) { return 0.5 * std::erfc(a * std::cos(phi)); }, opts);
}

/// Conventional-detection SQL: the better of OOK/DD and BPSK/homodyne.
inline double perr_sql_baseline(double nbar, const PhaseNoise& noise,
                                const QuadratureOptions& opts = {})
{
  return std::min(perr_ook_dd(nbar), perr_bpsk_hom(nbar, noise, opts));
}

/// Helstrom bound for two pure coherent states.
inline double perr_helstrom_noiseless(const BinaryConstellation& c)
{
  const double overlap = std::exp(-std::norm(c.alpha1 - c.alpha0));
  // 1 - sqrt(1 - x) rewritten without cancellation
  return 0.5 * overlap / (1.0 + std::sqrt(1.0 - overlap));
}

// --- photon counting after displacement ----------------------------------

/// p_k(alpha) = < |alpha e^{i phi} + beta|^{2k} exp(-|...|^2) / k! >_phi.
inline double photocount_probability(int k, ComplexAmplitude alpha, ComplexAmplitude beta,
                                     const PhaseNoise& noise, const QuadratureOptions& opts = {})
{
  if (k < 0) throw ArgumentError("photocount must be non-negative");
  return average(
      noise,
      [&](double phi) { return detail::poisson_pmf(k, detail::displaced_intensity(alpha, beta, phi)); },
      opts);
}

/// p_0 ... p_N in a single phase average; the remainder is reported as tail mass.
inline PhotocountDistribution photocount_distribution(ComplexAmplitude alpha, ComplexAmplitude beta,
                                                      const PhaseNoise& noise, int truncation,
                                                      const QuadratureOptions& opts = {})
{
  if (truncation < 0) throw ArgumentError("truncation must be non-negative");
  PhotocountDistribution dist;
  dist.truncation = truncation;
  dist.probs.resize(truncation + 1);
  average_many(
      noise,
      [&](double phi, std::span<double> v) {
        const double mu = detail::displaced_intensity(alpha, beta, phi);
        for (int k = 0; k <= truncation; ++k) v[k] = detail::poisson_pmf(k, mu);
      },
      std::span<double>(dist.probs), opts);
  double sum = 0.0;
  for (double& p : dist.probs) {
    p = std::clamp(p, 0.0, 1.0);
    sum += p;
  }
  dist.tail_mass = std::max(0.0, 1.0 - sum);
  return dist;
}

/// Smallest N whose noiseless Poisson tail beyond N is below `tail` for the
/// largest intensity any phase can produce.
inline int default_truncation(ComplexAmplitude alpha, ComplexAmplitude beta, double tail = 1e-12)
{
  const double peak = std::pow(std::abs(alpha) + std::abs(beta), 2);
  double cdf = 0.0;
  for (int n = 0;; ++n) {
    cdf += detail::poisson_pmf(n, peak);
    if (1.0 - cdf < tail || n > 100000) return n;
  }
}

namespace detail {

/**
 * Phase-averaged count CDFs P(k <= K) for both symbols and K = 0 ... n-1.
 * out[K] belongs to alpha0, out[n + K] to alpha1.
 */
inline void threshold_cdfs(const BinaryConstellation& c, ComplexAmplitude beta, int n,
                           const PhaseNoise& noise, std::span<double> out,
                           const QuadratureOptions& opts = {})
{
  average_many(
      noise,
      [&](double phi, std::span<double> v) {
        const std::array<ComplexAmplitude, 2> symbols{c.alpha0, c.alpha1};
        for (int s = 0; s < 2; ++s) {
          const double mu = displaced_intensity(symbols[s], beta, phi);
          double cdf = 0.0;
          if (mu > 600.0) {
            for (int k = 0; k < n; ++k) {
              cdf += poisson_pmf(k, mu);
              v[s * n + k] = cdf;
            }
          } else {
            // e^{-mu} mu^k / k! by recurrence; exp(-mu) is still representable
            double term = std::exp(-mu);
            for (int k = 0; k < n; ++k) {
              if (k > 0) term *= mu / k;
              cdf += term;
              v[s * n + k] = cdf;
            }
          }
        }
      },
      out, opts);
}

/// Error probability from the two CDFs at threshold K; the k > K tail is a complement.
inline double threshold_perr(double cdf0, double cdf1, Orientation o)
{
  const double p = o == Orientation::standard ? 0.5 * cdf1 + 0.5 * (1.0 - cdf0)
                                              : 0.5 * cdf0 + 0.5 * (1.0 - cdf1);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

struct KennedyEvaluation
{
  double perr = 0.5;
  Orientation orientation = Orientation::standard;
};

/// Threshold receiver error for one fixed decision-rule orientation.
inline double perr_threshold_rule(const BinaryConstellation& c, const ReceiverConfig& cfg,
                                  const PhaseNoise& noise, Orientation o,
                                  const QuadratureOptions& opts = {})
{
  cfg.validate();
  const int n = cfg.threshold_k + 1;
  std::vector<double> cdfs(2 * n);
  detail::threshold_cdfs(c, cfg.beta, n, noise, cdfs, opts);
  return detail::threshold_perr(cdfs[n - 1], cdfs[2 * n - 1], o);
}

/// Generalised Kennedy receiver: both orientations are tried and the better
/// one is reported. Ties resolve to the standard orientation.
inline KennedyEvaluation evaluate_generalized_kennedy(const BinaryConstellation& c,
                                                      const ReceiverConfig& cfg,
                                                      const PhaseNoise& noise,
                                                      const QuadratureOptions& opts = {})
{
  cfg.validate();
  const int n = cfg.threshold_k + 1;
  std::vector<double> cdfs(2 * n);
  detail::threshold_cdfs(c, cfg.beta, n, noise, cdfs, opts);
  const double standard = detail::threshold_perr(cdfs[n - 1], cdfs[2 * n - 1], Orientation::standard);
  const double swapped = detail::threshold_perr(cdfs[n - 1], cdfs[2 * n - 1], Orientation::swapped);
  if (swapped < standard) return {swapped, Orientation::swapped};
  return {standard, Orientation::standard};
}

inline double perr_generalized_kennedy(const BinaryConstellation& c, const ReceiverConfig& cfg,
                                       const PhaseNoise& noise, const QuadratureOptions& opts = {})
{
  return evaluate_generalized_kennedy(c, cfg, noise, opts).perr;
}

/// Kennedy's receiver for BPSK: displace by sqrt(nbar) so alpha0 is nulled, K = 0.
inline double perr_bpsk_kennedy(double nbar, const PhaseNoise& noise,
                                const QuadratureOptions& opts = {})
{
  const auto c = make_bpsk(nbar);
  ReceiverConfig cfg;
  cfg.beta = -c.alpha0;
  return perr_threshold_rule(c, cfg, noise, Orientation::standard, opts);
}

}  // namespace qrx
