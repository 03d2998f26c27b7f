#pragma once

// Symbol-by-symbol simulation of the phase-noise channel and the receivers,
// used as an independent check on the analytic error probabilities.
//
// Random numbers: xoshiro256** (Blackman & Vigna) seeded through splitmix64.
// Uniform doubles take the top 53 bits, normals use the basic Box-Muller
// transform (one normal per two uniforms), Poisson counts use inversion by
// sequential search. Trials are split into fixed shards of `shard_size`; shard
// s runs on its own generator seeded with `seed + s`, so the error count does
// not depend on how many worker threads execute the shards.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <thread>
#include <vector>

#include "qrx/constellation.hpp"
#include "qrx/error.hpp"
#include "qrx/phase_noise.hpp"
#include "qrx/receivers.hpp"

namespace qrx {

class Xoshiro256
{
 public:
  explicit Xoshiro256(std::uint64_t seed)
  {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t next()
  {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1p-53; }

  /// Standard normal by Box-Muller.
  double normal()
  {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Poisson variate by inversion. Means beyond ~700 underflow exp(-mean).
  std::uint64_t poisson(double mean)
  {
    if (mean <= 0.0) return 0;
    if (mean > 700.0) throw ArgumentError("Poisson mean too large for inversion sampling");
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    const std::uint64_t limit = static_cast<std::uint64_t>(mean * 10.0) + 1000;
    while (u >= cdf && k < limit) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  static std::uint64_t splitmix64(std::uint64_t& x)
  {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

enum class Scheme
{
  generalized_kennedy,
  homodyne,
};

struct TrialConfig
{
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::generalized_kennedy;
  unsigned jobs = 1;
  std::uint64_t shard_size = 1u << 20;
};

struct MonteCarloEstimate
{
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;

  /// (analytic - estimate) / std_error; zero when both agree exactly.
  double z_score(double analytic) const
  {
    const double diff = analytic - estimate;
    if (std_error > 0.0) return diff / std_error;
    return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  }
};

namespace detail {

inline std::uint64_t simulate_shard(const BinaryConstellation& c, const ReceiverConfig& cfg,
                                    const PhaseNoise& noise, Scheme scheme, Orientation o,
                                    std::uint64_t seed, std::uint64_t trials)
{
  Xoshiro256 rng(seed);
  const double sigma = noise.sigma();
  std::uint64_t errors = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const int bit = static_cast<int>(rng.next() >> 63);
    const double phi = sigma * rng.normal();
    const ComplexAmplitude received = (bit ? c.alpha1 : c.alpha0) * std::polar(1.0, phi);
    int decided;
    if (scheme == Scheme::homodyne) {
      const double x = std::numbers::sqrt2 * received.real() + std::sqrt(0.5) * rng.normal();
      decided = x > 0.0 ? 1 : 0;
    } else {
      const auto k = rng.poisson(std::norm(received + cfg.beta));
      const bool high = k > static_cast<std::uint64_t>(cfg.threshold_k);
      decided = (o == Orientation::standard) == high ? 1 : 0;
    }
    errors += decided != bit;
  }
  return errors;
}

}  // namespace detail

/**
 * Monte Carlo error rate. For the threshold receiver the count is compared
 * with `cfg.threshold_k` under orientation `o`; for homodyne the quadrature
 * is thresholded at zero (positive decides bit 1) and `cfg` is ignored.
 */
inline MonteCarloEstimate simulate_perr(const BinaryConstellation& c, const ReceiverConfig& cfg,
                                        const PhaseNoise& noise, const TrialConfig& t,
                                        Orientation o = Orientation::standard)
{
  if (t.trials < 1) throw ArgumentError("trials must be at least 1");
  if (t.shard_size < 1) throw ArgumentError("shard size must be at least 1");
  if (t.scheme == Scheme::generalized_kennedy) cfg.validate();

  const std::uint64_t shards = (t.trials + t.shard_size - 1) / t.shard_size;
  std::vector<std::uint64_t> errors(shards, 0);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t s = next++; s < shards; s = next++) {
      const std::uint64_t begin = s * t.shard_size;
      const std::uint64_t n = std::min(t.shard_size, t.trials - begin);
      errors[s] = detail::simulate_shard(c, cfg, noise, t.scheme, o, t.seed + s, n);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(t.jobs, static_cast<unsigned>(shards)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  MonteCarloEstimate r;
  r.trials = t.trials;
  for (auto e : errors) r.errors += e;
  r.estimate = static_cast<double>(r.errors) / static_cast<double>(r.trials);
  r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(r.trials));
  return r;
}

}  // namespace qrx
