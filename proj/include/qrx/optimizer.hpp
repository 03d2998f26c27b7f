#pragma once

// Minimisation of the threshold-receiver error probability over the
// constellation, the displacement and the count threshold, at fixed average
// photon number and PNR ceiling.
//
// Both symbols and the displacement live on the real axis. The constellation
// is parametrised by an angle theta,
//
//   alpha0 = sqrt(2 nbar) cos(theta),  alpha1 = sqrt(2 nbar) sin(theta),
//
// so every candidate meets the power budget exactly. The search is a dense
// (theta, beta) grid for every K, followed by golden-section coordinate
// descent from the best grid minima of each K.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qrx/constellation.hpp"
#include "qrx/error.hpp"
#include "qrx/helstrom.hpp"
#include "qrx/phase_noise.hpp"
#include "qrx/receivers.hpp"

namespace qrx {

inline BinaryConstellation parametrize(double theta, double nbar)
{
  check_nbar(nbar);
  const double r = std::sqrt(2.0 * nbar);
  return {r * std::cos(theta), r * std::sin(theta)};
}

struct OptimizationProblem
{
  double nbar = 2.0;
  PhaseNoise noise{};
  int pnr_ceiling = 8;
  int grid_resolution = 181;       // theta points on [0, pi)
  int beta_resolution = 241;       // beta points on [-beta_max, beta_max]
  double refine_tolerance = 1e-8;  // in theta and beta
  int seeds_per_threshold = 5;
  int max_refine_iterations = 200;
  unsigned jobs = 1;
  QuadratureOptions quadrature{};

  double beta_max() const { return 3.0 * std::sqrt(2.0 * nbar); }

  void validate() const
  {
    if (!(nbar > 0.0) || !std::isfinite(nbar)) throw ArgumentError("nbar must be positive");
    if (pnr_ceiling < 1) throw ArgumentError("PNR ceiling must be at least 1");
    if (grid_resolution < 2 || beta_resolution < 2)
      throw ArgumentError("grid resolutions must be at least 2");
    if (!(refine_tolerance > 0.0)) throw ArgumentError("refine tolerance must be positive");
    if (seeds_per_threshold < 1) throw ArgumentError("need at least one seed per threshold");
  }
};

struct TracePoint
{
  int iteration = 0;
  double perr = 0.5;
};

struct OptimizationResult
{
  BinaryConstellation constellation{};
  ReceiverConfig config{};
  double theta = 0.0;
  double perr = 0.5;
  double perr_sql = 0.5;
  double perr_helstrom = 0.5;
  Orientation orientation = Orientation::standard;
  double best_grid_perr = 0.5;
  std::vector<TracePoint> trace;
};

namespace detail {

struct Candidate
{
  double theta = 0.0;
  double beta = 0.0;
  int k = 0;
  double perr = 1.0;
  Orientation orientation = Orientation::standard;
};

/// Lower error wins; within 1e-12 prefer smaller K, then smaller |beta|, then smaller theta.
inline bool better(const Candidate& a, const Candidate& b)
{
  if (std::abs(a.perr - b.perr) > 1e-12) return a.perr < b.perr;
  if (a.k != b.k) return a.k < b.k;
  if (std::abs(a.beta) != std::abs(b.beta)) return std::abs(a.beta) < std::abs(b.beta);
  if (a.theta != b.theta) return a.theta < b.theta;
  return a.perr < b.perr;
}

/// Lowest error, except that any candidate within 1e-12 of it is eligible and
/// the `better` order breaks the tie. Unlike a running `better` scan this never
/// drifts above the minimum by more than the tie window.
inline Candidate select_best(const std::vector<Candidate>& pool)
{
  double lowest = pool.front().perr;
  for (const auto& c : pool) lowest = std::min(lowest, c.perr);
  const Candidate* pick = nullptr;
  for (const auto& c : pool) {
    if (c.perr > lowest + 1e-12) continue;
    if (!pick || better(c, *pick)) pick = &c;
  }
  return *pick;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn)
{
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      if (failed) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

/**
 * Golden-section search for a minimum of f on [lo, hi] down to width `tol`.
 * Returns the best abscissa evaluated (the bracket midpoint is not trusted).
 */
inline double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol)
{
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  double best_x = f1 <= f2 ? x1 : x2;
  double best_f = std::min(f1, f2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
      if (f1 < best_f) best_f = f1, best_x = x1;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
      if (f2 < best_f) best_f = f2, best_x = x2;
    }
  }
  return best_x;
}

}  // namespace detail

/// Threshold-receiver error at a parametrised point, both orientations tried.
inline KennedyEvaluation evaluate_point(const OptimizationProblem& p, double theta, double beta, int k)
{
  ReceiverConfig cfg{beta, k, p.pnr_ceiling};
  return evaluate_generalized_kennedy(parametrize(theta, p.nbar), cfg, p.noise, p.quadrature);
}

inline OptimizationResult optimize(const OptimizationProblem& p)
{
  p.validate();
  const int nk = p.pnr_ceiling;
  const int nt = p.grid_resolution;
  const int nb = p.beta_resolution;
  const double beta_max = p.beta_max();
  const double theta_step = std::numbers::pi / nt;
  const double beta_step = 2.0 * beta_max / (nb - 1);
  auto theta_at = [&](int i) { return i * theta_step; };
  auto beta_at = [&](int j) { return -beta_max + j * beta_step; };

  // Stage 1: grid[k][i * nb + j], all thresholds from one phase average per point.
  std::vector<std::vector<double>> grid(nk, std::vector<double>(std::size_t(nt) * nb));
  detail::parallel_for(std::size_t(nt), p.jobs, [&](std::size_t row) {
    const int i = static_cast<int>(row);
    std::vector<double> cdfs(2 * nk);
    const auto c = parametrize(theta_at(i), p.nbar);
    for (int j = 0; j < nb; ++j) {
      try {
        detail::threshold_cdfs(c, beta_at(j), nk, p.noise, cdfs, p.quadrature);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at grid point theta = " +
                             std::to_string(theta_at(i)) + ", beta = " + std::to_string(beta_at(j)));
      }
      for (int k = 0; k < nk; ++k) {
        const double a = detail::threshold_perr(cdfs[k], cdfs[nk + k], Orientation::standard);
        const double b = detail::threshold_perr(cdfs[k], cdfs[nk + k], Orientation::swapped);
        grid[k][std::size_t(i) * nb + j] = std::min(a, b);
      }
    }
  });

  // Seeds: the lowest grid-local minima of each K (theta wraps, beta does not).
  std::vector<detail::Candidate> seeds;
  for (int k = 0; k < nk; ++k) {
    const auto& g = grid[k];
    std::vector<detail::Candidate> minima;
    for (int i = 0; i < nt; ++i) {
      for (int j = 0; j < nb; ++j) {
        const double v = g[std::size_t(i) * nb + j];
        bool local = true;
        for (int di = -1; di <= 1 && local; ++di) {
          for (int dj = -1; dj <= 1 && local; ++dj) {
            if (di == 0 && dj == 0) continue;
            const int jj = j + dj;
            if (jj < 0 || jj >= nb) continue;
            const int ii = (i + di + nt) % nt;
            // wrapping theta by pi flips both amplitudes' signs; mirror beta with it
            const int jm = (i + di < 0 || i + di >= nt) ? nb - 1 - jj : jj;
            if (g[std::size_t(ii) * nb + jm] < v) local = false;
          }
        }
        if (local) minima.push_back({theta_at(i), beta_at(j), k, v, Orientation::standard});
      }
    }
    std::sort(minima.begin(), minima.end(), detail::better);
    if (minima.size() > std::size_t(p.seeds_per_threshold)) minima.resize(p.seeds_per_threshold);
    seeds.insert(seeds.end(), minima.begin(), minima.end());
  }

  // Re-score seeds with the single-threshold evaluator used during refinement,
  // so that refined and seed values are directly comparable.
  for (auto& s : seeds) {
    const auto e = evaluate_point(p, s.theta, s.beta, s.k);
    s.perr = e.perr;
    s.orientation = e.orientation;
  }

  OptimizationResult result;
  result.best_grid_perr = seeds.front().perr;
  for (const auto& s : seeds) result.best_grid_perr = std::min(result.best_grid_perr, s.perr);
  int iteration = 0;
  result.trace.push_back({iteration, result.best_grid_perr});

  // Stage 2: coordinate-wise golden-section refinement of each seed.
  std::vector<detail::Candidate> refined(seeds.size());
  detail::parallel_for(seeds.size(), p.jobs, [&](std::size_t s) {
    detail::Candidate cur = seeds[s];
    auto consider = [&](double theta, double beta) {
      const auto e = evaluate_point(p, theta, beta, cur.k);
      detail::Candidate c{theta, beta, cur.k, e.perr, e.orientation};
      if (detail::better(c, cur)) cur = c;
      return e.perr;
    };
    double h_theta = theta_step;
    double h_beta = beta_step;
    for (int it = 0; it < p.max_refine_iterations; ++it) {
      const auto before = cur;
      const double beta_fixed = cur.beta;
      detail::golden_section([&](double t) { return consider(t, beta_fixed); }, cur.theta - h_theta,
                             cur.theta + h_theta, p.refine_tolerance);
      const double theta_fixed = cur.theta;
      detail::golden_section([&](double b) { return consider(theta_fixed, b); }, cur.beta - h_beta,
                             cur.beta + h_beta, p.refine_tolerance);
      const double dt = std::abs(cur.theta - before.theta);
      const double db = std::abs(cur.beta - before.beta);
      if (dt < p.refine_tolerance && db < p.refine_tolerance) break;
      // keep the bracket a few moves wide, but never below the tolerance scale
      h_theta = std::clamp(4.0 * dt, 10.0 * p.refine_tolerance, theta_step);
      h_beta = std::clamp(4.0 * db, 10.0 * p.refine_tolerance, beta_step);
    }
    refined[s] = cur;
  });

  double running = result.best_grid_perr;
  for (const auto& r : refined) {
    running = std::min(running, r.perr);
    result.trace.push_back({++iteration, running});
  }
  std::vector<detail::Candidate> pool = seeds;
  pool.insert(pool.end(), refined.begin(), refined.end());
  const detail::Candidate best = detail::select_best(pool);

  // Report the best point with the labels arranged so that k > K decides
  // alpha1 (swapping the symbols maps theta to pi/2 - theta), and theta folded
  // into [0, pi): theta + pi flips both symbols, absorbed by flipping beta.
  auto fold = [](double theta, double& beta) {
    theta = std::fmod(theta, 2.0 * std::numbers::pi);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    if (theta >= std::numbers::pi) {
      theta -= std::numbers::pi;
      beta = -beta;
    }
    return theta;
  };
  double beta = best.beta;
  double theta = best.theta;
  if (best.orientation == Orientation::swapped) theta = 0.5 * std::numbers::pi - theta;
  theta = fold(theta, beta);
  result.theta = theta;
  result.constellation = parametrize(theta, p.nbar);
  result.config = ReceiverConfig{beta, best.k, p.pnr_ceiling};
  const auto final_eval =
      evaluate_generalized_kennedy(result.constellation, result.config, p.noise, p.quadrature);
  result.perr = final_eval.perr;
  result.orientation = final_eval.orientation;
  result.perr_sql = perr_sql_baseline(p.nbar, p.noise, p.quadrature);
  result.perr_helstrom = perr_helstrom(result.constellation, p.noise);
  return result;
}

/// Constellation minimising the Helstrom error at fixed nbar (real symbols).
struct HelstromOptimum
{
  BinaryConstellation constellation{};
  double theta = 0.0;
  double perr = 0.5;
};

inline HelstromOptimum optimize_helstrom(double nbar, const PhaseNoise& noise, int grid = 90,
                                         double tolerance = 1e-7)
{
  if (!(nbar > 0.0)) throw ArgumentError("nbar must be positive");
  if (grid < 3) throw ArgumentError("Helstrom grid needs at least 3 points");
  auto f = [&](double theta) { return perr_helstrom(parametrize(theta, nbar), noise); };
  const double step = std::numbers::pi / grid;
  HelstromOptimum best;
  best.perr = 1.0;
  for (int i = 0; i < grid; ++i) {
    const double v = f(i * step);
    if (v < best.perr) best.perr = v, best.theta = i * step;
  }
  const double centre = best.theta;
  detail::golden_section(
      [&](double t) {
        const double v = f(t);
        if (v < best.perr) best.perr = v, best.theta = t;
        return v;
      },
      centre - step, centre + step, tolerance);
  best.constellation = parametrize(best.theta, nbar);
  return best;
}

struct SweepRow
{
  int pnr_ceiling = 1;
  double sigma = 0.0;
  std::optional<OptimizationResult> result;
  std::string error;  // set when the cell failed
};

/// One optimisation per (PNR, sigma) cell; rows ordered by PNR then sigma.
/// Failed cells keep their error message instead of aborting the sweep.
inline std::vector<SweepRow> sweep_sigma(const OptimizationProblem& base,
                                         const std::vector<double>& sigmas,
                                         const std::vector<int>& pnr_list)
{
  if (sigmas.empty() || pnr_list.empty()) throw ArgumentError("sweep lists must be non-empty");
  std::vector<SweepRow> rows;
  for (int pnr : pnr_list)
    for (double s : sigmas) rows.push_back({pnr, s, std::nullopt, {}});

  OptimizationProblem inner = base;
  inner.jobs = 1;
  detail::parallel_for(rows.size(), base.jobs, [&](std::size_t r) {
    auto& row = rows[r];
    try {
      OptimizationProblem p = inner;
      p.noise = PhaseNoise(row.sigma);
      p.pnr_ceiling = row.pnr_ceiling;
      row.result = optimize(p);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace qrx
