#pragma once

// Gaussian phase averages <f(phi)>, phi ~ Normal(0, sigma^2), evaluated with
// rescaled Gauss-Hermite rules. The integration domain is the whole real
// line; phases are never wrapped into [-pi, pi).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrx/error.hpp"

namespace qrx {

/// Strength of a Gaussian phase-diffusion channel, in radians.
class PhaseNoise
{
 public:
  PhaseNoise() = default;
  explicit PhaseNoise(double sigma)
      : sigma_(sigma)
  {
    if (!std::isfinite(sigma) || sigma < 0.0)
      throw ArgumentError("phase noise sigma must be finite and non-negative");
  }

  double sigma() const noexcept { return sigma_; }
  bool is_noiseless() const noexcept { return sigma_ == 0.0; }

 private:
  double sigma_ = 0.0;
};

struct QuadratureRule
{
  std::vector<double> nodes;    // phases in radians
  std::vector<double> weights;  // normalised, sum to 1
  int order = 1;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Controls for the adaptive phase average.
struct QuadratureOptions
{
  double tolerance = 1e-10;
  int baseline_order = 32;
  int max_order = 512;
};

namespace detail {

/**
 * Eigenvalues of the symmetric tridiagonal matrix (diag 0, off-diagonal
 * `off`) by implicit QL with Wilkinson shifts, together with the first
 * component of each normalised eigenvector (Golub-Welsch).
 */
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double> off, std::vector<double>& z0)
{
  const int n = static_cast<int>(d.size());
  off.push_back(0.0);
  z0.assign(n, 0.0);
  z0[0] = 1.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(off[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw ConvergenceError("tridiagonal QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * off[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + off[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * off[i];
          const double b = c * off[i];
          r = std::hypot(f, g);
          off[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            off[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z0[i + 1];
          z0[i + 1] = s * z0[i] + c * f;
          z0[i] = c * z0[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        off[l] = g;
        off[m] = 0.0;
      }
    } while (m != l);
  }
}

/**
 * Gauss-Hermite nodes and weights for the weight exp(-x^2) on the real line.
 *
 * Golub-Welsch supplies starting nodes; each is then polished by Newton steps
 * on the orthonormal Hermite recurrence and its weight taken from the same
 * recurrence. The recurrence carries a running power-of-two scale so large
 * orders neither overflow in p_n nor underflow in the weights (extreme weights
 * simply flush to zero). Weights are returned divided by sqrt(pi). Nodes are in
 * decreasing order and exactly antisymmetric.
 */
inline void hermite_nodes_weights(int n, std::vector<double>& x, std::vector<double>& w)
{
  constexpr double pim4 = 0.7511255444649425;  // pi^(-1/4)
  std::vector<double> d(n, 0.0), off, z0;
  for (int i = 1; i < n; ++i) off.push_back(std::sqrt(0.5 * i));
  tridiagonal_ql(d, off, z0);
  std::sort(d.begin(), d.end(), std::greater<>());

  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = d[i];
    double log_p = 0.0;  // log |p_{n-1}(z)|
    for (int it = 0; it < 8; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      int scale = 0;  // p values carry a factor 2^scale
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
        if (std::abs(p1) > 0x1p+500) {
          p1 = std::ldexp(p1, -500);
          p2 = std::ldexp(p2, -500);
          scale += 500;
        }
      }
      log_p = std::log(std::abs(p2)) + scale * std::numbers::ln2;
      const double step = p1 / (std::sqrt(2.0 * n) * p2);
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    // w = 2 / (2n p_{n-1}^2), then divided by sqrt(pi)
    const double log_w =
        -std::log(static_cast<double>(n)) - 2.0 * log_p - 0.5 * std::log(std::numbers::pi);
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = std::exp(log_w);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) x[m - 1] = 0.0;
}

struct StandardRule
{
  std::vector<double> x;
  std::vector<double> w;
};

/// Unscaled rules are shared across threads and built once per order.
inline const StandardRule& standard_hermite_rule(int order)
{
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<StandardRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) {
    auto rule = std::make_unique<StandardRule>();
    hermite_nodes_weights(order, rule->x, rule->w);
    // renormalise away the last few ulps so the constant is integrated exactly
    double sum = 0.0;
    for (double v : rule->w) sum += v;
    for (double& v : rule->w) v /= sum;
    slot = std::move(rule);
  }
  return *slot;
}

/// `magnitude` is the average of |f|; differences at its roundoff level are
/// accepted, since cancellation makes anything tighter unattainable.
inline bool close_enough(double coarse, double fine, double tol, double magnitude = 0.0)
{
  const double diff = std::abs(fine - coarse);
  if (diff <= 64.0 * std::numeric_limits<double>::epsilon() * magnitude) return true;
  if (std::abs(fine) < tol) return diff < tol;
  return diff < tol * std::abs(fine);
}

}  // namespace detail

/// Rule with sum_i w_i f(phi_i) ~ <f>_phi; a single node at zero when sigma = 0.
inline QuadratureRule build_rule(const PhaseNoise& noise, int order)
{
  if (order <= 0) throw ArgumentError("quadrature order must be positive");
  QuadratureRule rule;
  rule.order = order;
  if (noise.is_noiseless()) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  const auto& base = detail::standard_hermite_rule(order);
  const double scale = std::numbers::sqrt2 * noise.sigma();
  rule.nodes.resize(base.x.size());
  for (std::size_t i = 0; i < base.x.size(); ++i) rule.nodes[i] = scale * base.x[i];
  rule.weights = base.w;
  return rule;
}

/// Fixed-rule evaluation of a vector-valued integrand.
template <class F>
void integrate(const QuadratureRule& rule, F&& f, std::span<double> out)
{
  std::vector<double> values(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (rule.weights[i] == 0.0) continue;
    f(rule.nodes[i], std::span<double>(values));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += rule.weights[i] * values[j];
  }
}

namespace detail {

template <class F>
void integrate_scaled(const StandardRule& base, double scale, F& f, std::span<double> out,
                      std::span<double> values, std::span<double> magnitude)
{
  std::fill(out.begin(), out.end(), 0.0);
  std::fill(magnitude.begin(), magnitude.end(), 0.0);
  for (std::size_t i = 0; i < base.x.size(); ++i) {
    if (base.w[i] == 0.0) continue;
    f(scale * base.x[i], values);
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] += base.w[i] * values[j];
      magnitude[j] += base.w[i] * std::abs(values[j]);
    }
  }
}

}  // namespace detail

/**
 * Adaptive Gaussian phase average of a vector-valued integrand.
 *
 * `f(phi, values)` fills `values` (size `out.size()`). The rule order starts
 * at `opts.baseline_order` and doubles. Each component is settled on its own,
 * at the first order whose estimate agrees with the previous one to
 * `opts.tolerance` (relative, or absolute for magnitudes below the
 * tolerance, or within roundoff of the average of |f|), and reports that
 * finer estimate. A component's result therefore
 * does not depend on which other components are averaged alongside it.
 */
template <class F>
void average_many(const PhaseNoise& noise, F&& f, std::span<double> out,
                  const QuadratureOptions& opts = {})
{
  if (!(opts.tolerance > 0.0)) throw ArgumentError("quadrature tolerance must be positive");
  if (noise.is_noiseless()) {
    f(0.0, out);
    return;
  }
  const std::size_t n = out.size();
  std::vector<double> scratch(4 * n);
  const std::span<double> values(scratch.data(), n);
  std::span<double> coarse(scratch.data() + n, n);
  std::span<double> fine(scratch.data() + 2 * n, n);
  const std::span<double> magnitude(scratch.data() + 3 * n, n);
  std::vector<char> settled(n, 0);
  std::size_t remaining = n;

  const double scale = std::numbers::sqrt2 * noise.sigma();
  int order = std::max(1, opts.baseline_order);
  detail::integrate_scaled(detail::standard_hermite_rule(order), scale, f, coarse, values, magnitude);
  while (remaining > 0) {
    order *= 2;
    if (order > opts.max_order) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "phase average did not converge by order " << opts.max_order
          << " (sigma = " << noise.sigma() << "); last estimates";
      int listed = 0;
      for (std::size_t j = 0; j < n && listed < 8; ++j)
        if (!settled[j]) msg << " [" << j << "] " << fine[j] << " vs " << coarse[j], ++listed;
      if (remaining > 8) msg << " ... (" << remaining << " unsettled)";
      throw ConvergenceError(msg.str());
    }
    detail::integrate_scaled(detail::standard_hermite_rule(order), scale, f, fine, values, magnitude);
    for (std::size_t j = 0; j < n; ++j) {
      if (settled[j] || !detail::close_enough(coarse[j], fine[j], opts.tolerance, magnitude[j])) continue;
      out[j] = fine[j];
      settled[j] = 1;
      --remaining;
    }
    std::swap(coarse, fine);
  }
}

/// Adaptive Gaussian phase average of a scalar integrand.
template <class F>
double average(const PhaseNoise& noise, F&& f, const QuadratureOptions& opts = {})
{
  double result = 0.0;
  average_many(
      noise, [&](double phi, std::span<double> v) { v[0] = f(phi); },
      std::span<double>(&result, 1), opts);
  return result;
}

inline double average(const PhaseNoise& noise, const std::function<double(double)>& f,
                      double tolerance)
{
  QuadratureOptions opts;
  opts.tolerance = tolerance;
  return average(noise, f, opts);
}

}  // namespace qrx
