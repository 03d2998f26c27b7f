#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "qrx/error.hpp"

namespace qrx {

/// Dense square matrix of doubles, row-major.
class SymmetricMatrix
{
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n)
      : n_(n)
      , a_(n * n, 0.0)
  {
  }

  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  double off_diagonal_norm() const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j) s += a_[i * n_ + j] * a_[i * n_ + j];
    return std::sqrt(s);
  }

  double frobenius_norm() const
  {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

struct JacobiOptions
{
  int max_sweeps = 100;
  double relative_tolerance = 1e-15;
};

/**
 * Eigenvalues of a real symmetric matrix by the cyclic Jacobi method.
 *
 * Each sweep visits every off-diagonal pair once and annihilates it with a
 * plane rotation (Rutishauser's stable update). Iteration stops when the
 * off-diagonal Frobenius norm falls below `relative_tolerance` times the norm
 * of the input. Eigenvalues are returned in ascending order.
 */
inline std::vector<double> jacobi_eigenvalues(SymmetricMatrix a, const JacobiOptions& opts = {})
{
  const std::size_t n = a.dim();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
  if (n <= 1) return d;

  const double scale = a.frobenius_norm();
  if (scale == 0.0) return d;
  const double target = opts.relative_tolerance * scale;

  std::vector<double> b(d), z(n, 0.0);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (a.off_diagonal_norm() <= target) {
      std::sort(d.begin(), d.end());
      return d;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double h = d[q] - d[p];
        double t;
        if (std::abs(apq) < 1e-300 * std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double shift = t * apq;
        z[p] -= shift;
        z[q] += shift;
        d[p] -= shift;
        d[q] += shift;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        auto rotate = [&](std::size_t i1, std::size_t j1, std::size_t i2, std::size_t j2) {
          const double g = a(i1, j1);
          const double hh = a(i2, j2);
          a(i1, j1) = g - s * (hh + g * tau);
          a(i2, j2) = hh + s * (g - hh * tau);
          a(j1, i1) = a(i1, j1);
          a(j2, i2) = a(i2, j2);
        };
        for (std::size_t r = 0; r < p; ++r) rotate(r, p, r, q);
        for (std::size_t r = p + 1; r < q; ++r) rotate(p, r, r, q);
        for (std::size_t r = q + 1; r < n; ++r) rotate(p, r, q, r);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      b[i] += z[i];
      d[i] = b[i];
      z[i] = 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) a(i, i) = d[i];
  }
  std::ostringstream msg;
  msg << "Jacobi eigen-solver did not converge in " << opts.max_sweeps << " sweeps (dim " << n
      << ", off-diagonal norm " << a.off_diagonal_norm() << ", matrix norm " << scale << ")";
  throw NumericalError(msg.str());
}

}  // namespace qrx
