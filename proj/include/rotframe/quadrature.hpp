// Gauss-Legendre and Gauss-Hermite nodes/weights.  Legendre nodes come from
// Newton iteration on the recurrence; Hermite nodes from Golub-Welsch on the
// symmetric tridiagonal recurrence matrix (deterministic Jacobi eigensolve).
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rotframe/jacobi.hpp"

namespace rotframe {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre on [-1, 1].
inline Quadrature gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  Quadrature q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    q.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

// n-point Gauss-Hermite for the weight exp(-x^2) on (-inf, inf).
inline Quadrature gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(0.5 * i);
    t(i, i - 1) = b;
    t(i - 1, i) = b;
  }
  const SymmetricEigen eig = jacobi_eigen(t);
  Quadrature q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const double sqrt_pi = 1.7724538509055160273;
  for (int i = 0; i < n; ++i) {
    q.nodes[static_cast<std::size_t>(i)] = eig.values(i);
    const double v0 = eig.vectors(0, i);
    q.weights[static_cast<std::size_t>(i)] = sqrt_pi * v0 * v0;
  }
  return q;
}

}  // namespace rotframe
