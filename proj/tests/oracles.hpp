#pragma once

// Test-side reference implementations, kept deliberately independent of the
// library code paths they check.

#include <cmath>
#include <vector>

#include "rino/numerics.hpp"

namespace oracles {

// Gauss-Jordan inverse with partial pivoting.
inline rino::DenseMatrix gauss_jordan_inverse(rino::DenseMatrix a) {
  std::size_t n = a.rows;
  rino::DenseMatrix inv = rino::DenseMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    }
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
    }
    double d = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi, descending.
inline std::vector<double> jacobi_sym_eigenvalues(rino::DenseMatrix a) {
  std::size_t n = a.rows;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off < 1e-28) break;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::fabs(a(i, j)) < 1e-300) continue;
        double theta = (a(j, j) - a(i, i)) / (2.0 * a(i, j));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          double aik = a(i, k), ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double aki = a(k, i), akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

// Straight-line MLP evaluation at a single point (no batching, no reuse of
// library forward internals).
inline double naive_mlp_eval(const std::vector<rino::DenseMatrix>& weights,
                             const std::vector<std::vector<double>>& biases,
                             int activation,  // 0 sine, 1 relu, 2 tanh
                             double output_scale,
                             const std::vector<double>& x) {
  std::vector<double> h = x;
  for (std::size_t layer = 0; layer < weights.size(); ++layer) {
    const auto& w = weights[layer];
    std::vector<double> z(w.rows, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
      double s = biases[layer][i];
      for (std::size_t j = 0; j < w.cols; ++j) s += w(i, j) * h[j];
      z[i] = s;
    }
    if (layer + 1 < weights.size()) {
      for (auto& v : z) {
        if (activation == 0) v = std::sin(v);
        else if (activation == 1) v = v > 0 ? v : 0.0;
        else v = std::tanh(v);
      }
    }
    h = std::move(z);
  }
  return h[0] / output_scale;
}

}  // namespace oracles
