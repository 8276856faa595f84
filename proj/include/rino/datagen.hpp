#pragma once

#include <cstdint>
#include <vector>

#include "rino/common.hpp"
#include "rino/dictionary.hpp"
#include "rino/numerics.hpp"

namespace rino {

// Isotropic RBF covariance exp(-|x1 - x2|^2 / (2 l^2)). The periodic variant
// (1D only) measures chordal distance on the unit circle, so draws wrap
// smoothly across the domain ends.
struct GrfConfig {
  Box domain = Box::unit(1);
  double length_scale = 0.2;
  bool periodic = false;
  double jitter = 1e-10;
};

DenseMatrix grf_kernel(const DenseMatrix& points, const GrfConfig& cfg);

// Zero-mean draw with covariance grf_kernel + jitter I via Cholesky. Values
// are tied to point identity, not ordering: rows are lex-sorted internally,
// so a permuted cloud with the same rng state yields permuted values.
std::vector<double> sample_grf(const DenseMatrix& points, const GrfConfig& cfg,
                               RngState& rng);

struct SolverOutput {
  DenseMatrix grid;
  std::vector<double> values;
  int newton_iterations = 0;
  double residual_norm = 0.0;
};

// s(x) = int_0^x u dt, cumulative trapezoid on the given sorted grid, s(0)=0.
SolverOutput solve_antiderivative(const std::vector<double>& x,
                                  const std::vector<double>& u);

// d/dx(-kappa(s) ds/dx) = u with kappa(s) = 0.2 + s^2 and s(0) = s(1) = 0.
// u lives on a uniform grid of u.size() nodes on [0,1]. Conservative second
// order differences, damped Newton, residual below 1e-10.
SolverOutput solve_darcy_1d(const std::vector<double>& u);

// div(-kappa(s) grad s) = u on [0,1]^2, homogeneous Dirichlet. u holds n*n
// values in dense_grid ordering (x outer, y inner). Residual below 1e-9.
SolverOutput solve_darcy_2d(const std::vector<double>& u, int n);

// Viscous Burgers s_t + s s_x = nu s_xx, periodic on x in [0,1],
// pseudo-spectral in space with 2/3-rule dealiasing, integrating-factor Heun
// in time (`linear` switches the advection term to plain s_x). u0 holds 101
// values at x_j = j/100 with u0[100] == u0[0]. The output covers 100 time
// slices t = 0.01 .. 1.00: row k*101 + j holds (x_j, t_k).
SolverOutput solve_burgers(const std::vector<double>& u0, double nu = 0.01,
                           int nt = 1000, bool linear = false);

struct SubsampleConfig {
  int m_min = 1;
  int m_max = 1;
};

// Keeps M_rand ~ U[m_min, m_max] points without replacement, preserving the
// original point order.
PointCloudSignal subsample_signal(const PointCloudSignal& signal,
                                  const SubsampleConfig& cfg, RngState& rng);

// Rank-3 synthetic dataset on [0,1]: values(i,j) = sum_l coeffs(i,l) psi_l(x_j)
// with psi_1 = P6(2x-1), psi_2 = cos(3.3 pi x), psi_3 = 2|2x-1| - 1 and
// coefficients drawn i.i.d. N(0,1).
struct ThreeBasisData {
  DenseMatrix grid;    // m x 1
  DenseMatrix values;  // n x m
  DenseMatrix coeffs;  // n x 3
};

ThreeBasisData make_three_basis_dataset(int n, int m, RngState& rng);

struct BoolMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> data;  // 1 = masked (hidden)

  std::uint8_t operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

// Masks exactly round(m * r_percent / 100) entries per row, positions uniform
// without replacement.
BoolMask mask_matrix(std::size_t n, std::size_t m, double r_percent,
                     RngState& rng);

}  // namespace rino
