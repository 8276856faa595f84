#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rino/common.hpp"

namespace rino {

// Row-major dense matrix. Sized for desk-scale problems (thousands of rows);
// everything is plain double storage so results are bitwise reproducible.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows_in);
};

// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// C = A^T * B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// y = A * x
std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x);

// Lower Cholesky factor of A + jitter*I. If factorization fails the jitter is
// escalated by 10x (starting at 1e-12 when zero) for at most three retries,
// then NotPositiveDefinite is thrown. used_jitter reports the accepted value.
DenseMatrix cholesky_factor(const DenseMatrix& a, double jitter,
                            double* used_jitter = nullptr);

// Solve (A + jitter*I) X = B for symmetric positive definite A.
DenseMatrix solve_spd(const DenseMatrix& a, const DenseMatrix& b, double jitter = 0.0);

struct ThinSvd {
  DenseMatrix u;              // rows(A) x rank, orthonormal columns
  std::vector<double> sigma;  // rank values, descending, nonnegative
  DenseMatrix v;              // cols(A) x rank, orthonormal columns
};

// Thin SVD by one-sided Jacobi (on the tall orientation). rank must be at
// most min(rows, cols).
ThinSvd svd_thin(const DenseMatrix& a, std::size_t rank);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// One Adam update, in place. Throws NaNGradient on non-finite gradients.
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads);

// Counter-based splittable RNG: the draw at a given (seed, stream, counter)
// is a pure function of the triple, so sequences are identical across
// platforms and independent of thread scheduling.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  RngState() = default;
  RngState(std::uint64_t s, std::uint64_t st) : seed(s), stream(st) {}

  std::uint64_t next_u64();
  double next_uniform();        // [0, 1)
  double next_uniform_open();   // (0, 1]
  double next_normal();         // standard normal, consumes two counters
  std::uint64_t next_below(std::uint64_t n);  // uniform in [0, n)
  RngState split(std::uint64_t substream) const;
};

// n i.i.d. standard normals; advances rng.
std::vector<double> sample_standard_normal(std::size_t n, RngState& rng);

// Central finite differences of f at x with step h.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

}  // namespace rino
