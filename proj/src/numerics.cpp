#include "rino/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace rino {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NaNGradient: return "NaNGradient";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::UnsortedGrid: return "UnsortedGrid";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::MissingGamma: return "MissingGamma";
    case ErrorCode::OffGridQuery: return "OffGridQuery";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

Box Box::unit(int d) {
  Box b;
  b.dim = d;
  b.lower.assign(d, 0.0);
  b.upper.assign(d, 1.0);
  return b;
}

bool Box::contains(const double* x, double tol) const {
  for (int k = 0; k < dim; ++k) {
    if (x[k] < lower[k] - tol || x[k] > upper[k] + tol) return false;
  }
  return true;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows_in) {
  if (rows_in.empty()) return {};
  DenseMatrix m(rows_in.size(), rows_in.front().size());
  for (std::size_t i = 0; i < rows_in.size(); ++i) {
    if (rows_in[i].size() != m.cols)
      throw Error(ErrorCode::ShapeMismatch, "ragged row list");
    std::copy(rows_in[i].begin(), rows_in[i].end(), m.row(i));
  }
  return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) throw Error(ErrorCode::ShapeMismatch, "matmul inner dims");
  DenseMatrix c(a.rows, b.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* br = b.row(k);
      double* cr = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.cols) throw Error(ErrorCode::ShapeMismatch, "matmul_nt inner dims");
  DenseMatrix c(a.rows, b.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* br = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += ar[k] * br[k];
      c(i, j) = s;
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows) throw Error(ErrorCode::ShapeMismatch, "matmul_tn inner dims");
  DenseMatrix c(a.cols, b.cols, 0.0);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* ar = a.row(k);
    const double* br = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      double aki = ar[i];
      if (aki == 0.0) continue;
      double* cr = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aki * br[j];
    }
  }
  return c;
}

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
  if (a.cols != x.size()) throw Error(ErrorCode::ShapeMismatch, "matvec dims");
  std::vector<double> y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += ar[j] * x[j];
    y[i] = s;
  }
  return y;
}

namespace {

bool try_cholesky(const DenseMatrix& a, double jitter, DenseMatrix& l) {
  std::size_t n = a.rows;
  l = DenseMatrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      if (i == j) s += jitter;
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return true;
}

}  // namespace

DenseMatrix cholesky_factor(const DenseMatrix& a, double jitter, double* used_jitter) {
  if (a.rows != a.cols) throw Error(ErrorCode::ShapeMismatch, "cholesky needs square");
  if (jitter < 0.0) throw Error(ErrorCode::RangeError, "negative jitter");
  DenseMatrix l;
  double j = jitter;
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (try_cholesky(a, j, l)) {
      if (used_jitter != nullptr) *used_jitter = j;
      return l;
    }
    j = (j <= 0.0) ? 1e-12 : j * 10.0;
  }
  throw Error(ErrorCode::NotPositiveDefinite, "cholesky failed after jitter escalation");
}

DenseMatrix solve_spd(const DenseMatrix& a, const DenseMatrix& b, double jitter) {
  if (a.rows != b.rows) throw Error(ErrorCode::ShapeMismatch, "solve_spd rhs rows");
  DenseMatrix l = cholesky_factor(a, jitter);
  std::size_t n = a.rows, k = b.cols;
  DenseMatrix x = b;
  // L y = b
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = x(i, c);
      for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * x(j, c);
      x(i, c) = s / l(i, i);
    }
  }
  // L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = x(ii, c);
      for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x(j, c);
      x(ii, c) = s / l(ii, ii);
    }
  }
  return x;
}

namespace {

// One-sided Jacobi on a tall matrix (rows >= cols) with a cached Gram matrix
// so converged pairs cost O(1) to skip.
void jacobi_svd_tall(DenseMatrix w, DenseMatrix& u, std::vector<double>& sigma,
                     DenseMatrix& v) {
  std::size_t m = w.rows, n = w.cols;
  DenseMatrix g = matmul_tn(w, w);
  v = DenseMatrix::identity(n);
  const double tol = 1e-15;
  const int max_sweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double aii = g(i, i), ajj = g(j, j), aij = g(i, j);
        double denom = std::sqrt(aii * ajj);
        if (denom <= 0.0) continue;
        double rel = std::fabs(aij) / denom;
        if (rel > worst) worst = rel;
        if (rel <= tol) continue;
        double tau = (ajj - aii) / (2.0 * aij);
        double t = (tau >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          double wi = w(r, i), wj = w(r, j);
          w(r, i) = c * wi - s * wj;
          w(r, j) = s * wi + c * wj;
        }
        for (std::size_t r = 0; r < n; ++r) {
          double vi = v(r, i), vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          double gik = g(i, k), gjk = g(j, k);
          double ni = c * gik - s * gjk;
          double nj = s * gik + c * gjk;
          g(i, k) = ni; g(k, i) = ni;
          g(j, k) = nj; g(k, j) = nj;
        }
        g(i, i) = c * c * aii - 2.0 * c * s * aij + s * s * ajj;
        g(j, j) = s * s * aii + 2.0 * c * s * aij + c * c * ajj;
        g(i, j) = 0.0; g(j, i) = 0.0;
      }
    }
    if (worst <= tol) converged = true;
  }
  if (!converged)
    throw Error(ErrorCode::ConvergenceFailure, "jacobi svd did not converge");

  sigma.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += w(r, j) * w(r, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  DenseMatrix us(m, n, 0.0), vs(n, n, 0.0);
  std::vector<double> ss(n, 0.0);
  double smax = sigma.empty() ? 0.0 : sigma[order[0]];
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t src = order[p];
    ss[p] = sigma[src];
    for (std::size_t r = 0; r < n; ++r) vs(r, p) = v(r, src);
    if (ss[p] > smax * 1e-280 && ss[p] > 0.0) {
      for (std::size_t r = 0; r < m; ++r) us(r, p) = w(r, src) / ss[p];
    } else {
      ss[p] = 0.0;
      // Complete with an orthonormal direction from the standard basis.
      for (std::size_t cand = 0; cand < m; ++cand) {
        std::vector<double> e(m, 0.0);
        e[cand] = 1.0;
        for (std::size_t q = 0; q < p; ++q) {
          double dot = 0.0;
          for (std::size_t r = 0; r < m; ++r) dot += us(r, q) * e[r];
          for (std::size_t r = 0; r < m; ++r) e[r] -= dot * us(r, q);
        }
        double nrm = 0.0;
        for (double x : e) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm > 0.5) {
          for (std::size_t r = 0; r < m; ++r) us(r, p) = e[r] / nrm;
          break;
        }
      }
    }
  }
  u = std::move(us);
  v = std::move(vs);
  sigma = std::move(ss);
}

DenseMatrix take_cols(const DenseMatrix& a, std::size_t k) {
  DenseMatrix out(a.rows, k, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < k; ++j) out(i, j) = a(i, j);
  return out;
}

}  // namespace

ThinSvd svd_thin(const DenseMatrix& a, std::size_t rank) {
  if (a.rows == 0 || a.cols == 0)
    throw Error(ErrorCode::ShapeMismatch, "svd of empty matrix");
  std::size_t mn = std::min(a.rows, a.cols);
  if (rank < 1 || rank > mn)
    throw Error(ErrorCode::RangeError, "svd rank out of range");

  DenseMatrix u_full, v_full;
  std::vector<double> sigma;
  if (a.rows >= a.cols) {
    jacobi_svd_tall(a, u_full, sigma, v_full);
  } else {
    DenseMatrix at(a.cols, a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j < a.cols; ++j) at(j, i) = a(i, j);
    // A^T = U' S V'^T  =>  A = V' S U'^T
    jacobi_svd_tall(at, v_full, sigma, u_full);
  }
  ThinSvd out;
  out.u = take_cols(u_full, rank);
  out.v = take_cols(v_full, rank);
  out.sigma.assign(sigma.begin(), sigma.begin() + rank);
  return out;
}

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::ShapeMismatch, "adam params/grads size");
  if (state.m.empty()) state.m.assign(params.size(), 0.0);
  if (state.v.empty()) state.v.assign(params.size(), 0.0);
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "adam state size");
  for (double g : grads) {
    if (!std::isfinite(g)) throw Error(ErrorCode::NaNGradient, "non-finite gradient");
  }
  state.step += 1;
  double b1t = 1.0 - std::pow(state.beta1, double(state.step));
  double b2t = 1.0 - std::pow(state.beta2, double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    double mhat = state.m[i] / b1t;
    double vhat = state.v[i] / b2t;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngState::next_u64() {
  std::uint64_t h = mix64(seed ^ 0x8BADF00D5DEECE66ull);
  h = mix64(h + stream);
  return mix64(h + counter++);
}

double RngState::next_uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_uniform_open() {
  return double((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngState::next_normal() {
  double u1 = next_uniform_open();
  double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t RngState::next_below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::RangeError, "next_below(0)");
  return next_u64() % n;
}

RngState RngState::split(std::uint64_t substream) const {
  return RngState(seed, mix64(stream ^ mix64(substream + 0x632BE59BD9B4E019ull)));
}

std::vector<double> sample_standard_normal(std::size_t n, RngState& rng) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.next_normal();
  return out;
}

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::RangeError, "finite diff step must be > 0");
  std::vector<double> grad(x.size(), 0.0);
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = xp[i];
    xp[i] = orig + h;
    double fp = f(xp);
    xp[i] = orig - h;
    double fm = f(xp);
    xp[i] = orig;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace rino
