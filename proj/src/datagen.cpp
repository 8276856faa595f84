#include "rino/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>

namespace rino {

namespace {

constexpr double kPi = 3.14159265358979323846;

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double kappa(double s) { return 0.2 + s * s; }
double dkappa(double s) { return 2.0 * s; }

std::string residual_str(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", r);
  return buf;
}

// Tridiagonal solve (Thomas), in place on copies.
std::vector<double> solve_tridiag(std::vector<double> lo, std::vector<double> di,
                                  std::vector<double> up,
                                  std::vector<double> rhs) {
  const std::size_t n = di.size();
  for (std::size_t i = 1; i < n; ++i) {
    double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / di[n - 1];
  for (std::size_t i = n - 1; i > 0; --i)
    x[i - 1] = (rhs[i - 1] - up[i - 1] * x[i]) / di[i - 1];
  return x;
}

// Banded matrix with half-bandwidth bw; LU without pivoting (the Darcy
// Jacobians are diagonally dominant M-matrices).
struct Banded {
  std::size_t n = 0, bw = 0;
  std::vector<double> a;  // row i, column j stored at (i, j - i + bw)

  Banded(std::size_t n_, std::size_t bw_)
      : n(n_), bw(bw_), a(n_ * (2 * bw_ + 1), 0.0) {}
  double& at(std::size_t i, std::size_t j) {
    return a[i * (2 * bw + 1) + (j + bw - i)];
  }

  void lu() {
    for (std::size_t k = 0; k < n; ++k) {
      double piv = at(k, k);
      std::size_t iend = std::min(n - 1, k + bw);
      for (std::size_t i = k + 1; i <= iend; ++i) {
        double m = at(i, k) / piv;
        at(i, k) = m;
        std::size_t jend = std::min(n - 1, k + bw);
        for (std::size_t j = k + 1; j <= jend; ++j) at(i, j) -= m * at(k, j);
      }
    }
  }

  std::vector<double> solve(std::vector<double> b) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j0 = i > bw ? i - bw : 0;
      for (std::size_t j = j0; j < i; ++j) b[i] -= at(i, j) * b[j];
    }
    for (std::size_t ii = n; ii > 0; --ii) {
      std::size_t i = ii - 1;
      std::size_t jend = std::min(n - 1, i + bw);
      for (std::size_t j = i + 1; j <= jend; ++j) b[i] -= at(i, j) * b[j];
      b[i] /= at(i, i);
    }
    return b;
  }
};

std::vector<std::size_t> lex_order(const DenseMatrix& pts) {
  std::vector<std::size_t> order(pts.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double* ra = pts.row(a);
    const double* rb = pts.row(b);
    for (std::size_t c = 0; c < pts.cols; ++c) {
      if (ra[c] < rb[c]) return true;
      if (ra[c] > rb[c]) return false;
    }
    return false;
  });
  return order;
}

}  // namespace

DenseMatrix grf_kernel(const DenseMatrix& points, const GrfConfig& cfg) {
  if (cfg.length_scale <= 0.0)
    throw Error(ErrorCode::RangeError, "length scale must be positive");
  if (cfg.periodic && points.cols != 1)
    throw Error(ErrorCode::RangeError, "periodic kernel is 1D only");
  const std::size_t n = points.rows;
  const double inv = 1.0 / (2.0 * cfg.length_scale * cfg.length_scale);
  DenseMatrix k(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      if (cfg.periodic) {
        double d = std::sin(kPi * std::fabs(points(i, 0) - points(j, 0))) / kPi;
        d2 = d * d;
      } else {
        for (std::size_t c = 0; c < points.cols; ++c) {
          double d = points(i, c) - points(j, c);
          d2 += d * d;
        }
      }
      double v = std::exp(-d2 * inv);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

std::vector<double> sample_grf(const DenseMatrix& points, const GrfConfig& cfg,
                               RngState& rng) {
  const std::size_t n = points.rows;
  if (n == 0) throw Error(ErrorCode::ShapeMismatch, "no points to sample at");
  std::vector<std::size_t> order = lex_order(points);
  DenseMatrix sorted(n, points.cols, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    std::copy(points.row(order[r]), points.row(order[r]) + points.cols,
              sorted.row(r));
  for (std::size_t r = 1; r < n; ++r) {
    bool same = true;
    for (std::size_t c = 0; c < points.cols && same; ++c)
      same = std::fabs(sorted(r, c) - sorted(r - 1, c)) <= 1e-12;
    if (same) throw Error(ErrorCode::RangeError, "duplicate sample points");
  }

  DenseMatrix k = grf_kernel(sorted, cfg);
  DenseMatrix l = cholesky_factor(k, cfg.jitter);
  std::vector<double> z = sample_standard_normal(n, rng);
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c <= r; ++c) acc += l(r, c) * z[c];
    out[order[r]] = acc;
  }
  return out;
}

SolverOutput solve_antiderivative(const std::vector<double>& x,
                                  const std::vector<double>& u) {
  if (x.size() != u.size())
    throw Error(ErrorCode::ShapeMismatch, "grid vs values length");
  if (x.size() < 2) throw Error(ErrorCode::RangeError, "need at least 2 points");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      throw Error(ErrorCode::UnsortedGrid, "grid must be strictly increasing");

  SolverOutput out;
  out.grid = DenseMatrix(x.size(), 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out.grid(i, 0) = x[i];
  out.values.assign(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out.values[i] =
        out.values[i - 1] + 0.5 * (u[i] + u[i - 1]) * (x[i] - x[i - 1]);
  return out;
}

SolverOutput solve_darcy_1d(const std::vector<double>& u) {
  const std::size_t n = u.size();
  if (n < 3) throw Error(ErrorCode::RangeError, "need at least 3 nodes");
  const double h = 1.0 / double(n - 1);
  const std::size_t m = n - 2;
  const double tol = 1e-10;

  // Face conductivity is kappa at the midpoint value; this keeps the
  // scheme conservative and second order with a small constant.
  std::vector<double> s(n, 0.0);
  auto residual = [&](const std::vector<double>& sv, std::vector<double>& r) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double kp = kappa(0.5 * (sv[i] + sv[i + 1]));
      double km = kappa(0.5 * (sv[i - 1] + sv[i]));
      double fp = -kp * (sv[i + 1] - sv[i]) / h;
      double fm = -km * (sv[i] - sv[i - 1]) / h;
      r[i - 1] = (fp - fm) / h - u[i];
    }
  };

  std::vector<double> r(m), rt(m), trial(n);
  residual(s, r);
  double rn = inf_norm(r);
  int iters = 0;
  while (rn > tol) {
    if (iters >= 25)
      throw Error(ErrorCode::NewtonDiverged,
                  "Newton stalled at residual " + residual_str(rn));
    std::vector<double> lo(m, 0.0), di(m, 0.0), up(m, 0.0), rhs(m);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double dxp = s[i + 1] - s[i];
      double dxm = s[i] - s[i - 1];
      double dkp = 0.5 * dkappa(0.5 * (s[i] + s[i + 1]));
      double dkm = 0.5 * dkappa(0.5 * (s[i - 1] + s[i]));
      double kp = kappa(0.5 * (s[i] + s[i + 1]));
      double km = kappa(0.5 * (s[i - 1] + s[i]));
      double dfp_dc = (-dkp * dxp + kp) / h;
      double dfp_dp = (-dkp * dxp - kp) / h;
      double dfm_dc = (-dkm * dxm - km) / h;
      double dfm_dm = (-dkm * dxm + km) / h;
      std::size_t q = i - 1;
      di[q] = (dfp_dc - dfm_dc) / h;
      if (i + 2 < n) up[q] = dfp_dp / h;
      if (i > 1) lo[q] = -dfm_dm / h;
      rhs[q] = -r[q];
    }
    std::vector<double> delta = solve_tridiag(lo, di, up, rhs);

    double lam = 1.0, rtn = 0.0;
    for (;;) {
      trial = s;
      for (std::size_t q = 0; q < m; ++q) trial[q + 1] += lam * delta[q];
      residual(trial, rt);
      rtn = inf_norm(rt);
      if (rtn <= (1.0 - 1e-4 * lam) * rn || lam <= 1.0 / 64.0) break;
      lam *= 0.5;
    }
    s = trial;
    r = rt;
    rn = rtn;
    ++iters;
  }

  SolverOutput out;
  out.grid = DenseMatrix(n, 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.grid(i, 0) = double(i) * h;
  out.values = s;
  out.newton_iterations = iters;
  out.residual_norm = rn;
  return out;
}

SolverOutput solve_darcy_2d(const std::vector<double>& u, int n) {
  if (n < 5) throw Error(ErrorCode::RangeError, "need at least 5 nodes per side");
  if (u.size() != std::size_t(n) * std::size_t(n))
    throw Error(ErrorCode::ShapeMismatch, "source length vs n*n");
  const double h = 1.0 / double(n - 1);
  const std::size_t in = std::size_t(n) - 2;  // interior nodes per side
  const std::size_t m = in * in;
  const double tol = 1e-9;

  auto gid = [n](std::size_t i, std::size_t j) { return i * std::size_t(n) + j; };
  auto iid = [in](std::size_t i, std::size_t j) {
    return (i - 1) * in + (j - 1);
  };

  std::vector<double> s(std::size_t(n) * n, 0.0);
  auto residual = [&](const std::vector<double>& sv, std::vector<double>& r) {
    for (std::size_t i = 1; i + 1 < std::size_t(n); ++i)
      for (std::size_t j = 1; j + 1 < std::size_t(n); ++j) {
        double sc = sv[gid(i, j)];
        double fxp = -kappa(0.5 * (sc + sv[gid(i + 1, j)])) *
                     (sv[gid(i + 1, j)] - sc) / h;
        double fxm = -kappa(0.5 * (sv[gid(i - 1, j)] + sc)) *
                     (sc - sv[gid(i - 1, j)]) / h;
        double fyp = -kappa(0.5 * (sc + sv[gid(i, j + 1)])) *
                     (sv[gid(i, j + 1)] - sc) / h;
        double fym = -kappa(0.5 * (sv[gid(i, j - 1)] + sc)) *
                     (sc - sv[gid(i, j - 1)]) / h;
        r[iid(i, j)] = (fxp - fxm) / h + (fyp - fym) / h - u[gid(i, j)];
      }
  };

  std::vector<double> r(m), rt(m), trial;
  residual(s, r);
  double rn = inf_norm(r);
  int iters = 0;
  while (rn > tol) {
    if (iters >= 25)
      throw Error(ErrorCode::NewtonDiverged,
                  "Newton stalled at residual " + residual_str(rn));
    Banded jac(m, in);
    for (std::size_t i = 1; i + 1 < std::size_t(n); ++i)
      for (std::size_t j = 1; j + 1 < std::size_t(n); ++j) {
        const std::size_t q = iid(i, j);
        double sc = s[gid(i, j)];
        double sxp = s[gid(i + 1, j)], sxm = s[gid(i - 1, j)];
        double syp = s[gid(i, j + 1)], sym = s[gid(i, j - 1)];
        double kxp = kappa(0.5 * (sc + sxp)), dkxp = 0.5 * dkappa(0.5 * (sc + sxp));
        double kxm = kappa(0.5 * (sxm + sc)), dkxm = 0.5 * dkappa(0.5 * (sxm + sc));
        double kyp = kappa(0.5 * (sc + syp)), dkyp = 0.5 * dkappa(0.5 * (sc + syp));
        double kym = kappa(0.5 * (sym + sc)), dkym = 0.5 * dkappa(0.5 * (sym + sc));
        double center = 0.0;
        center += (-dkxp * (sxp - sc) + kxp) / (h * h);
        center -= (-dkxm * (sc - sxm) - kxm) / (h * h);
        center += (-dkyp * (syp - sc) + kyp) / (h * h);
        center -= (-dkym * (sc - sym) - kym) / (h * h);
        jac.at(q, q) = center;
        if (i + 2 < std::size_t(n))
          jac.at(q, q + in) = (-dkxp * (sxp - sc) - kxp) / (h * h);
        if (i > 1)
          jac.at(q, q - in) = -(-dkxm * (sc - sxm) + kxm) / (h * h);
        if (j + 2 < std::size_t(n))
          jac.at(q, q + 1) = (-dkyp * (syp - sc) - kyp) / (h * h);
        if (j > 1)
          jac.at(q, q - 1) = -(-dkym * (sc - sym) + kym) / (h * h);
      }
    jac.lu();
    std::vector<double> rhs(m);
    for (std::size_t q = 0; q < m; ++q) rhs[q] = -r[q];
    std::vector<double> delta = jac.solve(rhs);

    double lam = 1.0, rtn = 0.0;
    for (;;) {
      trial = s;
      for (std::size_t i = 1; i + 1 < std::size_t(n); ++i)
        for (std::size_t j = 1; j + 1 < std::size_t(n); ++j)
          trial[gid(i, j)] += lam * delta[iid(i, j)];
      residual(trial, rt);
      rtn = inf_norm(rt);
      if (rtn <= (1.0 - 1e-4 * lam) * rn || lam <= 1.0 / 64.0) break;
      lam *= 0.5;
    }
    s = trial;
    r = rt;
    rn = rtn;
    ++iters;
  }

  SolverOutput out;
  out.grid = dense_grid(Box::unit(2), n);
  out.values = s;
  out.newton_iterations = iters;
  out.residual_norm = rn;
  return out;
}

namespace {

// Dense DFT via twiddle table; N=100 keeps this cheap and dependency-free.
struct Dft {
  int n;
  std::vector<std::complex<double>> tw;

  explicit Dft(int n_) : n(n_), tw(n_) {
    for (int r = 0; r < n; ++r)
      tw[r] = std::polar(1.0, -2.0 * kPi * double(r) / double(n));
  }
  void forward(const std::vector<std::complex<double>>& in,
               std::vector<std::complex<double>>& out) const {
    for (int m = 0; m < n; ++m) {
      std::complex<double> acc(0.0, 0.0);
      for (int j = 0; j < n; ++j) acc += in[j] * tw[(j * m) % n];
      out[m] = acc;
    }
  }
  void inverse(const std::vector<std::complex<double>>& in,
               std::vector<std::complex<double>>& out) const {
    for (int j = 0; j < n; ++j) {
      std::complex<double> acc(0.0, 0.0);
      for (int m = 0; m < n; ++m) acc += in[m] * std::conj(tw[(j * m) % n]);
      out[j] = acc / double(n);
    }
  }
};

}  // namespace

SolverOutput solve_burgers(const std::vector<double>& u0, double nu, int nt,
                           bool linear) {
  const int n = 100;
  if (u0.size() != std::size_t(n) + 1)
    throw Error(ErrorCode::ShapeMismatch, "initial condition needs 101 values");
  if (std::fabs(u0.front() - u0.back()) > 1e-10)
    throw Error(ErrorCode::RangeError, "initial condition is not periodic");
  if (nu <= 0.0) throw Error(ErrorCode::RangeError, "viscosity must be positive");
  if (nt < 100 || nt % 100 != 0)
    throw Error(ErrorCode::RangeError, "time steps must be a multiple of 100");

  const double dt = 1.0 / double(nt);
  const int record_every = nt / 100;
  Dft dft(n);

  std::vector<double> kadv(n), ksq(n);
  std::vector<char> keep(n);
  for (int m = 0; m < n; ++m) {
    int ms = m <= n / 2 ? m : m - n;
    kadv[m] = m == n / 2 ? 0.0 : 2.0 * kPi * double(ms);
    ksq[m] = (2.0 * kPi * double(ms)) * (2.0 * kPi * double(ms));
    keep[m] = std::abs(ms) <= n / 3 ? 1 : 0;
  }
  std::vector<double> efac(n);
  for (int m = 0; m < n; ++m) efac[m] = std::exp(-nu * ksq[m] * dt);
  const double kmax = 2.0 * kPi * double(n / 3);

  std::vector<std::complex<double>> sh(n), k1(n), sstar(n), k2(n), phys(n),
      work(n);
  for (int j = 0; j < n; ++j) phys[j] = u0[j];
  dft.forward(phys, sh);

  const std::complex<double> imag_i(0.0, 1.0);
  auto advection = [&](const std::vector<std::complex<double>>& state,
                       std::vector<std::complex<double>>& out) {
    if (linear) {
      for (int m = 0; m < n; ++m) out[m] = -imag_i * kadv[m] * state[m];
      return;
    }
    dft.inverse(state, phys);
    double smax = 0.0;
    for (int j = 0; j < n; ++j) smax = std::max(smax, std::fabs(phys[j].real()));
    if (dt * smax * kmax > 1.0)
      throw Error(ErrorCode::CFLViolation,
                  "advective step exceeds the stability bound");
    for (int j = 0; j < n; ++j) {
      double v = phys[j].real();
      work[j] = 0.5 * v * v;
    }
    dft.forward(work, out);
    for (int m = 0; m < n; ++m)
      out[m] = keep[m] ? -imag_i * kadv[m] * out[m] : 0.0;
  };

  SolverOutput out;
  out.grid = DenseMatrix(100 * std::size_t(n + 1), 2, 0.0);
  out.values.assign(100 * std::size_t(n + 1), 0.0);
  double max_imag = 0.0;

  for (int step = 0; step < nt; ++step) {
    advection(sh, k1);
    for (int m = 0; m < n; ++m) sstar[m] = efac[m] * (sh[m] + dt * k1[m]);
    advection(sstar, k2);
    for (int m = 0; m < n; ++m)
      sh[m] = efac[m] * sh[m] + 0.5 * dt * (efac[m] * k1[m] + k2[m]);

    if ((step + 1) % record_every == 0) {
      const int slice = (step + 1) / record_every - 1;
      const double t = double(step + 1) * dt;
      dft.inverse(sh, phys);
      for (int j = 0; j <= n; ++j) {
        const std::size_t row = std::size_t(slice) * (n + 1) + j;
        out.grid(row, 0) = double(j) / double(n);
        out.grid(row, 1) = t;
        out.values[row] = phys[j % n].real();
        max_imag = std::max(max_imag, std::fabs(phys[j % n].imag()));
      }
    }
  }
  out.residual_norm = max_imag;
  return out;
}

PointCloudSignal subsample_signal(const PointCloudSignal& signal,
                                  const SubsampleConfig& cfg, RngState& rng) {
  const std::size_t m = signal.values.size();
  if (signal.points.rows != m)
    throw Error(ErrorCode::ShapeMismatch, "points vs values length");
  if (cfg.m_min < 1 || cfg.m_min > cfg.m_max || std::size_t(cfg.m_max) > m)
    throw Error(ErrorCode::RangeError, "subsample range invalid for signal");

  const std::size_t take =
      std::size_t(cfg.m_min) +
      rng.next_below(std::uint64_t(cfg.m_max - cfg.m_min + 1));
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t j = 0; j < take; ++j)
    std::swap(idx[j], idx[j + rng.next_below(m - j)]);
  idx.resize(take);
  std::sort(idx.begin(), idx.end());

  PointCloudSignal out;
  out.points = DenseMatrix(take, signal.points.cols, 0.0);
  out.values.resize(take);
  for (std::size_t r = 0; r < take; ++r) {
    std::copy(signal.points.row(idx[r]),
              signal.points.row(idx[r]) + signal.points.cols,
              out.points.row(r));
    out.values[r] = signal.values[idx[r]];
  }
  return out;
}

ThreeBasisData make_three_basis_dataset(int n, int m, RngState& rng) {
  if (n < 1 || m < 1) throw Error(ErrorCode::RangeError, "need n, m >= 1");
  ThreeBasisData out;
  out.grid = DenseMatrix(m, 1, 0.0);
  for (int j = 0; j < m; ++j)
    out.grid(j, 0) = m == 1 ? 0.0 : double(j) / double(m - 1);

  out.coeffs = DenseMatrix(n, 3, 0.0);
  for (double& c : out.coeffs.data) c = rng.next_normal();

  auto p6 = [](double t) {
    double t2 = t * t;
    return ((231.0 * t2 - 315.0) * t2 + 105.0) * t2 / 16.0 - 5.0 / 16.0;
  };
  out.values = DenseMatrix(n, m, 0.0);
  for (int j = 0; j < m; ++j) {
    double x = out.grid(j, 0);
    double t = 2.0 * x - 1.0;
    double b1 = p6(t);
    double b2 = std::cos(3.3 * kPi * x);
    double b3 = 2.0 * std::fabs(t) - 1.0;
    for (int i = 0; i < n; ++i)
      out.values(i, j) = out.coeffs(i, 0) * b1 + out.coeffs(i, 1) * b2 +
                         out.coeffs(i, 2) * b3;
  }
  return out;
}

BoolMask mask_matrix(std::size_t n, std::size_t m, double r_percent,
                     RngState& rng) {
  if (r_percent < 0.0 || r_percent >= 100.0)
    throw Error(ErrorCode::RangeError, "mask percentage must be in [0, 100)");
  const std::size_t k = std::size_t(std::llround(double(m) * r_percent / 100.0));
  BoolMask out;
  out.rows = n;
  out.cols = m;
  out.data.assign(n * m, 0);
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t j = 0; j < k; ++j) {
      std::swap(idx[j], idx[j + rng.next_below(m - j)]);
      out.data[i * m + idx[j]] = 1;
    }
  }
  return out;
}

}  // namespace rino
