#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "rino/numerics.hpp"

using namespace rino;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, RngState& rng) {
  DenseMatrix m(r, c);
  for (auto& v : m.data) v = rng.next_normal();
  return m;
}

DenseMatrix random_spd(std::size_t n, RngState& rng) {
  DenseMatrix m = random_matrix(n, n, rng);
  DenseMatrix a = matmul_nt(m, m);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += double(n);
  return a;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
  return worst;
}

double frob(const DenseMatrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("solve_spd identity") {
  DenseMatrix a = DenseMatrix::identity(2);
  DenseMatrix b(2, 1);
  b(0, 0) = 3.0;
  b(1, 0) = 4.0;
  DenseMatrix x = solve_spd(a, b, 0.0);
  CHECK(x(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(x(1, 0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("solve_spd diagonal") {
  DenseMatrix a(2, 2);
  a(0, 0) = 4.0;
  a(1, 1) = 9.0;
  DenseMatrix b(2, 1);
  b(0, 0) = 8.0;
  b(1, 0) = 27.0;
  DenseMatrix x = solve_spd(a, b, 0.0);
  CHECK(x(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x(1, 0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("solve_spd matches explicit inverse oracle") {
  RngState rng(42, 0);
  DenseMatrix a = random_spd(8, rng);
  DenseMatrix b = random_matrix(8, 2, rng);
  DenseMatrix x = solve_spd(a, b, 0.0);
  DenseMatrix xref = matmul(oracles::gauss_jordan_inverse(a), b);
  CHECK(max_abs_diff(x, xref) <= 1e-10);
}

TEST_CASE("solve_spd residual and purity") {
  RngState rng(7, 3);
  for (int rep = 0; rep < 5; ++rep) {
    std::size_t n = 3 + std::size_t(rep);
    DenseMatrix a = random_spd(n, rng);
    DenseMatrix b = random_matrix(n, 3, rng);
    double jitter = rep % 2 == 0 ? 0.0 : 1e-6;
    DenseMatrix x = solve_spd(a, b, jitter);
    DenseMatrix aj = a;
    for (std::size_t i = 0; i < n; ++i) aj(i, i) += jitter;
    DenseMatrix r = matmul(aj, x);
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
    CHECK(frob(r) <= 1e-9 * std::max(1.0, frob(b)));

    DenseMatrix x2 = solve_spd(a, b, jitter);
    CHECK(std::memcmp(x.data.data(), x2.data.data(),
                      x.data.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("solve_spd rejects indefinite matrix") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 1.0;
  DenseMatrix b = DenseMatrix::identity(2);
  CHECK_THROWS_AS(solve_spd(a, b, 0.0), Error);
  try {
    solve_spd(a, b, 0.0);
  } catch (const Error& e) {
    CHECK(e.code == ErrorCode::NotPositiveDefinite);
  }
}

TEST_CASE("cholesky jitter escalation reports the accepted jitter") {
  // Singular PSD matrix: ones(2,2). Plain Cholesky fails, jitter rescues.
  DenseMatrix a(2, 2, 1.0);
  double used = -1.0;
  DenseMatrix l = cholesky_factor(a, 0.0, &used);
  CHECK(used > 0.0);
  CHECK(l(0, 0) > 0.0);
}

TEST_CASE("svd_thin rank one outer product") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0 * 3.0;
  a(0, 1) = 1.0 * 4.0;
  a(1, 0) = 2.0 * 3.0;
  a(1, 1) = 2.0 * 4.0;
  ThinSvd f = svd_thin(a, 2);
  CHECK(f.sigma[0] == doctest::Approx(std::sqrt(5.0) * 5.0).epsilon(1e-12));
  CHECK(std::fabs(f.sigma[1]) <= 1e-12 * f.sigma[0]);
  // Rank-1 reconstruction is exact.
  DenseMatrix r(2, 2, 0.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      r(i, j) = f.u(i, 0) * f.sigma[0] * f.v(j, 0);
  CHECK(max_abs_diff(a, r) <= 1e-12 * f.sigma[0]);
}

TEST_CASE("svd_thin identity") {
  ThinSvd f = svd_thin(DenseMatrix::identity(3), 3);
  for (int i = 0; i < 3; ++i) CHECK(f.sigma[i] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("svd_thin matches eigenvalue oracle and Eckart-Young") {
  RngState rng(11, 5);
  DenseMatrix a = random_matrix(10, 6, rng);
  ThinSvd f = svd_thin(a, 6);

  // Independent route: singular values from eigenvalues of A^T A.
  DenseMatrix gram = matmul_tn(a, a);
  auto ev = oracles::jacobi_sym_eigenvalues(gram);
  for (std::size_t i = 0; i < 6; ++i) {
    double ref = std::sqrt(std::max(0.0, ev[i]));
    CHECK(std::fabs(f.sigma[i] - ref) <= 1e-10 * std::max(1.0, ref));
  }

  // Eckart-Young: squared Frobenius error of the rank-k truncation equals the
  // discarded sigma^2 tail.
  for (std::size_t k = 1; k <= 6; ++k) {
    DenseMatrix r(a.rows, a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j < a.cols; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p)
          s += f.u(i, p) * f.sigma[p] * f.v(j, p);
        r(i, j) = a(i, j) - s;
      }
    double err2 = 0.0;
    for (double v : r.data) err2 += v * v;
    double tail = 0.0;
    for (std::size_t p = k; p < 6; ++p) tail += f.sigma[p] * f.sigma[p];
    CHECK(std::fabs(err2 - tail) <= 1e-10 * std::max(1.0, tail));
  }
}

TEST_CASE("svd_thin orthonormal factors, both orientations") {
  RngState rng(3, 9);
  for (auto shape : {std::pair<std::size_t, std::size_t>{9, 4},
                     std::pair<std::size_t, std::size_t>{4, 9}}) {
    DenseMatrix a = random_matrix(shape.first, shape.second, rng);
    std::size_t k = 4;
    ThinSvd f = svd_thin(a, k);
    DenseMatrix gu = matmul_tn(f.u, f.u);
    DenseMatrix gv = matmul_tn(f.v, f.v);
    DenseMatrix eye = DenseMatrix::identity(k);
    CHECK(max_abs_diff(gu, eye) <= 1e-10);
    CHECK(max_abs_diff(gv, eye) <= 1e-10);
    for (std::size_t i = 1; i < k; ++i) CHECK(f.sigma[i - 1] >= f.sigma[i]);
  }
}

TEST_CASE("svd_thin truncation error non-increasing in rank") {
  RngState rng(21, 2);
  DenseMatrix a = random_matrix(8, 5, rng);
  double prev = 1e300;
  for (std::size_t k = 1; k <= 5; ++k) {
    ThinSvd f = svd_thin(a, k);
    DenseMatrix r = a;
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j < a.cols; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p)
          s += f.u(i, p) * f.sigma[p] * f.v(j, p);
        r(i, j) -= s;
      }
    double err = frob(r);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
}

TEST_CASE("svd_thin rank bounds") {
  DenseMatrix a(3, 2, 1.0);
  CHECK_THROWS_AS(svd_thin(a, 3), Error);
  CHECK_THROWS_AS(svd_thin(a, 0), Error);
}

TEST_CASE("adam first step moves by about lr") {
  AdamState st;
  st.lr = 1e-3;
  std::vector<double> p = {0.5};
  adam_step(st, p, {1.0});
  CHECK(std::fabs((0.5 - p[0]) - 1e-3) <= 1e-9);
}

TEST_CASE("adam zero gradient leaves params unchanged") {
  AdamState st;
  std::vector<double> p = {1.25, -2.5};
  std::vector<double> before = p;
  adam_step(st, p, {0.0, 0.0});
  CHECK(p[0] == before[0]);
  CHECK(p[1] == before[1]);
}

TEST_CASE("adam matches reference implementation over 100 steps") {
  AdamState st;
  st.lr = 0.05;
  std::vector<double> p = {1.0};

  // Reference: textbook update written out independently.
  double x = 1.0, m = 0.0, v = 0.0;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.05;
  for (int t = 1; t <= 100; ++t) {
    adam_step(st, p, {2.0 * p[0]});

    double g = 2.0 * x;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    double mhat = m / (1 - std::pow(b1, t));
    double vhat = v / (1 - std::pow(b2, t));
    x -= lr * mhat / (std::sqrt(vhat) + eps);
    CHECK(std::fabs(p[0] - x) <= 1e-12);
  }
  CHECK(std::fabs(p[0]) < 1.0);
}

TEST_CASE("adam rejects non-finite gradients") {
  AdamState st;
  std::vector<double> p = {1.0};
  CHECK_THROWS_AS(adam_step(st, p, {std::nan("")}), Error);
}

TEST_CASE("rng identical sequences for identical state") {
  RngState a(123, 45), b(123, 45);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngState c(123, 46);
  int diff = 0;
  RngState a2(123, 45);
  for (int i = 0; i < 100; ++i)
    if (a2.next_u64() != c.next_u64()) ++diff;
  CHECK(diff > 90);
}

TEST_CASE("sample_standard_normal n=0 leaves rng untouched") {
  RngState rng(9, 9);
  auto out = sample_standard_normal(0, rng);
  CHECK(out.empty());
  CHECK(rng.counter == 0);
}

TEST_CASE("standard normal moments") {
  RngState rng(2024, 7);
  const std::size_t n = 100000;
  auto xs = sample_standard_normal(n, rng);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(n);
  double var = 0.0, skew = 0.0, kurt = 0.0;
  for (double x : xs) {
    double d = x - mean;
    var += d * d;
    skew += d * d * d;
    kurt += d * d * d * d;
  }
  var /= double(n);
  skew /= double(n) * std::pow(var, 1.5);
  kurt /= double(n) * var * var;
  CHECK(std::fabs(mean) <= 0.02);
  CHECK(std::fabs(var - 1.0) <= 0.03);
  CHECK(std::fabs(skew) <= 0.05);
  CHECK(std::fabs(kurt - 3.0) <= 0.1);
}

TEST_CASE("uniform draws pass a chi-square check") {
  RngState rng(7, 1);
  const int bins = 100;
  const int n = 100000;
  std::vector<int> count(bins, 0);
  for (int i = 0; i < n; ++i) {
    double u = rng.next_uniform();
    int b = std::min(bins - 1, int(u * bins));
    ++count[b];
  }
  double expect = double(n) / bins;
  double chi2 = 0.0;
  for (int c : count) chi2 += (c - expect) * (c - expect) / expect;
  // 99th percentile of chi-square with 99 dof.
  CHECK(chi2 < 134.642);
}

TEST_CASE("rng split gives distinct reproducible streams") {
  RngState root(77, 0);
  RngState s1 = root.split(1);
  RngState s2 = root.split(2);
  RngState s1b = root.split(1);
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("finite_diff_grad on simple functions") {
  auto f1 = [](const std::vector<double>& x) { return x[0] * x[0]; };
  auto g1 = finite_diff_grad(f1, {3.0}, 1e-5);
  CHECK(std::fabs(g1[0] - 6.0) <= 1e-8);

  auto f2 = [](const std::vector<double>&) { return 4.2; };
  auto g2 = finite_diff_grad(f2, {1.0, 2.0}, 1e-5);
  CHECK(g2[0] == 0.0);
  CHECK(g2[1] == 0.0);

  auto f3 = [](const std::vector<double>& x) { return std::sin(x[0]); };
  auto g3 = finite_diff_grad(f3, {0.0}, 1e-5);
  CHECK(std::fabs(g3[0] - 1.0) <= 1e-8);

  CHECK_THROWS_AS(finite_diff_grad(f1, {1.0}, 0.0), Error);
}

}  // TEST_SUITE
