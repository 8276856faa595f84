#include <doctest.h>

#include <cmath>
#include <cstring>

#include "rino/baselines.hpp"
#include "rino/dict_learn.hpp"

using namespace rino;

namespace {

constexpr double kPi = 3.14159265358979323846;

BoolMask no_mask(std::size_t n, std::size_t m) {
  BoolMask mask;
  mask.rows = n;
  mask.cols = m;
  mask.data.assign(n * m, 0);
  return mask;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
  return worst;
}

std::vector<double> row_vec(const DenseMatrix& m, std::size_t i) {
  return std::vector<double>(m.row(i), m.row(i) + m.cols);
}

PointCloudSignal signal_from_row(const DenseMatrix& grid,
                                 const DenseMatrix& values, std::size_t i) {
  PointCloudSignal sig;
  sig.points = grid;
  sig.values = row_vec(values, i);
  return sig;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("gpod with no gaps is a truncated-SVD fixed point") {
  RngState rng(4, 0);
  ThreeBasisData data = make_three_basis_dataset(20, 31, rng);
  GpodConfig cfg;
  cfg.rank = 3;
  GpodResult res = gpod_reconstruct(data.values, no_mask(20, 31), cfg);
  CHECK(res.converged);
  CHECK(std::memcmp(res.filled.data.data(), data.values.data.data(),
                    data.values.data.size() * sizeof(double)) == 0);
  CHECK(res.modes.rows == 31);
  CHECK(res.modes.cols == 3);
}

TEST_CASE("gpod recovers a rank-1 matrix exactly") {
  const std::size_t n = 12, m = 40;
  DenseMatrix data(n, m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double amp = 0.5 + 0.3 * double(i);
    for (std::size_t j = 0; j < m; ++j) {
      double x = double(j) / double(m - 1);
      data(i, j) = amp * (std::sin(2.0 * kPi * x) + 0.3);
    }
  }
  RngState rng(9, 0);
  BoolMask mask = mask_matrix(n, m, 30.0, rng);
  GpodConfig cfg;
  cfg.rank = 1;
  GpodResult res = gpod_reconstruct(data, mask, cfg);
  CHECK(res.converged);
  CHECK(max_abs_diff(res.filled, data) <= 1e-8);
}

TEST_CASE("gpod completes the three-basis data at 50 percent masking") {
  RngState rng(21, 0);
  ThreeBasisData train = make_three_basis_dataset(80, 101, rng);
  ThreeBasisData test = make_three_basis_dataset(40, 101, rng);
  RngState mask_rng(22, 0);
  BoolMask train_mask = mask_matrix(80, 101, 50.0, mask_rng);
  BoolMask test_mask = mask_matrix(40, 101, 50.0, mask_rng);

  GpodConfig cfg;
  cfg.rank = 3;
  GpodResult res = gpod_reconstruct(train.values, train_mask, cfg);
  CHECK(res.converged);

  DenseMatrix filled = gpod_fit_rows(res.modes, test.values, test_mask, cfg.ridge);
  double err = 0.0;
  for (std::size_t i = 0; i < 40; ++i)
    err += relative_mse(row_vec(test.values, i), row_vec(filled, i));
  err /= 40.0;
  CHECK(err <= 1e-6);

  // Held-out rows keep their observed entries bitwise.
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 101; ++j)
      if (!test_mask(i, j)) CHECK(filled(i, j) == test.values(i, j));
}

TEST_CASE("gpod leaves observed entries untouched and descends") {
  RngState rng(31, 0);
  ThreeBasisData data = make_three_basis_dataset(25, 40, rng);
  RngState mask_rng(32, 0);
  BoolMask mask = mask_matrix(25, 40, 40.0, mask_rng);
  GpodConfig cfg;
  cfg.rank = 3;
  GpodResult res = gpod_reconstruct(data.values, mask, cfg);

  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t j = 0; j < 40; ++j)
      if (!mask(i, j)) CHECK(res.filled(i, j) == data.values(i, j));

  REQUIRE(res.objective_trace.size() >= 2);
  for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
    CHECK(res.objective_trace[t] <= res.objective_trace[t - 1] + 1e-10);

  GpodResult again = gpod_reconstruct(data.values, mask, cfg);
  CHECK(std::memcmp(res.filled.data.data(), again.filled.data.data(),
                    res.filled.data.size() * sizeof(double)) == 0);
}

TEST_CASE("gpod rejects fully hidden rows and columns") {
  DenseMatrix data(4, 5, 1.0);
  GpodConfig cfg;
  cfg.rank = 1;

  BoolMask row_gone = no_mask(4, 5);
  for (std::size_t j = 0; j < 5; ++j) row_gone.data[2 * 5 + j] = 1;
  CHECK_THROWS_WITH_AS(gpod_reconstruct(data, row_gone, cfg),
                       doctest::Contains("row"), Error);

  BoolMask col_gone = no_mask(4, 5);
  for (std::size_t i = 0; i < 4; ++i) col_gone.data[i * 5 + 3] = 1;
  CHECK_THROWS_WITH_AS(gpod_reconstruct(data, col_gone, cfg),
                       doctest::Contains("column"), Error);

  GpodConfig bad = cfg;
  bad.rank = 6;
  CHECK_THROWS_AS(gpod_reconstruct(data, no_mask(4, 5), bad), Error);
}

TEST_CASE("monomial dictionary projects x^2 onto the last atom") {
  RngState rng(0, 0);
  Dictionary dict = make_analytic_dictionary("monomial", 3, rng);
  PointCloudSignal sig;
  sig.points = DenseMatrix(50, 1, 0.0);
  sig.values.assign(50, 0.0);
  for (int j = 0; j < 50; ++j) {
    double x = double(j) / 49.0;
    sig.points(j, 0) = x;
    sig.values[j] = x * x;
  }
  Embedding emb = project(dict, sig, 0.0);
  REQUIRE(emb.coeffs.size() == 3);
  CHECK(std::fabs(emb.coeffs[0]) <= 1e-10);
  CHECK(std::fabs(emb.coeffs[1]) <= 1e-10);
  CHECK(std::fabs(emb.coeffs[2] - 1.0) <= 1e-10);
}

TEST_CASE("legendre atoms are orthogonal under the trapezoid rule") {
  RngState rng(0, 0);
  Dictionary dict = make_analytic_dictionary("legendre", 2, rng);
  DenseMatrix grid = dense_grid(Box::unit(1), 2001);
  std::vector<double> p0 = evaluate_basis(dict.atoms[0], grid);
  std::vector<double> p1 = evaluate_basis(dict.atoms[1], grid);
  double inner = 0.0;
  for (std::size_t j = 0; j + 1 < p0.size(); ++j)
    inner += 0.5 * (p0[j] * p1[j] + p0[j + 1] * p1[j + 1]) / 2000.0;
  CHECK(std::fabs(inner) <= 1e-12);
}

TEST_CASE("random cosine atoms are deterministic and bounded") {
  RngState a(7, 0), b(7, 0);
  Dictionary da = make_analytic_dictionary("random_cosine", 100, a);
  Dictionary db = make_analytic_dictionary("random_cosine", 100, b);
  CHECK(da.fingerprint() == db.fingerprint());

  DenseMatrix grid = dense_grid(Box::unit(1), 501);
  DenseMatrix vals = evaluate_dictionary(da, grid);
  double worst = 0.0;
  for (double v : vals.data) worst = std::max(worst, std::fabs(v));
  CHECK(worst <= 1.0);

  RngState c(7, 0), d(7, 0);
  CHECK(make_analytic_dictionary("random_relu", 5, c).fingerprint() ==
        make_analytic_dictionary("random_relu", 5, d).fingerprint());
  RngState e(0, 0);
  CHECK_THROWS_AS(make_analytic_dictionary("fourier", 2, e), Error);
}

TEST_CASE("random cosine projection error falls as atoms are added") {
  RngState rng(13, 0);
  ThreeBasisData data = make_three_basis_dataset(1, 101, rng);
  PointCloudSignal sig = signal_from_row(data.grid, data.values, 0);

  const int counts[] = {5, 10, 20, 40, 80};
  std::vector<double> mean_err;
  for (int q : counts) {
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      RngState r(seed, 100);
      Dictionary dict = make_analytic_dictionary("random_cosine", q, r);
      Embedding emb = project(dict, sig, 1e-6);
      acc += relative_mse(sig.values, reconstruct(dict, emb, sig.points));
    }
    mean_err.push_back(acc / 10.0);
  }
  for (std::size_t k = 1; k < mean_err.size(); ++k)
    CHECK(mean_err[k] < mean_err[k - 1]);
}

TEST_CASE("full-sample consistency report has zero spread") {
  RngState rng(0, 0);
  Dictionary dict = make_analytic_dictionary("monomial", 3, rng);
  PointCloudSignal sig;
  sig.points = DenseMatrix(40, 1, 0.0);
  sig.values.assign(40, 0.0);
  for (int j = 0; j < 40; ++j) {
    double x = double(j) / 39.0;
    sig.points(j, 0) = x;
    sig.values[j] = 1.0 + x;
  }
  RngState trials(5, 0);
  ConsistencyReport rep = embedding_consistency_report(dict, sig, 5, 1.0, trials);
  CHECK(rep.coeffs.rows == 5);
  CHECK(rep.rel_max_dev == 0.0);
  for (double s : rep.std_dev) CHECK(s <= 1e-15);

  RngState bad(0, 0);
  CHECK_THROWS_AS(embedding_consistency_report(dict, sig, 5, 0.0, bad), Error);
  CHECK_THROWS_AS(embedding_consistency_report(dict, sig, 0, 0.5, bad), Error);
}

TEST_CASE("learned atoms give steadier embeddings than random cosines") {
  RngState data_rng(41, 0);
  ThreeBasisData data = make_three_basis_dataset(30, 101, data_rng);
  std::vector<PointCloudSignal> train;
  for (std::size_t i = 0; i < 30; ++i)
    train.push_back(signal_from_row(data.grid, data.values, i));

  DictLearnConfig cfg;
  cfg.domain = Box::unit(1);
  cfg.atom_spec.input_dim = 1;
  cfg.atom_spec.output_dim = 1;
  cfg.atom_spec.hidden_widths = {30, 30};
  cfg.atom_spec.activation = Activation::Sine;
  cfg.atom_spec.omega0 = 10.0;
  cfg.lambda = 1e-6;
  cfg.tol = 1e-5;
  cfg.max_atoms = 4;  // constant plus three trained atoms
  cfg.epochs_per_atom = 800;
  cfg.lr = 3e-4;
  RngState learn_rng(42, 0);
  DictLearnResult learned = learn_dictionary_batch(train, cfg, learn_rng);

  ThreeBasisData probe = make_three_basis_dataset(1, 101, data_rng);
  PointCloudSignal sig = signal_from_row(probe.grid, probe.values, 0);

  RngState t1(50, 0), t2(50, 0);
  ConsistencyReport rep_learned =
      embedding_consistency_report(learned.dictionary, sig, 5, 0.5, t1, 1e-6);
  RngState cos_rng(51, 0);
  Dictionary cosine = make_analytic_dictionary("random_cosine", 3, cos_rng);
  ConsistencyReport rep_cosine =
      embedding_consistency_report(cosine, sig, 5, 0.5, t2, 1e-6);

  CHECK(rep_learned.rel_max_dev <= 0.05);
  CHECK(rep_cosine.rel_max_dev >= 5.0 * rep_learned.rel_max_dev);
}

}  // TEST_SUITE
