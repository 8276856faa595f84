#include "rino/baselines.hpp"

#include <cmath>
#include <cstring>

#include "rino/parallel.hpp"

namespace rino {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Ridge fit of one row on its observed entries: solves
// (Psi^T Psi + ridge I) c = Psi^T u with Psi = modes restricted to the
// observed columns.
std::vector<double> fit_row(const DenseMatrix& modes, const double* row,
                            const BoolMask& mask, std::size_t i, double ridge,
                            std::size_t rank) {
  DenseMatrix a(rank, rank, 0.0);
  std::vector<double> b(rank, 0.0);
  for (std::size_t j = 0; j < modes.rows; ++j) {
    if (mask(i, j)) continue;
    const double* mj = modes.row(j);
    for (std::size_t k = 0; k < rank; ++k) {
      b[k] += mj[k] * row[j];
      for (std::size_t l = k; l < rank; ++l) a(k, l) += mj[k] * mj[l];
    }
  }
  for (std::size_t k = 0; k < rank; ++k) {
    a(k, k) += ridge;
    for (std::size_t l = 0; l < k; ++l) a(k, l) = a(l, k);
  }
  DenseMatrix rhs(rank, 1, 0.0);
  for (std::size_t k = 0; k < rank; ++k) rhs(k, 0) = b[k];
  DenseMatrix c = solve_spd(a, rhs, 0.0);
  std::vector<double> out(rank);
  for (std::size_t k = 0; k < rank; ++k) out[k] = c(k, 0);
  return out;
}

}  // namespace

GpodResult gpod_reconstruct(const DenseMatrix& data, const BoolMask& mask,
                            const GpodConfig& cfg) {
  const std::size_t n = data.rows, m = data.cols;
  if (mask.rows != n || mask.cols != m)
    throw Error(ErrorCode::ShapeMismatch, "mask shape vs data");
  if (cfg.rank < 1 || std::size_t(cfg.rank) > std::min(n, m))
    throw Error(ErrorCode::RangeError, "rank outside [1, min(rows, cols)]");
  if (cfg.max_iters < 1) throw Error(ErrorCode::RangeError, "max_iters < 1");

  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < m && !any; ++j) any = !mask(i, j);
    if (!any)
      throw Error(ErrorCode::EmptyRow, "row " + std::to_string(i) +
                                           " has no observed entries");
  }

  GpodResult res;
  res.filled = data;
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask(i, j)) continue;
      sum += data(i, j);
      ++count;
    }
    if (count == 0)
      throw Error(ErrorCode::EmptyColumn, "column " + std::to_string(j) +
                                              " has no observed entries");
    double mean = sum / double(count);
    for (std::size_t i = 0; i < n; ++i)
      if (mask(i, j)) res.filled(i, j) = mean;
  }

  DenseMatrix coeffs;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const std::size_t rank = std::min<std::size_t>(it, cfg.rank);
    ThinSvd svd = svd_thin(res.filled, rank);
    res.modes = svd.v;

    coeffs = DenseMatrix(n, rank, 0.0);
    parallel_for_checked(n, [&](std::size_t i) {
      std::vector<double> c =
          fit_row(res.modes, data.row(i), mask, i, cfg.ridge, rank);
      std::memcpy(coeffs.row(i), c.data(), rank * sizeof(double));
    });

    double obj = 0.0, diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double fit = 0.0;
        for (std::size_t k = 0; k < rank; ++k)
          fit += res.modes(j, k) * coeffs(i, k);
        if (mask(i, j)) {
          double old = res.filled(i, j);
          diff += (fit - old) * (fit - old);
          norm += old * old;
          res.filled(i, j) = fit;
        } else {
          double r = data(i, j) - fit;
          obj += r * r;
        }
      }
    }
    res.objective_trace.push_back(std::sqrt(obj));
    res.iterations = it;
    if (rank == std::size_t(cfg.rank) &&
        std::sqrt(diff) <= cfg.conv_tol * std::max(std::sqrt(norm), 1e-300)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

DenseMatrix gpod_fit_rows(const DenseMatrix& modes, const DenseMatrix& rows,
                          const BoolMask& mask, double ridge) {
  if (mask.rows != rows.rows || mask.cols != rows.cols)
    throw Error(ErrorCode::ShapeMismatch, "mask shape vs rows");
  if (modes.rows != rows.cols)
    throw Error(ErrorCode::ShapeMismatch, "mode length vs row length");
  const std::size_t rank = modes.cols;
  DenseMatrix out = rows;
  parallel_for_checked(rows.rows, [&](std::size_t i) {
    bool any = false;
    for (std::size_t j = 0; j < rows.cols && !any; ++j) any = !mask(i, j);
    if (!any)
      throw Error(ErrorCode::EmptyRow, "row " + std::to_string(i) +
                                           " has no observed entries");
    std::vector<double> c = fit_row(modes, rows.row(i), mask, i, ridge, rank);
    for (std::size_t j = 0; j < rows.cols; ++j) {
      if (!mask(i, j)) continue;
      double fit = 0.0;
      for (std::size_t k = 0; k < rank; ++k) fit += modes(j, k) * c[k];
      out(i, j) = fit;
    }
  });
  return out;
}

Dictionary make_analytic_dictionary(const std::string& kind, int count,
                                    RngState& rng) {
  if (count < 1) throw Error(ErrorCode::RangeError, "count < 1");
  Dictionary dict;
  dict.domain = Box::unit(1);
  dict.atoms.reserve(count);
  for (int q = 0; q < count; ++q) {
    if (kind == "random_cosine") {
      double w = kTwoPi * rng.next_normal();
      double b = kTwoPi * rng.next_uniform();
      dict.atoms.push_back(BasisFunction::analytic("cosine", {w, b}));
    } else if (kind == "random_relu") {
      std::vector<double> p;
      p.reserve(61);
      for (int i = 0; i < 20; ++i) p.push_back(rng.next_normal());
      for (int i = 0; i < 20; ++i) p.push_back(2.0 * rng.next_uniform() - 1.0);
      for (int i = 0; i < 20; ++i) p.push_back(rng.next_normal());
      p.push_back(2.0 * rng.next_uniform() - 1.0);
      dict.atoms.push_back(BasisFunction::analytic("relu_feature", p));
    } else if (kind == "monomial") {
      dict.atoms.push_back(BasisFunction::analytic("monomial", {double(q)}));
    } else if (kind == "legendre") {
      dict.atoms.push_back(BasisFunction::analytic("legendre", {double(q)}));
    } else {
      throw Error(ErrorCode::ConfigError, "unknown dictionary kind " + kind);
    }
  }
  return dict;
}

ConsistencyReport embedding_consistency_report(const Dictionary& dict,
                                               const PointCloudSignal& signal,
                                               int n_trials, double keep_fraction,
                                               RngState& rng, double lambda) {
  if (n_trials < 1) throw Error(ErrorCode::RangeError, "n_trials < 1");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw Error(ErrorCode::RangeError, "keep_fraction outside (0, 1]");
  const std::size_t q = dict.size();
  const std::size_t total = signal.points.rows;
  int keep = int(std::llround(keep_fraction * double(total)));
  if (keep < 1) keep = 1;
  SubsampleConfig sub;
  sub.m_min = sub.m_max = keep;

  ConsistencyReport rep;
  rep.coeffs = DenseMatrix(n_trials, q, 0.0);
  for (int t = 0; t < n_trials; ++t) {
    RngState trial = rng.split(std::uint64_t(t));
    PointCloudSignal kept = subsample_signal(signal, sub, trial);
    Embedding emb = project(dict, kept, lambda);
    for (std::size_t k = 0; k < q; ++k) rep.coeffs(t, k) = emb.coeffs[k];
  }

  rep.std_dev.assign(q, 0.0);
  double mean_norm = 0.0;
  for (std::size_t k = 0; k < q; ++k) {
    double mean = 0.0;
    for (int t = 0; t < n_trials; ++t) mean += rep.coeffs(t, k);
    mean /= double(n_trials);
    double var = 0.0;
    for (int t = 0; t < n_trials; ++t) {
      double d = rep.coeffs(t, k) - mean;
      var += d * d;
    }
    rep.std_dev[k] = std::sqrt(var / double(n_trials));
    mean_norm += mean * mean;
  }
  mean_norm = std::sqrt(mean_norm);

  double max_gap = 0.0;
  for (int a = 0; a < n_trials; ++a) {
    for (int b = a + 1; b < n_trials; ++b) {
      double gap = 0.0;
      for (std::size_t k = 0; k < q; ++k) {
        double d = rep.coeffs(a, k) - rep.coeffs(b, k);
        gap += d * d;
      }
      max_gap = std::max(max_gap, std::sqrt(gap));
    }
  }
  rep.rel_max_dev = max_gap / std::max(mean_norm, 1e-300);
  return rep;
}

}  // namespace rino
