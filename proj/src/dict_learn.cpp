#include "rino/dict_learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rino/parallel.hpp"

namespace rino {

namespace {

void validate(const std::vector<PointCloudSignal>& dataset,
              const DictLearnConfig& cfg) {
  if (dataset.empty())
    throw Error(ErrorCode::ShapeMismatch, "dictionary learning needs data");
  for (const auto& sig : dataset) {
    if (sig.points.rows == 0 || sig.points.rows != sig.values.size())
      throw Error(ErrorCode::ShapeMismatch, "signal points vs values");
    if (sig.points.cols != std::size_t(cfg.domain.dim))
      throw Error(ErrorCode::ShapeMismatch, "signal dim vs learning domain");
  }
  if (cfg.lambda < 0.0) throw Error(ErrorCode::RangeError, "negative lambda");
  if (!(cfg.tol > 0.0) || cfg.tol >= 1.0)
    throw Error(ErrorCode::RangeError, "tol must lie in (0, 1)");
  if (cfg.max_atoms < 1) throw Error(ErrorCode::RangeError, "max_atoms < 1");
  if (cfg.epochs_per_atom < 1)
    throw Error(ErrorCode::RangeError, "epochs_per_atom < 1");
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

// Relative MSE with the all-zero convention: a zero signal is represented
// exactly by zero coefficients, so its error is zero rather than undefined.
double rel_err_or_zero(const std::vector<double>& truth,
                       const std::vector<double>& rec) {
  double sup = sup_abs(truth);
  if (sup < 1e-300) return 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    double d = truth[j] - rec[j];
    s += d * d;
  }
  return s / (double(truth.size()) * sup * sup);
}

double dataset_error(const Dictionary& dict,
                     const std::vector<PointCloudSignal>& dataset,
                     double lambda) {
  std::vector<double> errs(dataset.size(), 0.0);
  parallel_for_checked(dataset.size(), [&](std::size_t i) {
    const PointCloudSignal& sig = dataset[i];
    std::vector<double> rec(sig.values.size(), 0.0);
    if (!dict.atoms.empty()) {
      Embedding emb = project(dict, sig, lambda);
      rec = reconstruct(dict, emb, sig.points);
    }
    errs[i] = rel_err_or_zero(sig.values, rec);
  });
  double s = 0.0;
  for (double e : errs) s += e;
  return s / double(errs.size());
}

DenseMatrix freeze_grid(const Box& domain) {
  return dense_grid(domain, domain.dim == 1 ? 10000 : 128);
}

struct EarlyStop {
  double delta;
  int patience;
  double prev = std::numeric_limits<double>::infinity();
  int stall = 0;

  bool update(double value) {
    if (prev - value < delta) {
      if (++stall >= patience) return true;
    } else {
      stall = 0;
    }
    prev = value;
    return false;
  }
};

}  // namespace

DictLearnResult learn_dictionary_batch(const std::vector<PointCloudSignal>& dataset,
                                       const DictLearnConfig& cfg, RngState& rng) {
  validate(dataset, cfg);
  const std::size_t n = dataset.size();

  DictLearnResult result;
  Dictionary& dict = result.dictionary;
  dict.domain = cfg.domain;
  dict.atoms = {BasisFunction::constant_one()};

  // Pooled sample points, shared by every atom round.
  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    offsets[i + 1] = offsets[i] + dataset[i].points.rows;
  const std::size_t pooled_n = offsets[n];
  DenseMatrix pooled(pooled_n, std::size_t(cfg.domain.dim), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const DenseMatrix& pts = dataset[i].points;
    std::copy(pts.data.begin(), pts.data.end(),
              pooled.data.begin() + offsets[i] * pts.cols);
  }
  std::vector<double> sup2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = sup_abs(dataset[i].values);
    sup2[i] = s * s;
  }

  const DenseMatrix quad = freeze_grid(cfg.domain);
  double err = dataset_error(dict, dataset, cfg.lambda);
  result.trace.push_back({int(dict.size()), -1, err, true});

  while (err > cfg.tol && int(dict.size()) < cfg.max_atoms) {
    const std::size_t q = dict.size();
    RngState atom_rng = rng.split(q);
    MlpParams params = init_mlp(cfg.atom_spec, atom_rng);
    AdamState adam;
    adam.lr = cfg.lr;

    // Frozen-atom rows and kernels are constant within the round.
    std::vector<DenseMatrix> psi_old(n), k_old(n);
    std::vector<std::vector<double>> rhs_old(n);
    parallel_for_checked(n, [&](std::size_t i) {
      psi_old[i] = evaluate_dictionary(dict, dataset[i].points);
      k_old[i] = matmul_nt(psi_old[i], psi_old[i]);
      for (std::size_t r = 0; r < q; ++r) k_old[i](r, r) += cfg.lambda;
      rhs_old[i].assign(q, 0.0);
      for (std::size_t r = 0; r < q; ++r) {
        const double* row = psi_old[i].row(r);
        double s = 0.0;
        for (std::size_t j = 0; j < dataset[i].values.size(); ++j)
          s += row[j] * dataset[i].values[j];
        rhs_old[i][r] = s;
      }
    });

    std::vector<double> relmse(n, 0.0), a(pooled_n, 0.0);
    std::vector<double> pflat, gflat;
    EarlyStop stop{cfg.early_stop_delta, cfg.early_stop_patience};

    for (int epoch = 0; epoch < cfg.epochs_per_atom; ++epoch) {
      DenseMatrix p = mlp_forward(cfg.atom_spec, params, pooled);
      double msq = 0.0;
      for (std::size_t k = 0; k < pooled_n; ++k) msq += p(k, 0) * p(k, 0);
      msq /= double(pooled_n);
      const double s = std::sqrt(std::max(msq, 1e-300));

      parallel_for_checked(n, [&](std::size_t i) {
        const PointCloudSignal& sig = dataset[i];
        const std::size_t m = sig.values.size();
        const double* praw = p.data.data() + offsets[i];

        std::vector<double> pn(m);
        for (std::size_t j = 0; j < m; ++j) pn[j] = praw[j] / s;

        DenseMatrix kk(q + 1, q + 1, 0.0);
        DenseMatrix rhs(q + 1, 1, 0.0);
        for (std::size_t r = 0; r < q; ++r) {
          for (std::size_t c = 0; c < q; ++c) kk(r, c) = k_old[i](r, c);
          const double* row = psi_old[i].row(r);
          double dot = 0.0;
          for (std::size_t j = 0; j < m; ++j) dot += row[j] * pn[j];
          kk(r, q) = dot;
          kk(q, r) = dot;
          rhs(r, 0) = rhs_old[i][r];
        }
        double d = 0.0, ru = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          d += pn[j] * pn[j];
          ru += pn[j] * sig.values[j];
        }
        kk(q, q) = d + cfg.lambda;
        rhs(q, 0) = ru;
        DenseMatrix alpha = solve_spd(kk, rhs, 0.0);

        const double coef = 2.0 * alpha(q, 0) / (double(n) * double(m));
        double sq = 0.0;
        double* ai = a.data() + offsets[i];
        for (std::size_t j = 0; j < m; ++j) {
          double rec = alpha(q, 0) * pn[j];
          for (std::size_t r = 0; r < q; ++r)
            rec += alpha(r, 0) * psi_old[i](r, j);
          double res = rec - sig.values[j];
          sq += res * res;
          ai[j] = coef * res;
        }
        relmse[i] = sup2[i] < 1e-300 ? 0.0 : sq / (double(m) * sup2[i]);
      });

      double epoch_err = 0.0;
      for (double e : relmse) epoch_err += e;
      epoch_err /= double(n);
      result.trace.push_back({int(q + 1), epoch, epoch_err, false});
      if (stop.update(epoch_err)) break;

      // d/dp of the pooled loss through the batch normalization p/s.
      double t = 0.0;
      for (std::size_t k = 0; k < pooled_n; ++k) t += a[k] * p(k, 0);
      DenseMatrix w(pooled_n, 1, 0.0);
      const double s3 = double(pooled_n) * s * s * s;
      for (std::size_t k = 0; k < pooled_n; ++k)
        w(k, 0) = a[k] / s - t * p(k, 0) / s3;

      MlpParams grads = mlp_param_grads(cfg.atom_spec, params, pooled, w);
      flatten_params(params, pflat);
      flatten_params(grads, gflat);
      adam_step(adam, pflat, gflat);
      unflatten_params(pflat, params);
    }

    bool degenerate = false;
    try {
      freeze_scale(cfg.atom_spec, params, quad);
    } catch (const Error& e) {
      if (e.code != ErrorCode::DegenerateBasis) throw;
      degenerate = true;
    }
    if (!degenerate) {
      Dictionary candidate = dict;
      candidate.atoms.push_back(BasisFunction::neural(cfg.atom_spec, params));
      double err_new = dataset_error(candidate, dataset, cfg.lambda);
      if (err - err_new >= cfg.min_gain * err) {
        dict = candidate;
        err = err_new;
        result.trace.push_back({int(dict.size()), -1, err, true});
        continue;
      }
    }
    result.no_progress = true;
    break;
  }
  return result;
}

DictLearnResult learn_dictionary_samplewise(
    const std::vector<PointCloudSignal>& dataset, const DictLearnConfig& cfg,
    RngState& rng) {
  validate(dataset, cfg);

  DictLearnResult result;
  Dictionary& dict = result.dictionary;
  dict.domain = cfg.domain;

  const DenseMatrix quad = freeze_grid(cfg.domain);
  std::vector<double> pflat, gflat;

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const PointCloudSignal& sig = dataset[i];
    const std::size_t m = sig.values.size();

    std::vector<double> rec(m, 0.0);
    if (!dict.atoms.empty())
      rec = reconstruct(dict, project(dict, sig, cfg.lambda), sig.points);
    double err = rel_err_or_zero(sig.values, rec);
    if (err <= cfg.tol) {
      result.trace.push_back({int(dict.size()), int(i), err, false});
      continue;
    }
    if (int(dict.size()) >= cfg.max_atoms) {
      result.trace.push_back({int(dict.size()), int(i), err, false});
      continue;
    }

    // Fit one atom to this realization's residual; the scale is learned, not
    // batch-normalized, since a single sample defines the target amplitude.
    std::vector<double> resid(m);
    for (std::size_t j = 0; j < m; ++j) resid[j] = sig.values[j] - rec[j];

    RngState atom_rng = rng.split(i + 1);
    MlpParams params = init_mlp(cfg.atom_spec, atom_rng);
    AdamState adam;
    adam.lr = cfg.lr;
    EarlyStop stop{cfg.early_stop_delta, cfg.early_stop_patience};

    for (int epoch = 0; epoch < cfg.epochs_per_atom; ++epoch) {
      DenseMatrix p = mlp_forward(cfg.atom_spec, params, sig.points);
      double loss = 0.0;
      DenseMatrix w(m, 1, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        double d = p(j, 0) - resid[j];
        loss += d * d;
        w(j, 0) = 2.0 * d / double(m);
      }
      loss /= double(m);
      if (stop.update(loss)) break;

      MlpParams grads = mlp_param_grads(cfg.atom_spec, params, sig.points, w);
      flatten_params(params, pflat);
      flatten_params(grads, gflat);
      adam_step(adam, pflat, gflat);
      unflatten_params(pflat, params);
    }

    bool degenerate = false;
    try {
      freeze_scale(cfg.atom_spec, params, quad);
    } catch (const Error& e) {
      if (e.code != ErrorCode::DegenerateBasis) throw;
      degenerate = true;
    }
    if (!degenerate) {
      Dictionary candidate = dict;
      candidate.atoms.push_back(BasisFunction::neural(cfg.atom_spec, params));
      double err_after = rel_err_or_zero(
          sig.values,
          reconstruct(candidate, project(candidate, sig, cfg.lambda), sig.points));
      if (err - err_after >= cfg.min_gain * err) {
        dict = candidate;
        result.trace.push_back({int(dict.size()), int(i), err_after, true});
        continue;
      }
    }
    result.no_progress = true;
    break;
  }
  return result;
}

}  // namespace rino
