#include "rino/deeponet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "rino/json_io.hpp"
#include "rino/parallel.hpp"
#include "rino/sha256.hpp"

namespace rino {

namespace {

void check_model(const DeepOnetModel& m) {
  if (m.p < 1) throw Error(ErrorCode::ConfigError, "operator width P < 1");
  if (!m.identity_branch && m.branch_spec.output_dim != m.p)
    throw Error(ErrorCode::ShapeMismatch, "branch output dim vs P");
  switch (m.trunk_kind) {
    case TrunkKind::Network:
      if (m.trunk_spec.output_dim != m.p)
        throw Error(ErrorCode::ShapeMismatch, "trunk output dim vs P");
      break;
    case TrunkKind::Pod:
      if (m.pod.modes.cols != std::size_t(m.p) ||
          m.pod.modes.rows != m.pod.grid.rows)
        throw Error(ErrorCode::ShapeMismatch, "POD trunk shapes");
      if (!m.pod.mean.empty() && m.pod.mean.size() != m.pod.grid.rows)
        throw Error(ErrorCode::ShapeMismatch, "POD mean length");
      break;
    case TrunkKind::Dict:
      if (m.trunk_dict.size() != std::size_t(m.p))
        throw Error(ErrorCode::ShapeMismatch, "trunk dictionary size vs P");
      break;
  }
}

bool same_matrix(const DenseMatrix& a, const DenseMatrix& b) {
  return a.rows == b.rows && a.cols == b.cols &&
         (a.data.empty() ||
          std::memcmp(a.data.data(), b.data.data(),
                      sizeof(double) * a.data.size()) == 0);
}

// Match every query row to a stored grid row (exact up to 1e-12 per
// coordinate). Queries off the grid raise OffGridQuery.
std::vector<std::size_t> match_pod_rows(const PodTrunk& pod,
                                        const DenseMatrix& y) {
  const std::size_t k = pod.grid.rows, d = pod.grid.cols;
  if (y.cols != d) throw Error(ErrorCode::ShapeMismatch, "query dim vs POD grid");
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto lex_less = [&](std::size_t a, const double* row) {
    const double* ra = pod.grid.row(a);
    for (std::size_t c = 0; c < d; ++c) {
      if (ra[c] < row[c]) return true;
      if (ra[c] > row[c]) return false;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(a, pod.grid.row(b));
  });
  auto matches = [&](std::size_t g, const double* row) {
    const double* rg = pod.grid.row(g);
    for (std::size_t c = 0; c < d; ++c)
      if (std::fabs(rg[c] - row[c]) > 1e-12) return false;
    return true;
  };
  std::vector<std::size_t> out(y.rows);
  for (std::size_t j = 0; j < y.rows; ++j) {
    const double* row = y.row(j);
    auto it = std::lower_bound(order.begin(), order.end(), row, lex_less);
    const std::size_t pos = std::size_t(it - order.begin());
    bool found = false;
    for (std::size_t f = pos; f < k && !found; ++f) {
      if (pod.grid.row(order[f])[0] - row[0] > 1e-12) break;
      if (matches(order[f], row)) {
        out[j] = order[f];
        found = true;
      }
    }
    for (std::size_t bck = pos; bck > 0 && !found; --bck) {
      if (row[0] - pod.grid.row(order[bck - 1])[0] > 1e-12) break;
      if (matches(order[bck - 1], row)) {
        out[j] = order[bck - 1];
        found = true;
      }
    }
    if (!found)
      throw Error(ErrorCode::OffGridQuery, "POD trunk queried off its grid");
  }
  return out;
}

// Trunk basis rows at the query points (K x P); POD mean handled separately.
DenseMatrix trunk_rows_at(const DeepOnetModel& m, const DenseMatrix& y) {
  switch (m.trunk_kind) {
    case TrunkKind::Network:
      return mlp_forward(m.trunk_spec, m.trunk_params, y);
    case TrunkKind::Dict: {
      DenseMatrix psi = evaluate_dictionary(m.trunk_dict, y);  // P x K
      DenseMatrix t(y.rows, psi.rows, 0.0);
      for (std::size_t r = 0; r < psi.rows; ++r)
        for (std::size_t j = 0; j < y.rows; ++j) t(j, r) = psi(r, j);
      return t;
    }
    case TrunkKind::Pod: {
      std::vector<std::size_t> rows = match_pod_rows(m.pod, y);
      DenseMatrix t(y.rows, m.pod.modes.cols, 0.0);
      for (std::size_t j = 0; j < y.rows; ++j)
        std::copy(m.pod.modes.row(rows[j]),
                  m.pod.modes.row(rows[j]) + m.pod.modes.cols, t.row(j));
      return t;
    }
  }
  throw Error(ErrorCode::ConfigError, "bad trunk kind");
}

std::vector<double> pod_mean_at(const PodTrunk& pod, const DenseMatrix& y) {
  std::vector<double> out(y.rows, 0.0);
  if (pod.mean.empty()) return out;
  std::vector<std::size_t> rows = match_pod_rows(pod, y);
  for (std::size_t j = 0; j < y.rows; ++j) out[j] = pod.mean[rows[j]];
  return out;
}

std::vector<double> normalized_embedding(const DeepOnetModel& m,
                                         const std::vector<double>& coeffs) {
  std::vector<double> out = coeffs;
  if (m.normalize_embeddings && !m.identity_branch) {
    if (coeffs.size() != m.embed_min.size())
      throw Error(ErrorCode::ShapeMismatch, "embedding length vs normalization");
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] = (out[c] - m.embed_min[c]) / m.embed_range[c];
  }
  return out;
}

std::vector<double> branch_output_single(const DeepOnetModel& m,
                                         const Embedding& alpha) {
  if (m.identity_branch) {
    if (alpha.coeffs.size() != std::size_t(m.p))
      throw Error(ErrorCode::ShapeMismatch, "identity branch needs |alpha| == P");
    return alpha.coeffs;
  }
  std::vector<double> in = normalized_embedding(m, alpha.coeffs);
  if (int(in.size()) != m.branch_spec.input_dim)
    throw Error(ErrorCode::ShapeMismatch, "embedding length vs branch input");
  DenseMatrix x(1, in.size(), 0.0);
  std::copy(in.begin(), in.end(), x.data.begin());
  DenseMatrix out = mlp_forward(m.branch_spec, m.branch_params, x);
  return out.data;
}

double sup2_or_unit(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  // Zero signals get unit normalization so their loss stays defined.
  return s < 1e-300 ? 1.0 : s * s;
}

TrainResult train_core(const std::vector<OperatorSample>& dataset,
                       const DeepOnetModel& init, const TrainConfig& cfg,
                       bool trunk_trainable, bool predefined) {
  TrainResult out;
  out.model = init;
  DeepOnetModel& m = out.model;
  check_model(m);
  if (cfg.epochs < 1) throw Error(ErrorCode::RangeError, "epochs < 1");
  if (cfg.tau < 0.0) throw Error(ErrorCode::RangeError, "negative tau");
  if (!(cfg.lr > 0.0)) throw Error(ErrorCode::RangeError, "lr must be positive");
  if (dataset.empty())
    throw Error(ErrorCode::ShapeMismatch, "empty operator dataset");

  const std::size_t n = dataset.size();
  const std::string& fp0 = dataset[0].input_embedding.dictionary_fingerprint;
  const std::size_t q = dataset[0].input_embedding.coeffs.size();
  for (const OperatorSample& s : dataset) {
    if (s.input_embedding.dictionary_fingerprint != fp0)
      throw Error(ErrorCode::FingerprintMismatch, "mixed input dictionaries");
    if (s.input_embedding.coeffs.size() != q)
      throw Error(ErrorCode::ShapeMismatch, "embedding lengths differ");
    if (s.output_points.rows == 0 ||
        s.output_points.rows != s.output_values.size())
      throw Error(ErrorCode::ShapeMismatch, "output points vs values");
  }
  if (m.input_dictionary_fingerprint.empty())
    m.input_dictionary_fingerprint = fp0;
  else if (m.input_dictionary_fingerprint != fp0)
    throw Error(ErrorCode::FingerprintMismatch, "dataset vs model dictionary");

  if (m.identity_branch) {
    if (q != std::size_t(m.p))
      throw Error(ErrorCode::ShapeMismatch, "identity branch needs |alpha| == P");
  } else if (m.branch_spec.input_dim != int(q)) {
    throw Error(ErrorCode::ShapeMismatch, "branch input dim vs embedding length");
  }

  if (predefined) {
    std::string want;
    if (m.trunk_kind == TrunkKind::Pod) want = pod_fingerprint(m.pod);
    if (m.trunk_kind == TrunkKind::Dict) want = m.trunk_dict.fingerprint();
    for (const OperatorSample& s : dataset) {
      if (!s.output_embedding.has_value())
        throw Error(ErrorCode::MissingGamma,
                    "predefined-trunk training needs output embeddings");
      if (s.output_embedding->coeffs.size() != std::size_t(m.p))
        throw Error(ErrorCode::ShapeMismatch, "gamma length vs P");
      if (!want.empty() && s.output_embedding->dictionary_fingerprint != want)
        throw Error(ErrorCode::FingerprintMismatch, "gamma vs trunk basis");
    }
  }

  const bool update_trunk = trunk_trainable &&
                            m.trunk_kind == TrunkKind::Network &&
                            !cfg.freeze_trunk;
  if (m.identity_branch && !update_trunk)
    throw Error(ErrorCode::ConfigError, "model has no trainable parameters");

  if (cfg.normalize_embeddings && !m.identity_branch) {
    m.normalize_embeddings = true;
    m.embed_min.assign(q, std::numeric_limits<double>::infinity());
    m.embed_range.assign(q, -std::numeric_limits<double>::infinity());
    for (const OperatorSample& s : dataset)
      for (std::size_t c = 0; c < q; ++c) {
        m.embed_min[c] = std::min(m.embed_min[c], s.input_embedding.coeffs[c]);
        m.embed_range[c] = std::max(m.embed_range[c], s.input_embedding.coeffs[c]);
      }
    for (std::size_t c = 0; c < q; ++c) {
      m.embed_range[c] -= m.embed_min[c];
      if (m.embed_range[c] < 1e-300) m.embed_range[c] = 1.0;
    }
  }

  DenseMatrix a(n, q, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row = normalized_embedding(m, dataset[i].input_embedding.coeffs);
    std::copy(row.begin(), row.end(), a.row(i));
  }

  std::vector<double> sup2(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) sup2[i] = sup2_or_unit(dataset[i].output_values);

  bool shared = true;
  for (std::size_t i = 1; i < n && shared; ++i)
    shared = same_matrix(dataset[i].output_points, dataset[0].output_points);

  const bool pod_fast = predefined && m.trunk_kind == TrunkKind::Pod && shared &&
                        same_matrix(dataset[0].output_points, m.pod.grid);

  // Targets with the POD mean already removed, so predictions are pure basis
  // combinations everywhere below.
  std::vector<std::vector<double>> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = dataset[i].output_values;
  if (m.trunk_kind == TrunkKind::Pod && !m.pod.mean.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> mean = pod_mean_at(m.pod, dataset[i].output_points);
      for (std::size_t j = 0; j < targets[i].size(); ++j) targets[i][j] -= mean[j];
    }
  }

  // Pooled layout for per-realization grids.
  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    offsets[i + 1] = offsets[i] + dataset[i].output_points.rows;
  DenseMatrix pooled_pts;
  if (!shared && !pod_fast) {
    pooled_pts = DenseMatrix(offsets[n], dataset[0].output_points.cols, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      std::copy(dataset[i].output_points.data.begin(),
                dataset[i].output_points.data.end(),
                pooled_pts.data.begin() + offsets[i] * pooled_pts.cols);
  }

  DenseMatrix t_fixed;
  if (!pod_fast && m.trunk_kind != TrunkKind::Network)
    t_fixed = trunk_rows_at(m, shared ? dataset[0].output_points : pooled_pts);

  // Fast-path constants: |s' - T b|^2 = c0 - 2 delta.(b - gamma) + |b - gamma|^2
  // with delta = T^T s' - gamma and c0 = |s' - T gamma|^2.
  std::vector<std::vector<double>> gamma(n), delta(n);
  std::vector<double> c0(n, 0.0);
  if (pod_fast) {
    parallel_for_checked(n, [&](std::size_t i) {
      const std::size_t kk = targets[i].size();
      gamma[i] = dataset[i].output_embedding->coeffs;
      std::vector<double> proj(m.p, 0.0);
      for (std::size_t j = 0; j < kk; ++j) {
        const double* mr = m.pod.modes.row(j);
        for (int k = 0; k < m.p; ++k) proj[k] += mr[k] * targets[i][j];
      }
      delta[i].resize(m.p);
      for (int k = 0; k < m.p; ++k) delta[i][k] = proj[k] - gamma[i][k];
      double s = 0.0;
      for (std::size_t j = 0; j < kk; ++j) {
        const double* mr = m.pod.modes.row(j);
        double rec = 0.0;
        for (int k = 0; k < m.p; ++k) rec += mr[k] * gamma[i][k];
        double r = targets[i][j] - rec;
        s += r * r;
      }
      c0[i] = s;
    });
  } else if (predefined) {
    for (std::size_t i = 0; i < n; ++i) gamma[i] = dataset[i].output_embedding->coeffs;
  }

  // Flat parameter vector: branch first (unless identity), then the trunk
  // when it is trainable.
  std::vector<double> flat, gflat, tmp;
  const std::size_t branch_n = m.identity_branch ? 0 : param_count(m.branch_spec);
  const std::size_t trunk_n = update_trunk ? param_count(m.trunk_spec) : 0;
  flat.reserve(branch_n + trunk_n);
  if (!m.identity_branch) {
    flatten_params(m.branch_params, tmp);
    flat.insert(flat.end(), tmp.begin(), tmp.end());
  }
  if (update_trunk) {
    flatten_params(m.trunk_params, tmp);
    flat.insert(flat.end(), tmp.begin(), tmp.end());
  }
  auto push_down = [&]() {
    if (!m.identity_branch) {
      tmp.assign(flat.begin(), flat.begin() + branch_n);
      unflatten_params(tmp, m.branch_params);
    }
    if (update_trunk) {
      tmp.assign(flat.begin() + branch_n, flat.end());
      unflatten_params(tmp, m.trunk_params);
    }
  };

  AdamState adam;
  adam.lr = cfg.lr;

  const bool full_batch = cfg.batch_size <= 0 || std::size_t(cfg.batch_size) >= n;
  RngState batch_rng(cfg.seed, 0x0B17C5);

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});

  auto run_step = [&](const std::vector<std::size_t>& idx) -> double {
    const std::size_t bn = idx.size();
    DenseMatrix abatch(bn, q, 0.0);
    for (std::size_t ib = 0; ib < bn; ++ib)
      std::copy(a.row(idx[ib]), a.row(idx[ib]) + q, abatch.row(ib));
    DenseMatrix bout = m.identity_branch
                           ? abatch
                           : mlp_forward(m.branch_spec, m.branch_params, abatch);

    std::vector<double> losses(bn, 0.0);
    DenseMatrix wb(bn, std::size_t(m.p), 0.0);

    DenseMatrix tg_grads_holder;
    MlpParams branch_grads, trunk_grads;

    if (pod_fast) {
      parallel_for_checked(bn, [&](std::size_t ib) {
        const std::size_t i = idx[ib];
        const double* b = bout.row(ib);
        const double kk = double(targets[i].size());
        double e2 = 0.0, de = 0.0;
        for (int k = 0; k < m.p; ++k) {
          double e = b[k] - gamma[i][k];
          e2 += e * e;
          de += delta[i][k] * e;
        }
        losses[ib] = (c0[i] - 2.0 * de + e2) / (kk * sup2[i]) + cfg.tau * e2;
        const double w1 = 2.0 / (double(bn) * kk * sup2[i]);
        const double w2 = 2.0 * cfg.tau / double(bn);
        for (int k = 0; k < m.p; ++k) {
          double e = b[k] - gamma[i][k];
          wb(ib, k) = (e - delta[i][k]) * w1 + e * w2;
        }
      });
    } else {
      // Trunk rows for this step.
      DenseMatrix t_epoch;
      std::vector<std::size_t> step_off(bn + 1, 0);
      const DenseMatrix* t = &t_fixed;
      if (m.trunk_kind == TrunkKind::Network) {
        if (shared) {
          t_epoch = mlp_forward(m.trunk_spec, m.trunk_params,
                                dataset[0].output_points);
        } else {
          for (std::size_t ib = 0; ib < bn; ++ib)
            step_off[ib + 1] = step_off[ib] + dataset[idx[ib]].output_points.rows;
          DenseMatrix pts(step_off[bn], dataset[0].output_points.cols, 0.0);
          for (std::size_t ib = 0; ib < bn; ++ib)
            std::copy(dataset[idx[ib]].output_points.data.begin(),
                      dataset[idx[ib]].output_points.data.end(),
                      pts.data.begin() + step_off[ib] * pts.cols);
          t_epoch = mlp_forward(m.trunk_spec, m.trunk_params, pts);
          tg_grads_holder = std::move(pts);  // kept for the backward pass
        }
        t = &t_epoch;
      }

      const std::size_t krows = shared ? dataset[0].output_points.rows : 0;
      DenseMatrix g(bn, shared ? krows : 0, 0.0);
      std::vector<double> gpool;
      if (!shared) gpool.assign(m.trunk_kind == TrunkKind::Network
                                    ? step_off[bn]
                                    : offsets[n],
                                0.0);

      parallel_for_checked(bn, [&](std::size_t ib) {
        const std::size_t i = idx[ib];
        const std::size_t kk = targets[i].size();
        const double* b = bout.row(ib);
        std::size_t base = 0;
        if (!shared)
          base = m.trunk_kind == TrunkKind::Network ? step_off[ib] : offsets[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < kk; ++j) {
          const double* tr = t->row(shared ? j : base + j);
          double pred = 0.0;
          for (int k = 0; k < m.p; ++k) pred += tr[k] * b[k];
          double res = pred - targets[i][j];
          acc += res * res;
          double gij = 2.0 * res / (double(bn) * double(kk) * sup2[i]);
          if (shared)
            g(ib, j) = gij;
          else
            gpool[base + j] = gij;
          for (int k = 0; k < m.p; ++k) wb(ib, k) += gij * tr[k];
        }
        losses[ib] = acc / (double(kk) * sup2[i]);
        if (predefined && cfg.tau != 0.0) {
          double e2 = 0.0;
          for (int k = 0; k < m.p; ++k) {
            double e = b[k] - gamma[i][k];
            e2 += e * e;
            wb(ib, k) += 2.0 * cfg.tau * e / double(bn);
          }
          losses[ib] += cfg.tau * e2;
        }
      });

      if (update_trunk) {
        if (shared) {
          DenseMatrix wt(krows, std::size_t(m.p), 0.0);
          parallel_for(krows, [&](std::size_t j) {
            for (std::size_t ib = 0; ib < bn; ++ib) {
              const double gij = g(ib, j);
              if (gij == 0.0) continue;
              const double* b = bout.row(ib);
              for (int k = 0; k < m.p; ++k) wt(j, k) += gij * b[k];
            }
          });
          trunk_grads = mlp_param_grads(m.trunk_spec, m.trunk_params,
                                        dataset[0].output_points, wt);
        } else {
          DenseMatrix wt(step_off[bn], std::size_t(m.p), 0.0);
          parallel_for(bn, [&](std::size_t ib) {
            const std::size_t i = idx[ib];
            const double* b = bout.row(ib);
            for (std::size_t j = 0; j < targets[i].size(); ++j) {
              const double gij = gpool[step_off[ib] + j];
              for (int k = 0; k < m.p; ++k)
                wt(step_off[ib] + j, k) = gij * b[k];
            }
          });
          trunk_grads = mlp_param_grads(m.trunk_spec, m.trunk_params,
                                        tg_grads_holder, wt);
        }
      }
    }

    if (!m.identity_branch)
      branch_grads = mlp_param_grads(m.branch_spec, m.branch_params, abatch, wb);

    gflat.clear();
    if (!m.identity_branch) {
      flatten_params(branch_grads, tmp);
      gflat.insert(gflat.end(), tmp.begin(), tmp.end());
    }
    if (update_trunk) {
      flatten_params(trunk_grads, tmp);
      gflat.insert(gflat.end(), tmp.begin(), tmp.end());
    }
    adam_step(adam, flat, gflat);
    push_down();

    double loss = 0.0;
    for (double v : losses) loss += v;
    return loss / double(bn);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    bool nan_abort = false;
    if (full_batch) {
      try {
        epoch_loss = run_step(all);
      } catch (const Error& e) {
        if (e.code != ErrorCode::NaNGradient) throw;
        nan_abort = true;
      }
    } else {
      std::vector<std::size_t> order = all;
      RngState shuffle_rng = batch_rng.split(std::uint64_t(epoch));
      for (std::size_t j = n - 1; j > 0; --j)
        std::swap(order[j], order[shuffle_rng.next_below(j + 1)]);
      for (std::size_t start = 0; start < n && !nan_abort;
           start += std::size_t(cfg.batch_size)) {
        std::size_t stop = std::min(n, start + std::size_t(cfg.batch_size));
        std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
        try {
          epoch_loss += run_step(idx) * double(idx.size()) / double(n);
        } catch (const Error& e) {
          if (e.code != ErrorCode::NaNGradient) throw;
          nan_abort = true;
        }
      }
    }
    if (nan_abort) {
      out.aborted = true;
      break;
    }
    out.loss_trace.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss)) {
      out.aborted = true;
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<double> predict(const DeepOnetModel& model, const Embedding& alpha,
                            const DenseMatrix& y) {
  check_model(model);
  if (alpha.dictionary_fingerprint != model.input_dictionary_fingerprint)
    throw Error(ErrorCode::FingerprintMismatch,
                "embedding from a different input dictionary");
  std::vector<double> b = branch_output_single(model, alpha);
  DenseMatrix t = trunk_rows_at(model, y);
  std::vector<double> out(y.rows, 0.0);
  for (std::size_t j = 0; j < y.rows; ++j) {
    const double* tr = t.row(j);
    double s = 0.0;
    for (int k = 0; k < model.p; ++k) s += tr[k] * b[k];
    out[j] = s;
  }
  if (model.trunk_kind == TrunkKind::Pod && !model.pod.mean.empty()) {
    std::vector<double> mean = pod_mean_at(model.pod, y);
    for (std::size_t j = 0; j < y.rows; ++j) out[j] += mean[j];
  }
  return out;
}

double evaluate_operator(const DeepOnetModel& model,
                         const std::vector<OperatorSample>& samples) {
  if (samples.empty())
    throw Error(ErrorCode::ShapeMismatch, "no samples to evaluate");
  std::vector<double> errs(samples.size(), 0.0);
  parallel_for_checked(samples.size(), [&](std::size_t i) {
    std::vector<double> pred =
        predict(model, samples[i].input_embedding, samples[i].output_points);
    errs[i] = relative_mse(samples[i].output_values, pred);
  });
  double s = 0.0;
  for (double e : errs) s += e;
  return s / double(errs.size());
}

TrainResult train_unknown_trunk(const std::vector<OperatorSample>& dataset,
                                const DeepOnetModel& init,
                                const TrainConfig& cfg) {
  return train_core(dataset, init, cfg, true, false);
}

TrainResult train_predefined_trunk(const std::vector<OperatorSample>& dataset,
                                   const DeepOnetModel& init,
                                   const TrainConfig& cfg) {
  return train_core(dataset, init, cfg, false, true);
}

PodBasis pod_modes(const DenseMatrix& snapshots, int p, bool center) {
  if (p < 1) throw Error(ErrorCode::RangeError, "POD rank < 1");
  if (std::size_t(p) > std::min(snapshots.rows, snapshots.cols))
    throw Error(ErrorCode::RangeError, "POD rank exceeds matrix size");

  PodBasis basis;
  DenseMatrix work = snapshots;
  if (center) {
    basis.mean.assign(snapshots.cols, 0.0);
    for (std::size_t i = 0; i < snapshots.rows; ++i)
      for (std::size_t j = 0; j < snapshots.cols; ++j)
        basis.mean[j] += snapshots(i, j);
    for (double& v : basis.mean) v /= double(snapshots.rows);
    for (std::size_t i = 0; i < work.rows; ++i)
      for (std::size_t j = 0; j < work.cols; ++j) work(i, j) -= basis.mean[j];
  }

  ThinSvd svd = svd_thin(work, std::size_t(p));
  if (!(svd.sigma[std::size_t(p) - 1] > svd.sigma[0] * 1e-12))
    throw Error(ErrorCode::RankDeficient,
                "requested POD rank exceeds the numerical rank");
  basis.modes = svd.v;  // cols x p
  return basis;
}

std::string pod_fingerprint(const PodTrunk& pod) {
  json j{{"grid", pod.grid}, {"modes", pod.modes}, {"mean", pod.mean}};
  return sha256_hex(j.dump());
}

Embedding pod_project(const PodTrunk& pod, const std::vector<double>& values,
                      const std::string& fingerprint) {
  if (values.size() != pod.modes.rows)
    throw Error(ErrorCode::ShapeMismatch, "values vs POD grid size");
  Embedding emb;
  emb.dictionary_fingerprint = fingerprint;
  emb.lambda = 0.0;
  emb.coeffs.assign(pod.modes.cols, 0.0);
  for (std::size_t j = 0; j < pod.modes.rows; ++j) {
    const double shifted =
        values[j] - (pod.mean.empty() ? 0.0 : pod.mean[j]);
    const double* mr = pod.modes.row(j);
    for (std::size_t k = 0; k < pod.modes.cols; ++k)
      emb.coeffs[k] += mr[k] * shifted;
  }
  return emb;
}

void to_json(json& j, const DeepOnetModel& m) {
  j = json{{"p", m.p},
           {"input_dictionary_fingerprint", m.input_dictionary_fingerprint}};
  if (m.identity_branch)
    j["branch"] = "identity";
  else
    j["branch"] = json{{"spec", m.branch_spec}, {"params", m.branch_params}};
  switch (m.trunk_kind) {
    case TrunkKind::Network:
      j["trunk"] = json{{"kind", "network"},
                        {"spec", m.trunk_spec},
                        {"params", m.trunk_params}};
      break;
    case TrunkKind::Pod:
      j["trunk"] = json{{"kind", "pod"},
                        {"grid", m.pod.grid},
                        {"modes", m.pod.modes},
                        {"mean", m.pod.mean}};
      break;
    case TrunkKind::Dict:
      j["trunk"] = json{{"kind", "dictionary"}, {"dictionary", m.trunk_dict}};
      break;
  }
  if (m.normalize_embeddings)
    j["normalization"] = json{{"min", m.embed_min}, {"range", m.embed_range}};
}

void from_json(const json& j, DeepOnetModel& m) {
  m = DeepOnetModel{};
  m.p = j.at("p").get<int>();
  m.input_dictionary_fingerprint =
      j.at("input_dictionary_fingerprint").get<std::string>();
  const json& branch = j.at("branch");
  if (branch.is_string() && branch.get<std::string>() == "identity") {
    m.identity_branch = true;
  } else {
    m.branch_spec = branch.at("spec").get<MlpSpec>();
    m.branch_params = branch.at("params").get<MlpParams>();
  }
  const json& trunk = j.at("trunk");
  std::string kind = trunk.at("kind").get<std::string>();
  if (kind == "network") {
    m.trunk_kind = TrunkKind::Network;
    m.trunk_spec = trunk.at("spec").get<MlpSpec>();
    m.trunk_params = trunk.at("params").get<MlpParams>();
  } else if (kind == "pod") {
    m.trunk_kind = TrunkKind::Pod;
    m.pod.grid = trunk.at("grid").get<DenseMatrix>();
    m.pod.modes = trunk.at("modes").get<DenseMatrix>();
    m.pod.mean = trunk.at("mean").get<std::vector<double>>();
  } else if (kind == "dictionary") {
    m.trunk_kind = TrunkKind::Dict;
    m.trunk_dict = trunk.at("dictionary").get<Dictionary>();
  } else {
    throw Error(ErrorCode::ConfigError, "unknown trunk kind '" + kind + "'");
  }
  if (j.contains("normalization")) {
    m.normalize_embeddings = true;
    m.embed_min = j.at("normalization").at("min").get<std::vector<double>>();
    m.embed_range = j.at("normalization").at("range").get<std::vector<double>>();
  }
  check_model(m);
}

}  // namespace rino
