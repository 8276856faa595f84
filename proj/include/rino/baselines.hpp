#pragma once

#include <string>
#include <vector>

#include "rino/datagen.hpp"
#include "rino/dictionary.hpp"

namespace rino {

struct GpodConfig {
  int rank = 1;
  int max_iters = 500;
  double conv_tol = 1e-10;
  double ridge = 1e-10;
};

struct GpodResult {
  DenseMatrix filled;  // observed entries bitwise equal to the input
  DenseMatrix modes;   // M x rank, right singular vectors of the final fill
  std::vector<double> objective_trace;  // observed-entry Frobenius error
  bool converged = false;
  int iterations = 0;
};

// Iterative gappy POD (Everson-Sirovich): masked entries start at the
// column means of the observed data; each iteration takes a thin SVD of the
// current fill, ridge-fits every row to the modes on its observed entries,
// and refills the masked entries only. The working rank grows by one per
// iteration up to cfg.rank. Stops when the refilled entries change by less
// than conv_tol in relative Frobenius norm; hitting max_iters returns the
// last iterate with converged = false.
GpodResult gpod_reconstruct(const DenseMatrix& data, const BoolMask& mask,
                            const GpodConfig& cfg);

// Completes held-out rows against fixed modes: per-row ridge least squares
// on the observed entries, masked entries replaced by the modal fit.
DenseMatrix gpod_fit_rows(const DenseMatrix& modes, const DenseMatrix& rows,
                          const BoolMask& mask, double ridge);

// Fixed baseline dictionaries on [0,1]. Kinds: "random_cosine"
// (cos(w x + b), w ~ N(0, 2 pi), b ~ U[0, 2 pi]), "random_relu" (frozen
// 1-20-1 ReLU nets), "monomial" (x^n), "legendre" (P_n(2x - 1)).
Dictionary make_analytic_dictionary(const std::string& kind, int count,
                                    RngState& rng);

struct ConsistencyReport {
  DenseMatrix coeffs;           // n_trials x |dict|
  std::vector<double> std_dev;  // per-coefficient spread
  double rel_max_dev = 0.0;     // max pairwise L2 gap / mean coefficient norm
};

// Projects the signal onto the dictionary under n_trials independent random
// subsamplings keeping round(keep_fraction * M) points each.
ConsistencyReport embedding_consistency_report(const Dictionary& dict,
                                               const PointCloudSignal& signal,
                                               int n_trials, double keep_fraction,
                                               RngState& rng,
                                               double lambda = 1e-6);

}  // namespace rino
