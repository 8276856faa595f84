#pragma once

#include <string>
#include <vector>

#include "rino/inr.hpp"

namespace rino {

// A scalar signal observed on an unordered point cloud.
struct PointCloudSignal {
  DenseMatrix points;          // M x dim
  std::vector<double> values;  // M
};

// Dictionary atom: the fixed constant, a (frozen or in-training) neural net,
// or a closed-form basis function. Analytic tags and parameter layouts:
//   "cosine"        [w, b]                cos(w x + b)
//   "relu_feature"  [w1(20), b1(20), w2(20), b2]   shallow random-ReLU net
//   "monomial"      [n]                   x^n
//   "legendre"      [n]                   P_n(2x - 1)
struct BasisFunction {
  enum class Kind { ConstantOne, Neural, Analytic };
  Kind kind = Kind::ConstantOne;
  MlpSpec spec;
  MlpParams params;
  std::string tag;
  std::vector<double> parameters;

  static BasisFunction constant_one();
  static BasisFunction neural(const MlpSpec& spec, const MlpParams& params);
  static BasisFunction analytic(const std::string& tag,
                                const std::vector<double>& parameters);
};

std::vector<double> evaluate_basis(const BasisFunction& atom, const DenseMatrix& points);

struct Dictionary {
  Box domain;
  std::vector<BasisFunction> atoms;

  std::size_t size() const { return atoms.size(); }
  // SHA-256 over the canonical JSON of the atom list.
  std::string fingerprint() const;
};

struct Embedding {
  std::vector<double> coeffs;
  std::string dictionary_fingerprint;
  double lambda = 0.0;
};

// All atoms evaluated on a shared point set: row q holds atom q's values.
// Points outside the domain box (beyond 1e-9) raise DomainViolation.
DenseMatrix evaluate_dictionary(const Dictionary& dict, const DenseMatrix& points);

// Ridge projection onto the dictionary span: solves
// (Psi Psi^T + lambda I) alpha = Psi u. The kernel is |dict| x |dict|, so the
// cost scales with the dictionary size, not the sample resolution.
Embedding project(const Dictionary& dict, const PointCloudSignal& signal,
                  double lambda);

std::vector<double> reconstruct(const Dictionary& dict, const Embedding& emb,
                                const DenseMatrix& points);

// mean_j (v_j - vhat_j)^2 / (max_j |v_j|)^2. Throws ZeroSignal when the true
// signal is identically zero (sup below 1e-300).
double relative_mse(const std::vector<double>& truth,
                    const std::vector<double>& predicted);

struct GramReport {
  DenseMatrix gram;    // normalized inner products, unit diagonal
  double max_offdiag;  // max |G_ij|, i != j
};

// Inner products by quadrature on a dense deterministic grid.
GramReport gram_report(const Dictionary& dict, int quad_points_per_dim = 512);

}  // namespace rino
