#include "rino/dictionary.hpp"

#include <cmath>

#include "rino/json_io.hpp"
#include "rino/sha256.hpp"

namespace rino {

BasisFunction BasisFunction::constant_one() {
  BasisFunction b;
  b.kind = Kind::ConstantOne;
  return b;
}

BasisFunction BasisFunction::neural(const MlpSpec& spec, const MlpParams& params) {
  BasisFunction b;
  b.kind = Kind::Neural;
  b.spec = spec;
  b.params = params;
  return b;
}

BasisFunction BasisFunction::analytic(const std::string& tag,
                                      const std::vector<double>& parameters) {
  BasisFunction b;
  b.kind = Kind::Analytic;
  b.tag = tag;
  b.parameters = parameters;
  return b;
}

namespace {

double legendre_poly(int n, double t) {
  if (n == 0) return 1.0;
  double pm1 = 1.0, p = t;
  for (int k = 1; k < n; ++k) {
    double pn = ((2.0 * k + 1.0) * t * p - double(k) * pm1) / double(k + 1);
    pm1 = p;
    p = pn;
  }
  return p;
}

std::vector<double> evaluate_analytic(const BasisFunction& atom,
                                      const DenseMatrix& points) {
  if (points.cols != 1)
    throw Error(ErrorCode::ShapeMismatch, "analytic atoms are one-dimensional");
  std::vector<double> out(points.rows, 0.0);
  if (atom.tag == "cosine") {
    if (atom.parameters.size() != 2)
      throw Error(ErrorCode::ShapeMismatch, "cosine atom needs [w, b]");
    double w = atom.parameters[0], b = atom.parameters[1];
    for (std::size_t i = 0; i < points.rows; ++i)
      out[i] = std::cos(w * points(i, 0) + b);
    return out;
  }
  if (atom.tag == "relu_feature") {
    if (atom.parameters.size() != 61)
      throw Error(ErrorCode::ShapeMismatch, "relu_feature atom needs 61 parameters");
    const double* w1 = atom.parameters.data();
    const double* b1 = atom.parameters.data() + 20;
    const double* w2 = atom.parameters.data() + 40;
    double b2 = atom.parameters[60];
    for (std::size_t i = 0; i < points.rows; ++i) {
      double x = points(i, 0), acc = b2;
      for (int k = 0; k < 20; ++k) {
        double z = w1[k] * x + b1[k];
        if (z > 0.0) acc += w2[k] * z;
      }
      out[i] = acc;
    }
    return out;
  }
  if (atom.tag == "monomial") {
    if (atom.parameters.size() != 1)
      throw Error(ErrorCode::ShapeMismatch, "monomial atom needs [n]");
    int n = int(atom.parameters[0]);
    for (std::size_t i = 0; i < points.rows; ++i) out[i] = std::pow(points(i, 0), n);
    return out;
  }
  if (atom.tag == "legendre") {
    if (atom.parameters.size() != 1)
      throw Error(ErrorCode::ShapeMismatch, "legendre atom needs [n]");
    int n = int(atom.parameters[0]);
    for (std::size_t i = 0; i < points.rows; ++i)
      out[i] = legendre_poly(n, 2.0 * points(i, 0) - 1.0);
    return out;
  }
  throw Error(ErrorCode::ConfigError, "unknown analytic atom tag '" + atom.tag + "'");
}

}  // namespace

std::vector<double> evaluate_basis(const BasisFunction& atom, const DenseMatrix& points) {
  switch (atom.kind) {
    case BasisFunction::Kind::ConstantOne:
      return std::vector<double>(points.rows, 1.0);
    case BasisFunction::Kind::Neural: {
      DenseMatrix y = mlp_forward(atom.spec, atom.params, points);
      return y.data;
    }
    case BasisFunction::Kind::Analytic:
      return evaluate_analytic(atom, points);
  }
  throw Error(ErrorCode::ConfigError, "bad atom kind");
}

DenseMatrix evaluate_dictionary(const Dictionary& dict, const DenseMatrix& points) {
  if (points.cols != std::size_t(dict.domain.dim))
    throw Error(ErrorCode::ShapeMismatch, "point dim vs dictionary domain");
  for (std::size_t i = 0; i < points.rows; ++i) {
    if (!dict.domain.contains(points.row(i)))
      throw Error(ErrorCode::DomainViolation, "evaluation point outside domain box");
  }
  DenseMatrix psi(dict.atoms.size(), points.rows, 0.0);
  for (std::size_t q = 0; q < dict.atoms.size(); ++q) {
    std::vector<double> row = evaluate_basis(dict.atoms[q], points);
    std::copy(row.begin(), row.end(), psi.row(q));
  }
  return psi;
}

Embedding project(const Dictionary& dict, const PointCloudSignal& signal,
                  double lambda) {
  if (lambda < 0.0) throw Error(ErrorCode::RangeError, "negative ridge lambda");
  if (signal.points.rows != signal.values.size())
    throw Error(ErrorCode::ShapeMismatch, "signal points vs values");
  if (signal.points.rows == 0)
    throw Error(ErrorCode::ShapeMismatch, "empty signal");

  Embedding emb;
  emb.dictionary_fingerprint = dict.fingerprint();
  emb.lambda = lambda;
  if (dict.atoms.empty()) return emb;

  DenseMatrix psi = evaluate_dictionary(dict, signal.points);
  DenseMatrix kernel = matmul_nt(psi, psi);
  for (std::size_t q = 0; q < kernel.rows; ++q) kernel(q, q) += lambda;
  DenseMatrix rhs(psi.rows, 1, 0.0);
  for (std::size_t q = 0; q < psi.rows; ++q) {
    const double* pr = psi.row(q);
    double s = 0.0;
    for (std::size_t j = 0; j < psi.cols; ++j) s += pr[j] * signal.values[j];
    rhs(q, 0) = s;
  }
  DenseMatrix alpha = solve_spd(kernel, rhs, 0.0);
  emb.coeffs.assign(alpha.data.begin(), alpha.data.end());
  return emb;
}

std::vector<double> reconstruct(const Dictionary& dict, const Embedding& emb,
                                const DenseMatrix& points) {
  if (emb.dictionary_fingerprint != dict.fingerprint())
    throw Error(ErrorCode::FingerprintMismatch,
                "embedding was computed against a different dictionary");
  if (emb.coeffs.size() != dict.atoms.size())
    throw Error(ErrorCode::ShapeMismatch, "embedding length vs dictionary size");
  std::vector<double> out(points.rows, 0.0);
  if (dict.atoms.empty()) return out;
  DenseMatrix psi = evaluate_dictionary(dict, points);
  for (std::size_t q = 0; q < psi.rows; ++q) {
    const double* pr = psi.row(q);
    double a = emb.coeffs[q];
    for (std::size_t j = 0; j < psi.cols; ++j) out[j] += a * pr[j];
  }
  return out;
}

double relative_mse(const std::vector<double>& truth,
                    const std::vector<double>& predicted) {
  if (truth.size() != predicted.size() || truth.empty())
    throw Error(ErrorCode::ShapeMismatch, "relative_mse length mismatch");
  double sup = 0.0;
  for (double v : truth) sup = std::max(sup, std::fabs(v));
  if (sup < 1e-300)
    throw Error(ErrorCode::ZeroSignal, "true signal is identically zero");
  double s = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    double d = truth[j] - predicted[j];
    s += d * d;
  }
  return s / (double(truth.size()) * sup * sup);
}

GramReport gram_report(const Dictionary& dict, int quad_points_per_dim) {
  if (dict.atoms.empty()) throw Error(ErrorCode::ShapeMismatch, "empty dictionary");
  DenseMatrix grid = dense_grid(dict.domain, quad_points_per_dim);
  DenseMatrix psi = evaluate_dictionary(dict, grid);

  // Tensor-product trapezoid weights (exact for periodic integrands).
  std::vector<double> w(grid.rows, 1.0);
  int n = quad_points_per_dim;
  if (dict.domain.dim == 1) {
    w.front() = 0.5;
    w.back() = 0.5;
    double h = (dict.domain.upper[0] - dict.domain.lower[0]) / double(n - 1);
    for (auto& v : w) v *= h;
  } else {
    double hx = (dict.domain.upper[0] - dict.domain.lower[0]) / double(n - 1);
    double hy = (dict.domain.upper[1] - dict.domain.lower[1]) / double(n - 1);
    for (int i = 0; i < n; ++i) {
      double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      for (int j = 0; j < n; ++j) {
        double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
        w[std::size_t(i) * n + j] = wi * wj * hx * hy;
      }
    }
  }

  std::size_t q = dict.atoms.size();
  GramReport report;
  report.gram = DenseMatrix(q, q, 0.0);
  std::vector<double> norms(q, 0.0);
  for (std::size_t a = 0; a < q; ++a) {
    const double* pa = psi.row(a);
    double s = 0.0;
    for (std::size_t j = 0; j < psi.cols; ++j) s += w[j] * pa[j] * pa[j];
    norms[a] = std::sqrt(s);
    if (!(norms[a] > 1e-12))
      throw Error(ErrorCode::DegenerateBasis, "atom has numerically zero norm");
  }
  report.max_offdiag = 0.0;
  for (std::size_t a = 0; a < q; ++a) {
    report.gram(a, a) = 1.0;
    for (std::size_t b = a + 1; b < q; ++b) {
      const double* pa = psi.row(a);
      const double* pb = psi.row(b);
      double s = 0.0;
      for (std::size_t j = 0; j < psi.cols; ++j) s += w[j] * pa[j] * pb[j];
      double g = s / (norms[a] * norms[b]);
      report.gram(a, b) = g;
      report.gram(b, a) = g;
      report.max_offdiag = std::max(report.max_offdiag, std::fabs(g));
    }
  }
  return report;
}

void to_json(json& j, const BasisFunction& atom) {
  switch (atom.kind) {
    case BasisFunction::Kind::ConstantOne:
      j = json{{"kind", "constant_one"}};
      return;
    case BasisFunction::Kind::Neural: {
      MlpParams bare = atom.params;
      bare.output_scale.reset();
      j = json{{"kind", "neural"}, {"spec", atom.spec}, {"params", bare}};
      if (atom.params.output_scale.has_value())
        j["scale"] = *atom.params.output_scale;
      return;
    }
    case BasisFunction::Kind::Analytic:
      j = json{{"kind", "analytic"}, {"tag", atom.tag}, {"parameters", atom.parameters}};
      return;
  }
}

void from_json(const json& j, BasisFunction& atom) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant_one") {
    atom = BasisFunction::constant_one();
    return;
  }
  if (kind == "neural") {
    MlpSpec spec = j.at("spec").get<MlpSpec>();
    MlpParams params = j.at("params").get<MlpParams>();
    if (j.contains("scale")) params.output_scale = j.at("scale").get<double>();
    atom = BasisFunction::neural(spec, params);
    return;
  }
  if (kind == "analytic") {
    atom = BasisFunction::analytic(j.at("tag").get<std::string>(),
                                   j.at("parameters").get<std::vector<double>>());
    return;
  }
  throw Error(ErrorCode::ConfigError, "unknown atom kind '" + kind + "'");
}

void to_json(json& j, const Dictionary& dict) {
  j = json{{"domain", dict.domain}, {"atoms", dict.atoms}};
  j["fingerprint"] = dict.fingerprint();
}

void from_json(const json& j, Dictionary& dict) {
  dict.domain = j.at("domain").get<Box>();
  dict.atoms.clear();
  for (const auto& a : j.at("atoms")) dict.atoms.push_back(a.get<BasisFunction>());
  if (j.contains("fingerprint")) {
    std::string want = j.at("fingerprint").get<std::string>();
    if (want != dict.fingerprint())
      throw Error(ErrorCode::FingerprintMismatch, "dictionary file fingerprint");
  }
}

void to_json(json& j, const Embedding& emb) {
  j = json{{"coeffs", emb.coeffs},
           {"dictionary_fingerprint", emb.dictionary_fingerprint},
           {"lambda", emb.lambda}};
}

void from_json(const json& j, Embedding& emb) {
  emb.coeffs = j.at("coeffs").get<std::vector<double>>();
  emb.dictionary_fingerprint = j.at("dictionary_fingerprint").get<std::string>();
  emb.lambda = j.at("lambda").get<double>();
}

std::string Dictionary::fingerprint() const {
  json atoms_json = atoms;
  return sha256_hex(atoms_json.dump());
}

}  // namespace rino
