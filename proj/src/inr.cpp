#include "rino/inr.hpp"

#include <cmath>

#include "rino/json_io.hpp"

namespace rino {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Sine: return "sine";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "sine";
}

Activation activation_from_name(const std::string& name) {
  if (name == "sine") return Activation::Sine;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw Error(ErrorCode::ConfigError, "unknown activation '" + name + "'");
}

std::vector<int> MlpSpec::layer_dims() const {
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int w : hidden_widths) dims.push_back(w);
  dims.push_back(output_dim);
  return dims;
}

MlpParams init_mlp(const MlpSpec& spec, RngState& rng) {
  if (spec.input_dim < 1 || spec.output_dim < 1)
    throw Error(ErrorCode::ShapeMismatch, "mlp needs positive dims");
  for (int w : spec.hidden_widths) {
    if (w < 1) throw Error(ErrorCode::ShapeMismatch, "hidden width must be positive");
  }
  auto dims = spec.layer_dims();
  MlpParams params;
  params.layers.resize(dims.size() - 1);
  for (std::size_t m = 0; m + 1 < dims.size(); ++m) {
    int fan_in = dims[m];
    int fan_out = dims[m + 1];
    double omega = (m == 0 && spec.activation == Activation::Sine) ? spec.omega0 : 1.0;
    double bound = omega * std::sqrt(6.0 / double(fan_in));
    LayerParams& layer = params.layers[m];
    layer.w = DenseMatrix(fan_out, fan_in);
    for (auto& v : layer.w.data) v = (2.0 * rng.next_uniform() - 1.0) * bound;
    layer.b.assign(fan_out, 0.0);
  }
  return params;
}

namespace {

inline void affine(const DenseMatrix& h, const LayerParams& layer, DenseMatrix& z) {
  z = matmul_nt(h, layer.w);
  for (std::size_t i = 0; i < z.rows; ++i) {
    double* zr = z.row(i);
    for (std::size_t j = 0; j < z.cols; ++j) zr[j] += layer.b[j];
  }
}

inline void apply_activation(Activation act, const DenseMatrix& z, DenseMatrix& h) {
  h = DenseMatrix(z.rows, z.cols);
  switch (act) {
    case Activation::Sine:
      for (std::size_t i = 0; i < z.data.size(); ++i) h.data[i] = std::sin(z.data[i]);
      break;
    case Activation::Relu:
      for (std::size_t i = 0; i < z.data.size(); ++i)
        h.data[i] = z.data[i] > 0.0 ? z.data[i] : 0.0;
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < z.data.size(); ++i) h.data[i] = std::tanh(z.data[i]);
      break;
  }
}

inline double activation_deriv(Activation act, double z) {
  switch (act) {
    case Activation::Sine: return std::cos(z);
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 0.0;
}

void check_input(const MlpSpec& spec, const MlpParams& params, const DenseMatrix& x) {
  if (x.cols != std::size_t(spec.input_dim))
    throw Error(ErrorCode::ShapeMismatch, "mlp input width");
  if (params.layers.size() != spec.hidden_widths.size() + 1)
    throw Error(ErrorCode::ShapeMismatch, "mlp layer count");
}

}  // namespace

const DenseMatrix& mlp_forward_ws(const MlpSpec& spec, const MlpParams& params,
                                  const DenseMatrix& x, MlpWorkspace& ws) {
  check_input(spec, params, x);
  std::size_t n_layers = params.layers.size();
  ws.h.resize(n_layers + 1);
  ws.z.resize(n_layers);
  ws.h[0] = x;
  for (std::size_t m = 0; m < n_layers; ++m) {
    affine(ws.h[m], params.layers[m], ws.z[m]);
    if (m + 1 < n_layers) {
      apply_activation(spec.activation, ws.z[m], ws.h[m + 1]);
    } else {
      ws.h[m + 1] = ws.z[m];
      if (params.output_scale.has_value()) {
        double s = *params.output_scale;
        for (auto& v : ws.h[m + 1].data) v /= s;
      }
    }
  }
  return ws.h[n_layers];
}

DenseMatrix mlp_forward(const MlpSpec& spec, const MlpParams& params,
                        const DenseMatrix& x) {
  MlpWorkspace ws;
  return mlp_forward_ws(spec, params, x, ws);
}

MlpParams mlp_param_grads_ws(const MlpSpec& spec, const MlpParams& params,
                             const MlpWorkspace& ws, const DenseMatrix& weights) {
  std::size_t n_layers = params.layers.size();
  if (weights.rows != ws.h[0].rows || weights.cols != std::size_t(spec.output_dim))
    throw Error(ErrorCode::ShapeMismatch, "grad weights shape");

  MlpParams grads = zero_params_like(spec);
  DenseMatrix g = weights;
  if (params.output_scale.has_value()) {
    double s = *params.output_scale;
    for (auto& v : g.data) v /= s;
  }
  for (std::size_t mi = n_layers; mi-- > 0;) {
    // dW = g^T h_in, db = column sums of g
    grads.layers[mi].w = matmul_tn(g, ws.h[mi]);
    auto& db = grads.layers[mi].b;
    for (std::size_t r = 0; r < g.rows; ++r) {
      const double* gr = g.row(r);
      for (std::size_t c = 0; c < g.cols; ++c) db[c] += gr[c];
    }
    if (mi == 0) break;
    DenseMatrix gprev = matmul(g, params.layers[mi].w);
    const DenseMatrix& zprev = ws.z[mi - 1];
    for (std::size_t i = 0; i < gprev.data.size(); ++i)
      gprev.data[i] *= activation_deriv(spec.activation, zprev.data[i]);
    g = std::move(gprev);
  }
  return grads;
}

MlpParams mlp_param_grads(const MlpSpec& spec, const MlpParams& params,
                          const DenseMatrix& x, const DenseMatrix& weights) {
  MlpWorkspace ws;
  mlp_forward_ws(spec, params, x, ws);
  return mlp_param_grads_ws(spec, params, ws, weights);
}

double freeze_scale(const MlpSpec& spec, MlpParams& params,
                    const DenseMatrix& quadrature_points) {
  MlpParams raw = params;
  raw.output_scale.reset();
  DenseMatrix y = mlp_forward(spec, raw, quadrature_points);
  double msq = 0.0;
  for (double v : y.data) msq += v * v;
  msq /= double(y.data.size());
  if (msq < 1e-24)
    throw Error(ErrorCode::DegenerateBasis, "atom output is numerically zero");
  params.output_scale = std::sqrt(msq);
  return *params.output_scale;
}

DenseMatrix dense_grid(const Box& box, int points_per_dim) {
  if (points_per_dim < 2) throw Error(ErrorCode::RangeError, "grid needs >= 2 points");
  if (box.dim == 1) {
    DenseMatrix g(points_per_dim, 1);
    for (int i = 0; i < points_per_dim; ++i)
      g(i, 0) = box.lower[0] +
                (box.upper[0] - box.lower[0]) * double(i) / double(points_per_dim - 1);
    return g;
  }
  if (box.dim == 2) {
    DenseMatrix g(std::size_t(points_per_dim) * points_per_dim, 2);
    std::size_t r = 0;
    for (int i = 0; i < points_per_dim; ++i) {
      double x = box.lower[0] +
                 (box.upper[0] - box.lower[0]) * double(i) / double(points_per_dim - 1);
      for (int j = 0; j < points_per_dim; ++j, ++r) {
        double y = box.lower[1] + (box.upper[1] - box.lower[1]) * double(j) /
                                      double(points_per_dim - 1);
        g(r, 0) = x;
        g(r, 1) = y;
      }
    }
    return g;
  }
  throw Error(ErrorCode::RangeError, "dense_grid supports dim 1 and 2");
}

std::size_t param_count(const MlpSpec& spec) {
  auto dims = spec.layer_dims();
  std::size_t n = 0;
  for (std::size_t m = 0; m + 1 < dims.size(); ++m)
    n += std::size_t(dims[m + 1]) * dims[m] + dims[m + 1];
  return n;
}

MlpParams zero_params_like(const MlpSpec& spec) {
  auto dims = spec.layer_dims();
  MlpParams params;
  params.layers.resize(dims.size() - 1);
  for (std::size_t m = 0; m + 1 < dims.size(); ++m) {
    params.layers[m].w = DenseMatrix(dims[m + 1], dims[m], 0.0);
    params.layers[m].b.assign(dims[m + 1], 0.0);
  }
  return params;
}

void flatten_params(const MlpParams& params, std::vector<double>& out) {
  out.clear();
  for (const auto& layer : params.layers) {
    out.insert(out.end(), layer.w.data.begin(), layer.w.data.end());
    out.insert(out.end(), layer.b.begin(), layer.b.end());
  }
}

void unflatten_params(const std::vector<double>& flat, MlpParams& params) {
  std::size_t pos = 0;
  for (auto& layer : params.layers) {
    if (pos + layer.w.data.size() + layer.b.size() > flat.size())
      throw Error(ErrorCode::ShapeMismatch, "flat params too short");
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.w.data.size(),
              layer.w.data.begin());
    pos += layer.w.data.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.b.size(),
              layer.b.begin());
    pos += layer.b.size();
  }
  if (pos != flat.size())
    throw Error(ErrorCode::ShapeMismatch, "flat params too long");
}

void to_json(json& j, const MlpSpec& spec) {
  j = json{{"input_dim", spec.input_dim},
           {"output_dim", spec.output_dim},
           {"hidden_widths", spec.hidden_widths},
           {"activation", activation_name(spec.activation)},
           {"omega0", spec.omega0}};
}

void from_json(const json& j, MlpSpec& spec) {
  spec.input_dim = j.at("input_dim").get<int>();
  spec.output_dim = j.at("output_dim").get<int>();
  spec.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  spec.activation = activation_from_name(j.at("activation").get<std::string>());
  spec.omega0 = j.at("omega0").get<double>();
}

void to_json(json& j, const DenseMatrix& m) {
  j = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
}

void from_json(const json& j, DenseMatrix& m) {
  std::size_t rows = j.size();
  std::size_t cols = rows > 0 ? j.at(0).size() : 0;
  m = DenseMatrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
}

void to_json(json& j, const MlpParams& params) {
  json layers = json::array();
  for (const auto& layer : params.layers) {
    json w = json::array();
    for (std::size_t i = 0; i < layer.w.rows; ++i) {
      json row = json::array();
      for (std::size_t c = 0; c < layer.w.cols; ++c) row.push_back(layer.w(i, c));
      w.push_back(std::move(row));
    }
    layers.push_back(json::array({std::move(w), layer.b}));
  }
  j = json{{"layers", std::move(layers)}};
  if (params.output_scale.has_value()) j["output_scale"] = *params.output_scale;
}

void from_json(const json& j, MlpParams& params) {
  params.layers.clear();
  params.output_scale.reset();
  for (const auto& entry : j.at("layers")) {
    LayerParams layer;
    const auto& w = entry.at(0);
    std::size_t rows = w.size();
    std::size_t cols = rows > 0 ? w.at(0).size() : 0;
    layer.w = DenseMatrix(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        layer.w(r, c) = w.at(r).at(c).get<double>();
    layer.b = entry.at(1).get<std::vector<double>>();
    params.layers.push_back(std::move(layer));
  }
  if (j.contains("output_scale"))
    params.output_scale = j.at("output_scale").get<double>();
}

void to_json(json& j, const Box& box) {
  j = json{{"dim", box.dim}, {"lower", box.lower}, {"upper", box.upper}};
}

void from_json(const json& j, Box& box) {
  box.dim = j.at("dim").get<int>();
  box.lower = j.at("lower").get<std::vector<double>>();
  box.upper = j.at("upper").get<std::vector<double>>();
  if (box.lower.size() != std::size_t(box.dim) ||
      box.upper.size() != std::size_t(box.dim))
    throw Error(ErrorCode::ConfigError, "box bounds length mismatch");
}

}  // namespace rino
