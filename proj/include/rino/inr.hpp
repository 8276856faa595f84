#pragma once

#include <optional>
#include <vector>

#include "rino/numerics.hpp"

namespace rino {

enum class Activation { Sine, Relu, Tanh };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Fully connected net: hidden layers use `activation`, the output layer is
// affine. For sine nets the first layer weights are initialized with the
// omega0-scaled bound; omega0 has no effect on the forward pass.
struct MlpSpec {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden_widths;
  Activation activation = Activation::Sine;
  double omega0 = 1.0;

  std::vector<int> layer_dims() const;  // [input, hidden..., output]
};

struct LayerParams {
  DenseMatrix w;           // out x in, row-major
  std::vector<double> b;   // out
};

struct MlpParams {
  std::vector<LayerParams> layers;
  // Frozen normalization divisor; set by freeze_scale, absent while training.
  std::optional<double> output_scale;
};

// Uniform init: layer m gets U[-c, c] with c = omega_m * sqrt(6 / fan_in),
// omega_m = spec.omega0 on the first layer of a sine net and 1 elsewhere.
// Weights are drawn row-major layer by layer; biases start at zero.
MlpParams init_mlp(const MlpSpec& spec, RngState& rng);

// Batched forward pass: x is B x input_dim, result is B x output_dim.
DenseMatrix mlp_forward(const MlpSpec& spec, const MlpParams& params,
                        const DenseMatrix& x);

// Keeps intermediates so a backward pass can reuse them.
struct MlpWorkspace {
  std::vector<DenseMatrix> h;  // h[0] = x, then post-activation per layer
  std::vector<DenseMatrix> z;  // preactivations per layer
};

const DenseMatrix& mlp_forward_ws(const MlpSpec& spec, const MlpParams& params,
                                  const DenseMatrix& x, MlpWorkspace& ws);

// Gradient of sum_{b,o} weights(b,o) * output(b,o) with respect to every
// weight and bias. `weights` has the shape of the forward output.
MlpParams mlp_param_grads(const MlpSpec& spec, const MlpParams& params,
                          const DenseMatrix& x, const DenseMatrix& weights);
MlpParams mlp_param_grads_ws(const MlpSpec& spec, const MlpParams& params,
                             const MlpWorkspace& ws, const DenseMatrix& weights);

// RMS of the raw (unscaled) output over the quadrature points; stored as
// params.output_scale and returned. Throws DegenerateBasis when the mean
// square is below 1e-24.
double freeze_scale(const MlpSpec& spec, MlpParams& params,
                    const DenseMatrix& quadrature_points);

// Dense deterministic lattice over a box: points_per_dim samples per axis,
// endpoints included, row-major over axes.
DenseMatrix dense_grid(const Box& box, int points_per_dim);

std::size_t param_count(const MlpSpec& spec);
MlpParams zero_params_like(const MlpSpec& spec);
void flatten_params(const MlpParams& params, std::vector<double>& out);
void unflatten_params(const std::vector<double>& flat, MlpParams& params);

}  // namespace rino
