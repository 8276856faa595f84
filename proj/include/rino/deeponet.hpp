#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rino/dictionary.hpp"

namespace rino {

enum class TrunkKind { Network, Pod, Dict };

// Frozen POD trunk: trunk row k at a stored grid point is the k-th mode
// value there. Queries must hit the stored grid. `mean` is the retained
// snapshot mean when the POD was centered (empty otherwise); predictions add
// it back.
struct PodTrunk {
  DenseMatrix grid;   // K x d_y
  DenseMatrix modes;  // K x P, orthonormal columns
  std::vector<double> mean;
};

struct DeepOnetModel {
  int p = 0;
  std::string input_dictionary_fingerprint;

  // Branch: either a network mapping embeddings to R^P or the identity
  // (requires embedding length == P).
  bool identity_branch = false;
  MlpSpec branch_spec;
  MlpParams branch_params;

  TrunkKind trunk_kind = TrunkKind::Network;
  MlpSpec trunk_spec;
  MlpParams trunk_params;
  PodTrunk pod;
  Dictionary trunk_dict;

  // Min-max constants fitted on the training embeddings when
  // normalize_embeddings is on; reused verbatim at evaluation time.
  bool normalize_embeddings = false;
  std::vector<double> embed_min;
  std::vector<double> embed_range;
};

struct OperatorSample {
  Embedding input_embedding;
  DenseMatrix output_points;          // K x d_y
  std::vector<double> output_values;  // K
  std::optional<Embedding> output_embedding;  // gamma, predefined-trunk only
};

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 1000;
  int batch_size = 0;  // <= 0 trains the full batch
  double tau = 1.0;
  std::uint64_t seed = 0;
  bool normalize_embeddings = false;
  bool freeze_trunk = false;
};

struct TrainResult {
  DeepOnetModel model;
  std::vector<double> loss_trace;  // one entry per epoch
  bool aborted = false;            // non-finite gradients stopped training
};

std::vector<double> predict(const DeepOnetModel& model, const Embedding& alpha,
                            const DenseMatrix& y);

// Mean relative MSE of the model over the samples.
double evaluate_operator(const DeepOnetModel& model,
                         const std::vector<OperatorSample>& samples);

// Joint Adam training of branch and trunk on the mean per-realization
// relative MSE. cfg.freeze_trunk pins the trunk parameters.
TrainResult train_unknown_trunk(const std::vector<OperatorSample>& dataset,
                                const DeepOnetModel& init, const TrainConfig& cfg);

// Branch-only training against a frozen trunk with the embedding-consistency
// penalty: loss = prediction relative MSE + tau * |gamma - branch(alpha)|^2.
// Every sample must carry its output embedding.
TrainResult train_predefined_trunk(const std::vector<OperatorSample>& dataset,
                                   const DeepOnetModel& init,
                                   const TrainConfig& cfg);

struct PodBasis {
  DenseMatrix modes;         // K x p
  std::vector<double> mean;  // empty unless centered
};

// Top-p right singular vectors of the snapshot matrix (realizations x grid
// values). Throws RankDeficient when p exceeds the numerical rank.
PodBasis pod_modes(const DenseMatrix& snapshots, int p, bool center);

// Content hash of a POD trunk (grid, modes, mean). Output embeddings carry
// it so training can verify they came from this basis.
std::string pod_fingerprint(const PodTrunk& pod);

// gamma = modes^T (values - mean). The fingerprint is passed in rather than
// recomputed so callers hash the trunk once, not per signal.
Embedding pod_project(const PodTrunk& pod, const std::vector<double>& values,
                      const std::string& fingerprint);

}  // namespace rino
