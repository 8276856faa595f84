#pragma once

#include <cstdint>
#include <vector>

#include "rino/dictionary.hpp"

namespace rino {

struct DictLearnConfig {
  Box domain;
  double lambda = 1e-4;
  double tol = 1e-4;
  int max_atoms = 12;        // cap on total dictionary size
  int epochs_per_atom = 500;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  MlpSpec atom_spec;         // template for freshly initialized atoms

  // An accepted atom must cut the error by this relative fraction, else the
  // learner stops with the no_progress flag set.
  double min_gain = 0.02;
  double early_stop_delta = 1e-7;
  int early_stop_patience = 25;
};

// One trace measurement. Round boundaries (initial trivial dictionary, or an
// atom frozen and kept) carry epoch = -1 and atom_added = true; the
// samplewise learner stores the realization index in epoch instead.
struct TraceRow {
  int atom_count = 0;
  int epoch = -1;
  double error = 0.0;  // mean relative MSE over the dataset
  bool atom_added = false;
};

struct DictLearnResult {
  Dictionary dictionary;
  std::vector<TraceRow> trace;
  bool no_progress = false;
};

// Batch dictionary learning: starts from {1}; while the mean reconstruction
// error exceeds tol, trains one new atom at a time by alternating
// per-realization ridge projection (all atoms) with Adam steps on the new
// atom's parameters only. During a round the atom is normalized by the batch
// root mean square over the pooled sample points; on acceptance the scale is
// frozen on a dense grid.
DictLearnResult learn_dictionary_batch(const std::vector<PointCloudSignal>& dataset,
                                       const DictLearnConfig& cfg, RngState& rng);

// Samplewise variant: starts empty; walks the realizations in order and, when
// the current dictionary misses one (error > tol), fits a new atom to that
// realization's residual and freezes it.
DictLearnResult learn_dictionary_samplewise(
    const std::vector<PointCloudSignal>& dataset, const DictLearnConfig& cfg,
    RngState& rng);

}  // namespace rino
