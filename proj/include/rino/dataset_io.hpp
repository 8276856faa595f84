#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rino/dictionary.hpp"

#include <json.hpp>

namespace rino {

// One realization. x/u hold the (possibly subsampled) input sensors the
// model trains on; x_full/u_full keep the dense truth so evaluation sweeps
// can re-discretize the input at any sensor count.
struct DatasetRecord {
  int id = 0;
  DenseMatrix x;
  std::vector<double> u;
  DenseMatrix y;
  std::vector<double> s;
  DenseMatrix x_full;
  std::vector<double> u_full;
};

struct DatasetManifest {
  std::string generator;
  nlohmann::json config;  // generator settings, echoed back verbatim
  std::uint64_t seed = 0;
  int n_train = 0;
  int n_test = 0;
  Box domain;
};

// A dataset directory holds manifest.json plus data.jsonl with one record
// per line, train records first (ids 0..n_train-1), then test records.
// Floats are written with 17 significant digits so a rewrite of the same
// data is byte-identical.
void write_dataset(const std::string& dir, const DatasetManifest& manifest,
                   const std::vector<DatasetRecord>& records);

DatasetManifest read_manifest(const std::string& dir);
std::vector<DatasetRecord> read_records(const std::string& dir);

inline bool is_train(const DatasetManifest& manifest, const DatasetRecord& rec) {
  return rec.id < manifest.n_train;
}

PointCloudSignal input_signal(const DatasetRecord& rec);

}  // namespace rino
