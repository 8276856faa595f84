#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rino/dataset_io.hpp"
#include "rino/deeponet.hpp"
#include "rino/dict_learn.hpp"

namespace rino {

// Pipeline stages; the numeric value is the process exit code when the
// stage fails.
enum class Stage : int {
  Config = 2,
  Data = 3,
  Dictionary = 4,
  Operator = 5,
  Eval = 6,
};

const char* stage_name(Stage stage);

// A module error annotated with the stage it escaped from.
struct StageError : std::runtime_error {
  Stage stage;
  ErrorCode code;
  StageError(Stage s, ErrorCode c, const std::string& msg)
      : std::runtime_error("[" + std::string(stage_name(s)) + "] " + msg),
        stage(s),
        code(c) {}
};

struct DataConfig {
  int n_train = 0;
  int n_test = 0;
  int grid_points = 0;  // dense input grid size (per axis in 2D)
  double length_scale = 0.2;
  int m_min = 1;
  int m_max = 1;
  double nu = 0.01;  // burgers only
  int nt = 1000;
};

struct OperatorConfig {
  std::string trunk = "network";  // "network" or "pod"
  bool identity_branch = false;
  int p = 0;  // 0 with an identity branch means |dictionary|
  std::vector<int> branch_hidden;
  std::string branch_activation = "relu";
  std::vector<int> trunk_hidden;
  double trunk_omega0 = 5.0;
  double lr = 1e-3;
  int epochs = 1000;
  int batch_size = 0;
  double tau = 1.0;
  bool normalize_embeddings = false;
  bool pod_center = false;
};

// Knobs for the masked-reconstruction ablations.
struct AblationConfig {
  std::vector<double> mask_percents;
  int gpod_rank = 3;
  int gpod_max_iters = 500;
  int random_atoms = 100;       // Q for the random-basis comparison
  double random_lambda = 1e-6;  // ridge for analytic-dictionary projections
  int consistency_trials = 5;
  double consistency_keep = 0.5;
};

struct ExperimentConfig {
  std::string experiment;
  std::vector<std::uint64_t> seeds;
  std::string dataset_dir;
  std::string out_dir;
  DataConfig data;
  DictLearnConfig dict;
  OperatorConfig op;
  std::vector<int> eval_sensors;
  AblationConfig ablation;
};

// Parses and validates a config file. Complaints carry the dotted field
// path, e.g. "data.n_train: expected a positive integer".
ExperimentConfig load_experiment_config(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

// SHA-256 of the canonical config JSON; embedded in every artifact so stale
// artifacts are rejected at evaluation time.
std::string config_hash(const ExperimentConfig& cfg);

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;  // restrict a sweep to one seed
  std::string out_override;           // --out
  std::string sensors = "random";     // eval: point count or "random"
  bool dry_run = false;
  std::optional<bool> pod_center;
};

int cmd_gen_data(const CliOptions& opt);
int cmd_run(const CliOptions& opt);
int cmd_eval(const CliOptions& opt);
int cmd_report(const CliOptions& opt);

}  // namespace rino
