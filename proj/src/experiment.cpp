#include "rino/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rino/baselines.hpp"
#include "rino/json_io.hpp"
#include "rino/parallel.hpp"
#include "rino/sha256.hpp"

namespace rino {

namespace {

using nlohmann::json;

template <class F>
auto run_stage(Stage stage, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw StageError(stage, e.code, e.what());
  }
}

// ---------------------------------------------------------------------------
// config parsing

std::string join_path(const std::string& base, const char* key) {
  return base.empty() ? std::string(key) : base + "." + key;
}

const json* find_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& base,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw Error(ErrorCode::ConfigError,
                  join_path(base, it.key().c_str()) + ": unknown field");
  }
}

double get_number(const json& obj, const std::string& base, const char* key,
                  std::optional<double> def = std::nullopt) {
  const json* v = find_field(obj, key);
  if (!v) {
    if (def) return *def;
    throw Error(ErrorCode::ConfigError, join_path(base, key) + ": missing");
  }
  if (!v->is_number())
    throw Error(ErrorCode::ConfigError,
                join_path(base, key) + ": expected a number");
  return v->get<double>();
}

int get_int(const json& obj, const std::string& base, const char* key,
            std::optional<int> def = std::nullopt) {
  const json* v = find_field(obj, key);
  if (!v) {
    if (def) return *def;
    throw Error(ErrorCode::ConfigError, join_path(base, key) + ": missing");
  }
  if (!v->is_number_integer())
    throw Error(ErrorCode::ConfigError,
                join_path(base, key) + ": expected an integer");
  return v->get<int>();
}

bool get_bool(const json& obj, const std::string& base, const char* key,
              bool def) {
  const json* v = find_field(obj, key);
  if (!v) return def;
  if (!v->is_boolean())
    throw Error(ErrorCode::ConfigError,
                join_path(base, key) + ": expected a boolean");
  return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& base, const char* key,
                       std::optional<std::string> def = std::nullopt) {
  const json* v = find_field(obj, key);
  if (!v) {
    if (def) return *def;
    throw Error(ErrorCode::ConfigError, join_path(base, key) + ": missing");
  }
  if (!v->is_string())
    throw Error(ErrorCode::ConfigError,
                join_path(base, key) + ": expected a string");
  return v->get<std::string>();
}

std::vector<int> get_int_list(const json& obj, const std::string& base,
                              const char* key, bool required) {
  const json* v = find_field(obj, key);
  if (!v) {
    if (!required) return {};
    throw Error(ErrorCode::ConfigError, join_path(base, key) + ": missing");
  }
  if (!v->is_array())
    throw Error(ErrorCode::ConfigError,
                join_path(base, key) + ": expected an array of integers");
  std::vector<int> out;
  for (const json& e : *v) {
    if (!e.is_number_integer())
      throw Error(ErrorCode::ConfigError,
                  join_path(base, key) + ": expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<double> get_number_list(const json& obj, const std::string& base,
                                    const char* key) {
  const json* v = find_field(obj, key);
  if (!v) return {};
  if (!v->is_array())
    throw Error(ErrorCode::ConfigError,
                join_path(base, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& e : *v) {
    if (!e.is_number())
      throw Error(ErrorCode::ConfigError,
                  join_path(base, key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

bool is_operator_experiment(const std::string& name) {
  return name == "antiderivative" || name == "darcy1d" || name == "darcy2d" ||
         name == "burgers";
}

int input_dim_of(const std::string& experiment) {
  return experiment == "darcy2d" ? 2 : 1;
}

int output_dim_of(const std::string& experiment) {
  return (experiment == "darcy2d" || experiment == "burgers") ? 2 : 1;
}

// ---------------------------------------------------------------------------
// small io helpers

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "short write on " + path);
}

void write_json_file(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorCode::IoError, path + ": not valid JSON");
  return j;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string seed_dir(const std::string& root, std::uint64_t seed) {
  return root + "/seed_" + std::to_string(seed);
}

std::vector<std::uint64_t> selected_seeds(const ExperimentConfig& cfg,
                                          const CliOptions& opt) {
  if (opt.seed) return {*opt.seed};
  return cfg.seeds;
}

// ---------------------------------------------------------------------------
// data generation

DenseMatrix uniform_points_1d(int m) {
  DenseMatrix g(m, 1, 0.0);
  for (int i = 0; i < m; ++i) g(i, 0) = double(i) / double(m - 1);
  return g;
}

std::vector<DatasetRecord> generate_records(const ExperimentConfig& cfg,
                                            std::uint64_t seed) {
  const int total = cfg.data.n_train + cfg.data.n_test;
  std::vector<DatasetRecord> records(total);

  if (!is_operator_experiment(cfg.experiment)) {
    RngState rng(seed, 0x3BA5);
    ThreeBasisData data =
        make_three_basis_dataset(total, cfg.data.grid_points, rng);
    for (int id = 0; id < total; ++id) {
      DatasetRecord& rec = records[id];
      rec.id = id;
      rec.x_full = data.grid;
      rec.u_full.assign(data.values.row(id), data.values.row(id) + data.values.cols);
      rec.x = rec.x_full;
      rec.u = rec.u_full;
      rec.y = data.grid;
      rec.s = rec.u_full;
    }
    return records;
  }

  SubsampleConfig sub;
  sub.m_min = cfg.data.m_min;
  sub.m_max = cfg.data.m_max;

  parallel_for_checked(total, [&](std::size_t id) {
    RngState rng = RngState(seed, 0xDA7A).split(id);
    DatasetRecord rec;
    rec.id = int(id);

    if (cfg.experiment == "antiderivative" || cfg.experiment == "darcy1d") {
      rec.x_full = uniform_points_1d(cfg.data.grid_points);
      GrfConfig gcfg;
      gcfg.length_scale = cfg.data.length_scale;
      rec.u_full = sample_grf(rec.x_full, gcfg, rng);
      std::vector<double> x(cfg.data.grid_points);
      for (int i = 0; i < cfg.data.grid_points; ++i) x[i] = rec.x_full(i, 0);
      SolverOutput sol = cfg.experiment == "antiderivative"
                             ? solve_antiderivative(x, rec.u_full)
                             : solve_darcy_1d(rec.u_full);
      rec.y = sol.grid;
      rec.s = sol.values;
    } else if (cfg.experiment == "darcy2d") {
      const int n = cfg.data.grid_points;
      rec.x_full = dense_grid(Box::unit(2), n);
      GrfConfig gcfg;
      gcfg.domain = Box::unit(2);
      gcfg.length_scale = cfg.data.length_scale;
      rec.u_full = sample_grf(rec.x_full, gcfg, rng);
      SolverOutput sol = solve_darcy_2d(rec.u_full, n);
      rec.y = sol.grid;
      rec.s = sol.values;
    } else {  // burgers
      DenseMatrix unique_pts(100, 1, 0.0);
      for (int i = 0; i < 100; ++i) unique_pts(i, 0) = double(i) / 100.0;
      GrfConfig gcfg;
      gcfg.length_scale = cfg.data.length_scale;
      gcfg.periodic = true;
      std::vector<double> draw = sample_grf(unique_pts, gcfg, rng);
      rec.x_full = uniform_points_1d(101);
      rec.u_full = draw;
      rec.u_full.push_back(draw[0]);
      SolverOutput sol =
          solve_burgers(rec.u_full, cfg.data.nu, cfg.data.nt, false);
      rec.y = sol.grid;
      rec.s = sol.values;
    }

    PointCloudSignal dense;
    dense.points = rec.x_full;
    dense.values = rec.u_full;
    PointCloudSignal kept = subsample_signal(dense, sub, rng);
    rec.x = kept.points;
    rec.u = kept.values;
    records[id] = std::move(rec);
  });
  return records;
}

// ---------------------------------------------------------------------------
// run pipeline

struct LoadedData {
  DatasetManifest manifest;
  std::vector<DatasetRecord> records;
};

LoadedData load_data(const ExperimentConfig& cfg, const std::string& root,
                     std::uint64_t seed) {
  const std::string dir = seed_dir(root, seed);
  LoadedData data;
  data.manifest = read_manifest(dir);
  if (data.manifest.generator != cfg.experiment)
    throw Error(ErrorCode::ConfigError,
                dir + " was generated for " + data.manifest.generator +
                    ", config wants " + cfg.experiment);
  if (data.manifest.seed != seed)
    throw Error(ErrorCode::ConfigError, dir + " stores a different seed");
  if (data.manifest.n_train != cfg.data.n_train ||
      data.manifest.n_test != cfg.data.n_test)
    throw Error(ErrorCode::ConfigError,
                dir + " split differs from config (" +
                    std::to_string(data.manifest.n_train) + "/" +
                    std::to_string(data.manifest.n_test) + ")");
  data.records = read_records(dir);
  if (int(data.records.size()) != cfg.data.n_train + cfg.data.n_test)
    throw Error(ErrorCode::IoError, dir + ": record count vs manifest");
  return data;
}

std::vector<OperatorSample> embed_records(
    const Dictionary& dict, double lambda,
    const std::vector<DatasetRecord>& records, int begin, int end) {
  std::vector<OperatorSample> samples(end - begin);
  parallel_for_checked(end - begin, [&](std::size_t k) {
    const DatasetRecord& rec = records[begin + int(k)];
    OperatorSample s;
    s.input_embedding = project(dict, input_signal(rec), lambda);
    s.output_points = rec.y;
    s.output_values = rec.s;
    samples[k] = std::move(s);
  });
  return samples;
}

std::string trace_csv(const DictLearnResult& dict_res,
                      const std::vector<double>& loss_trace) {
  std::string csv = "stage,atom_count,epoch,value\n";
  for (const TraceRow& row : dict_res.trace) {
    csv += "dictionary," + std::to_string(row.atom_count) + "," +
           std::to_string(row.epoch) + "," + fmt_double(row.error) + "\n";
  }
  for (std::size_t e = 0; e < loss_trace.size(); ++e) {
    csv += "operator,-1," + std::to_string(e) + "," + fmt_double(loss_trace[e]) +
           "\n";
  }
  return csv;
}

void run_operator_experiment(const ExperimentConfig& cfg, std::uint64_t seed,
                             const std::string& hash, const CliOptions& opt) {
  const std::string out = seed_dir(
      opt.out_override.empty() ? cfg.out_dir : opt.out_override, seed);
  LoadedData data =
      run_stage(Stage::Data, [&] { return load_data(cfg, cfg.dataset_dir, seed); });
  const int n_train = cfg.data.n_train;
  const int total = n_train + cfg.data.n_test;

  DictLearnResult dict_res = run_stage(Stage::Dictionary, [&] {
    std::vector<PointCloudSignal> train;
    train.reserve(n_train);
    for (int i = 0; i < n_train; ++i) train.push_back(input_signal(data.records[i]));
    RngState rng(seed, 0xD1C7);
    return learn_dictionary_batch(train, cfg.dict, rng);
  });
  const Dictionary& dict = dict_res.dictionary;
  std::printf("run %s seed %llu: dictionary %zu atoms, error %.3e%s\n",
              cfg.experiment.c_str(), (unsigned long long)seed, dict.size(),
              dict_res.trace.empty() ? 0.0 : dict_res.trace.back().error,
              dict_res.no_progress ? " (no further progress)" : "");

  TrainResult trained = run_stage(Stage::Operator, [&] {
    std::vector<OperatorSample> train_samples =
        embed_records(dict, cfg.dict.lambda, data.records, 0, n_train);

    DeepOnetModel init;
    init.input_dictionary_fingerprint = dict.fingerprint();
    const int emb_len = int(dict.size());
    bool pod_center =
        opt.pod_center ? *opt.pod_center : cfg.op.pod_center;

    if (cfg.op.identity_branch) {
      init.identity_branch = true;
      init.p = emb_len;
    } else {
      init.p = cfg.op.p;
      init.branch_spec.input_dim = emb_len;
      init.branch_spec.output_dim = cfg.op.p;
      init.branch_spec.hidden_widths = cfg.op.branch_hidden;
      init.branch_spec.activation =
          activation_from_name(cfg.op.branch_activation);
      RngState brng(seed, 0xB0);
      init.branch_params = init_mlp(init.branch_spec, brng);
    }

    if (cfg.op.trunk == "pod") {
      init.trunk_kind = TrunkKind::Pod;
      DenseMatrix snapshots(n_train, data.records[0].s.size(), 0.0);
      for (int i = 0; i < n_train; ++i) {
        if (data.records[i].s.size() != snapshots.cols)
          throw Error(ErrorCode::ShapeMismatch,
                      "POD trunk needs a shared output grid");
        std::copy(data.records[i].s.begin(), data.records[i].s.end(),
                  snapshots.row(i));
      }
      PodBasis basis = pod_modes(snapshots, init.p, pod_center);
      init.pod.grid = data.records[0].y;
      init.pod.modes = basis.modes;
      init.pod.mean = basis.mean;
      std::string fp = pod_fingerprint(init.pod);
      parallel_for_checked(train_samples.size(), [&](std::size_t k) {
        train_samples[k].output_embedding =
            pod_project(init.pod, train_samples[k].output_values, fp);
      });
    } else {
      init.trunk_kind = TrunkKind::Network;
      init.trunk_spec.input_dim = output_dim_of(cfg.experiment);
      init.trunk_spec.output_dim = init.p;
      init.trunk_spec.hidden_widths = cfg.op.trunk_hidden;
      init.trunk_spec.activation = Activation::Sine;
      init.trunk_spec.omega0 = cfg.op.trunk_omega0;
      RngState trng(seed, 0xB1);
      init.trunk_params = init_mlp(init.trunk_spec, trng);
    }

    TrainConfig tc;
    tc.lr = cfg.op.lr;
    tc.epochs = cfg.op.epochs;
    tc.batch_size = cfg.op.batch_size;
    tc.tau = cfg.op.tau;
    tc.seed = seed;
    tc.normalize_embeddings = cfg.op.normalize_embeddings;
    TrainResult res = cfg.op.trunk == "pod"
                          ? train_predefined_trunk(train_samples, init, tc)
                          : train_unknown_trunk(train_samples, init, tc);
    if (res.aborted)
      throw Error(ErrorCode::NaNGradient,
                  "operator training aborted after " +
                      std::to_string(res.loss_trace.size()) + " epochs");
    return res;
  });

  json metrics = run_stage(Stage::Eval, [&] {
    std::vector<OperatorSample> train_samples =
        embed_records(dict, cfg.dict.lambda, data.records, 0, n_train);
    std::vector<OperatorSample> test_samples =
        embed_records(dict, cfg.dict.lambda, data.records, n_train, total);
    json m;
    m["experiment"] = cfg.experiment;
    m["seed"] = seed;
    m["config_hash"] = hash;
    m["dictionary_size"] = dict.size();
    m["dictionary_no_progress"] = dict_res.no_progress;
    m["train_rel_mse"] = evaluate_operator(trained.model, train_samples);
    m["test_rel_mse"] = evaluate_operator(trained.model, test_samples);
    return m;
  });

  run_stage(Stage::Eval, [&] {
    make_dir(out);
    json dj;
    dj["config_hash"] = hash;
    dj["seed"] = seed;
    dj["no_progress"] = dict_res.no_progress;
    dj["dictionary"] = dict;
    write_json_file(out + "/dictionary.json", dj);
    json mj;
    mj["config_hash"] = hash;
    mj["seed"] = seed;
    mj["model"] = trained.model;
    write_json_file(out + "/model.json", mj);
    write_text(out + "/trace.csv", trace_csv(dict_res, trained.loss_trace));
    write_json_file(out + "/metrics.json", metrics);
    return 0;
  });

  std::printf("run %s seed %llu: train %.3e test %.3e -> %s\n",
              cfg.experiment.c_str(), (unsigned long long)seed,
              metrics["train_rel_mse"].get<double>(),
              metrics["test_rel_mse"].get<double>(), out.c_str());
}

// Observed entries of one matrix row as a point cloud.
PointCloudSignal observed_signal(const DenseMatrix& grid, const DenseMatrix& rows,
                                 const BoolMask& mask, std::size_t i) {
  PointCloudSignal sig;
  std::size_t count = 0;
  for (std::size_t j = 0; j < rows.cols; ++j)
    if (!mask(i, j)) ++count;
  sig.points = DenseMatrix(count, 1, 0.0);
  sig.values.reserve(count);
  std::size_t k = 0;
  for (std::size_t j = 0; j < rows.cols; ++j) {
    if (mask(i, j)) continue;
    sig.points(k, 0) = grid(j, 0);
    sig.values.push_back(rows(i, j));
    ++k;
  }
  return sig;
}

double dictionary_test_error(const Dictionary& dict, double lambda,
                             const DenseMatrix& grid, const DenseMatrix& rows,
                             const BoolMask& mask) {
  std::vector<double> errs(rows.rows, 0.0);
  parallel_for_checked(rows.rows, [&](std::size_t i) {
    PointCloudSignal sig = observed_signal(grid, rows, mask, i);
    Embedding emb = project(dict, sig, lambda);
    std::vector<double> full = reconstruct(dict, emb, grid);
    std::vector<double> truth(rows.row(i), rows.row(i) + rows.cols);
    errs[i] = relative_mse(truth, full);
  });
  double acc = 0.0;
  for (double e : errs) acc += e;
  return acc / double(rows.rows);
}

Dictionary learn_masked_dictionary(const ExperimentConfig& cfg,
                                   const DenseMatrix& grid,
                                   const DenseMatrix& rows, const BoolMask* mask,
                                   RngState rng) {
  std::vector<PointCloudSignal> train;
  train.reserve(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    if (mask) {
      train.push_back(observed_signal(grid, rows, *mask, i));
    } else {
      PointCloudSignal sig;
      sig.points = grid;
      sig.values.assign(rows.row(i), rows.row(i) + rows.cols);
      train.push_back(std::move(sig));
    }
  }
  return learn_dictionary_batch(train, cfg.dict, rng).dictionary;
}

void split_matrices(const ExperimentConfig& cfg, const LoadedData& data,
                    DenseMatrix& grid, DenseMatrix& train_m,
                    DenseMatrix& test_m) {
  const int n_train = cfg.data.n_train, n_test = cfg.data.n_test;
  const std::size_t m = data.records[0].s.size();
  grid = data.records[0].y;
  train_m = DenseMatrix(n_train, m, 0.0);
  test_m = DenseMatrix(n_test, m, 0.0);
  for (int i = 0; i < n_train; ++i)
    std::copy(data.records[i].s.begin(), data.records[i].s.end(), train_m.row(i));
  for (int i = 0; i < n_test; ++i)
    std::copy(data.records[n_train + i].s.begin(),
              data.records[n_train + i].s.end(), test_m.row(i));
}

void run_gpod_ablation(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::string& hash, const CliOptions& opt) {
  const std::string out = seed_dir(
      opt.out_override.empty() ? cfg.out_dir : opt.out_override, seed);
  LoadedData data =
      run_stage(Stage::Data, [&] { return load_data(cfg, cfg.dataset_dir, seed); });
  DenseMatrix grid, train_m, test_m;
  split_matrices(cfg, data, grid, train_m, test_m);

  json rows = json::array();
  std::string csv = "mask_percent,gpod,learned_dict\n";
  for (std::size_t ri = 0; ri < cfg.ablation.mask_percents.size(); ++ri) {
    const double r_pct = cfg.ablation.mask_percents[ri];
    RngState mask_rng = RngState(seed, 0x6A50).split(ri);
    BoolMask train_mask =
        mask_matrix(train_m.rows, train_m.cols, r_pct, mask_rng);
    BoolMask test_mask = mask_matrix(test_m.rows, test_m.cols, r_pct, mask_rng);

    double gpod_err = run_stage(Stage::Eval, [&] {
      GpodConfig gc;
      gc.rank = cfg.ablation.gpod_rank;
      gc.max_iters = cfg.ablation.gpod_max_iters;
      GpodResult g = gpod_reconstruct(train_m, train_mask, gc);
      DenseMatrix filled = gpod_fit_rows(g.modes, test_m, test_mask, gc.ridge);
      double acc = 0.0;
      for (std::size_t i = 0; i < test_m.rows; ++i) {
        std::vector<double> truth(test_m.row(i), test_m.row(i) + test_m.cols);
        std::vector<double> fit(filled.row(i), filled.row(i) + filled.cols);
        acc += relative_mse(truth, fit);
      }
      return acc / double(test_m.rows);
    });

    Dictionary dict = run_stage(Stage::Dictionary, [&] {
      return learn_masked_dictionary(cfg, grid, train_m, &train_mask,
                                     RngState(seed, 0xD1C7).split(ri));
    });
    double dict_err = run_stage(Stage::Eval, [&] {
      return dictionary_test_error(dict, cfg.dict.lambda, grid, test_m,
                                   test_mask);
    });

    json row;
    row["mask_percent"] = r_pct;
    row["gpod"] = gpod_err;
    row["learned_dict"] = dict_err;
    row["dictionary_size"] = dict.size();
    rows.push_back(row);
    csv += fmt_double(r_pct) + "," + fmt_double(gpod_err) + "," +
           fmt_double(dict_err) + "\n";
    std::printf("run gpod_ablation seed %llu: mask %.0f%% gpod %.3e dict %.3e\n",
                (unsigned long long)seed, r_pct, gpod_err, dict_err);
  }

  run_stage(Stage::Eval, [&] {
    make_dir(out);
    json m;
    m["experiment"] = cfg.experiment;
    m["seed"] = seed;
    m["config_hash"] = hash;
    m["rows"] = rows;
    write_json_file(out + "/metrics.json", m);
    write_text(out + "/masked_reconstruction.csv", csv);
    return 0;
  });
}

json consistency_json(const ConsistencyReport& rep) {
  json j;
  j["coeffs"] = rep.coeffs;
  j["std"] = rep.std_dev;
  j["rel_max_dev"] = rep.rel_max_dev;
  return j;
}

void run_random_basis_ablation(const ExperimentConfig& cfg, std::uint64_t seed,
                               const std::string& hash, const CliOptions& opt) {
  const std::string out = seed_dir(
      opt.out_override.empty() ? cfg.out_dir : opt.out_override, seed);
  LoadedData data =
      run_stage(Stage::Data, [&] { return load_data(cfg, cfg.dataset_dir, seed); });
  DenseMatrix grid, train_m, test_m;
  split_matrices(cfg, data, grid, train_m, test_m);

  const double r_pct = cfg.ablation.mask_percents.front();
  RngState mask_rng = RngState(seed, 0x6A50);
  BoolMask train_mask = mask_matrix(train_m.rows, train_m.cols, r_pct, mask_rng);
  BoolMask test_mask = mask_matrix(test_m.rows, test_m.cols, r_pct, mask_rng);

  Dictionary learned = run_stage(Stage::Dictionary, [&] {
    return learn_masked_dictionary(cfg, grid, train_m, &train_mask,
                                   RngState(seed, 0xD1C7));
  });
  RngState cos_rng(seed, 0xC051);
  Dictionary cosine =
      make_analytic_dictionary("random_cosine", cfg.ablation.random_atoms, cos_rng);
  RngState relu_rng(seed, 0x9E1);
  Dictionary relu =
      make_analytic_dictionary("random_relu", cfg.ablation.random_atoms, relu_rng);

  double err_learned = run_stage(Stage::Eval, [&] {
    return dictionary_test_error(learned, cfg.dict.lambda, grid, test_m,
                                 test_mask);
  });
  double err_cosine = run_stage(Stage::Eval, [&] {
    return dictionary_test_error(cosine, cfg.ablation.random_lambda, grid,
                                 test_m, test_mask);
  });
  double err_relu = run_stage(Stage::Eval, [&] {
    return dictionary_test_error(relu, cfg.ablation.random_lambda, grid, test_m,
                                 test_mask);
  });

  // The embedding-consistency probe uses a dictionary trained on the full
  // rows: the spread under subsampling measures the basis, not the gaps in
  // its training data.
  json consistency = run_stage(Stage::Dictionary, [&] {
    Dictionary full = learn_masked_dictionary(cfg, grid, train_m, nullptr,
                                              RngState(seed, 0xF0DD));
    PointCloudSignal probe;
    probe.points = grid;
    probe.values.assign(test_m.row(0), test_m.row(0) + test_m.cols);
    RngState t1(seed, 0x5EED), t2(seed, 0x5EED);
    ConsistencyReport rep_learned = embedding_consistency_report(
        full, probe, cfg.ablation.consistency_trials,
        cfg.ablation.consistency_keep, t1, cfg.dict.lambda);
    RngState small_rng(seed, 0xC052);
    Dictionary cos3 = make_analytic_dictionary(
        "random_cosine", int(full.size() > 1 ? full.size() - 1 : 1), small_rng);
    ConsistencyReport rep_cosine = embedding_consistency_report(
        cos3, probe, cfg.ablation.consistency_trials,
        cfg.ablation.consistency_keep, t2, cfg.ablation.random_lambda);
    json c;
    c["learned"] = consistency_json(rep_learned);
    c["random_cosine"] = consistency_json(rep_cosine);
    return c;
  });

  run_stage(Stage::Eval, [&] {
    make_dir(out);
    json m;
    m["experiment"] = cfg.experiment;
    m["seed"] = seed;
    m["config_hash"] = hash;
    m["mask_percent"] = r_pct;
    m["learned_dict"] = err_learned;
    m["learned_dict_size"] = learned.size();
    m["random_cosine"] = err_cosine;
    m["random_relu"] = err_relu;
    m["consistency_learned"] = consistency["learned"]["rel_max_dev"];
    m["consistency_random_cosine"] = consistency["random_cosine"]["rel_max_dev"];
    write_json_file(out + "/metrics.json", m);
    write_json_file(out + "/consistency.json", consistency);
    std::string csv = "method,test_rel_mse\n";
    csv += "learned_dict," + fmt_double(err_learned) + "\n";
    csv += "random_cosine," + fmt_double(err_cosine) + "\n";
    csv += "random_relu," + fmt_double(err_relu) + "\n";
    write_text(out + "/masked_reconstruction.csv", csv);
    return 0;
  });
  std::printf(
      "run random_basis_ablation seed %llu: learned %.3e cosine %.3e relu %.3e\n",
      (unsigned long long)seed, err_learned, err_cosine, err_relu);
}

// ---------------------------------------------------------------------------
// evaluation

std::vector<double> interp_linear(const DenseMatrix& x,
                                  const std::vector<double>& u,
                                  const DenseMatrix& q) {
  std::vector<double> out(q.rows, 0.0);
  for (std::size_t k = 0; k < q.rows; ++k) {
    double t = q(k, 0);
    std::size_t hi = 0;
    while (hi < x.rows && x(hi, 0) < t) ++hi;
    if (hi == 0) {
      out[k] = u[0];
    } else if (hi == x.rows) {
      out[k] = u[x.rows - 1];
    } else {
      double x0 = x(hi - 1, 0), x1 = x(hi, 0);
      double w = (t - x0) / (x1 - x0);
      out[k] = (1.0 - w) * u[hi - 1] + w * u[hi];
    }
  }
  return out;
}

}  // namespace

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::Config: return "config";
    case Stage::Data: return "data";
    case Stage::Dictionary: return "dictionary";
    case Stage::Operator: return "operator";
    case Stage::Eval: return "eval";
  }
  return "unknown";
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorCode::ConfigError, path + ": not valid JSON");
  if (!j.is_object())
    throw Error(ErrorCode::ConfigError, path + ": expected an object");
  check_keys(j, "", {"experiment", "seeds", "dataset_dir", "out_dir", "data",
                     "dictionary", "operator", "eval"});

  ExperimentConfig cfg;
  cfg.experiment = get_string(j, "", "experiment");
  if (!is_operator_experiment(cfg.experiment) &&
      cfg.experiment != "gpod_ablation" &&
      cfg.experiment != "random_basis_ablation")
    throw Error(ErrorCode::ConfigError,
                "experiment: unknown experiment " + cfg.experiment);

  const json* seeds = find_field(j, "seeds");
  if (!seeds || !seeds->is_array() || seeds->empty())
    throw Error(ErrorCode::ConfigError, "seeds: expected a non-empty array");
  for (const json& s : *seeds) {
    if (!s.is_number_integer() || s.get<long long>() < 0)
      throw Error(ErrorCode::ConfigError, "seeds: expected non-negative integers");
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  cfg.dataset_dir = get_string(j, "", "dataset_dir");
  cfg.out_dir = get_string(j, "", "out_dir");

  const json& data = *find_field(j, "data");
  if (!find_field(j, "data"))
    throw Error(ErrorCode::ConfigError, "data: missing");
  check_keys(data, "data",
             {"n_train", "n_test", "grid_points", "length_scale", "m_min",
              "m_max", "nu", "nt"});
  cfg.data.n_train = get_int(data, "data", "n_train");
  cfg.data.n_test = get_int(data, "data", "n_test");
  cfg.data.grid_points = get_int(data, "data", "grid_points");
  cfg.data.length_scale = get_number(data, "data", "length_scale", 0.2);
  cfg.data.m_min = get_int(data, "data", "m_min", 1);
  cfg.data.m_max = get_int(data, "data", "m_max", 1);
  cfg.data.nu = get_number(data, "data", "nu", 0.01);
  cfg.data.nt = get_int(data, "data", "nt", 1000);
  if (cfg.data.n_train < 1)
    throw Error(ErrorCode::ConfigError, "data.n_train: expected a positive integer");
  if (cfg.data.n_test < 1)
    throw Error(ErrorCode::ConfigError, "data.n_test: expected a positive integer");
  if (cfg.data.grid_points < 2)
    throw Error(ErrorCode::ConfigError, "data.grid_points: expected at least 2");
  if (!(cfg.data.length_scale > 0.0))
    throw Error(ErrorCode::ConfigError, "data.length_scale: expected > 0");
  if (cfg.data.m_min < 1 || cfg.data.m_max < cfg.data.m_min)
    throw Error(ErrorCode::ConfigError, "data.m_min: need 1 <= m_min <= m_max");

  const json* dict = find_field(j, "dictionary");
  if (!dict) throw Error(ErrorCode::ConfigError, "dictionary: missing");
  check_keys(*dict, "dictionary",
             {"lambda", "tol", "max_atoms", "epochs_per_atom", "lr", "hidden",
              "omega0", "min_gain"});
  cfg.dict.lambda = get_number(*dict, "dictionary", "lambda");
  cfg.dict.tol = get_number(*dict, "dictionary", "tol");
  cfg.dict.max_atoms = get_int(*dict, "dictionary", "max_atoms");
  cfg.dict.epochs_per_atom = get_int(*dict, "dictionary", "epochs_per_atom");
  cfg.dict.lr = get_number(*dict, "dictionary", "lr");
  cfg.dict.min_gain = get_number(*dict, "dictionary", "min_gain", 0.02);
  std::vector<int> hidden = get_int_list(*dict, "dictionary", "hidden", true);
  double omega0 = get_number(*dict, "dictionary", "omega0", 10.0);
  if (cfg.dict.lambda < 0.0)
    throw Error(ErrorCode::ConfigError, "dictionary.lambda: expected >= 0");
  if (!(cfg.dict.tol > 0.0))
    throw Error(ErrorCode::ConfigError, "dictionary.tol: expected > 0");
  if (cfg.dict.max_atoms < 1)
    throw Error(ErrorCode::ConfigError, "dictionary.max_atoms: expected >= 1");
  if (cfg.dict.epochs_per_atom < 1)
    throw Error(ErrorCode::ConfigError, "dictionary.epochs_per_atom: expected >= 1");
  if (!(cfg.dict.lr > 0.0))
    throw Error(ErrorCode::ConfigError, "dictionary.lr: expected > 0");
  if (hidden.empty())
    throw Error(ErrorCode::ConfigError, "dictionary.hidden: expected a non-empty array");
  for (int w : hidden)
    if (w < 1)
      throw Error(ErrorCode::ConfigError, "dictionary.hidden: widths must be >= 1");
  cfg.dict.domain = Box::unit(input_dim_of(cfg.experiment));
  cfg.dict.atom_spec.input_dim = input_dim_of(cfg.experiment);
  cfg.dict.atom_spec.output_dim = 1;
  cfg.dict.atom_spec.hidden_widths = hidden;
  cfg.dict.atom_spec.activation = Activation::Sine;
  cfg.dict.atom_spec.omega0 = omega0;

  const json* op = find_field(j, "operator");
  if (is_operator_experiment(cfg.experiment)) {
    if (!op) throw Error(ErrorCode::ConfigError, "operator: missing");
    check_keys(*op, "operator",
               {"trunk", "identity_branch", "p", "branch_hidden",
                "branch_activation", "trunk_hidden", "trunk_omega0", "lr",
                "epochs", "batch_size", "tau", "normalize_embeddings",
                "pod_center"});
    cfg.op.trunk = get_string(*op, "operator", "trunk", std::string("network"));
    if (cfg.op.trunk != "network" && cfg.op.trunk != "pod")
      throw Error(ErrorCode::ConfigError,
                  "operator.trunk: expected \"network\" or \"pod\"");
    cfg.op.identity_branch = get_bool(*op, "operator", "identity_branch", false);
    cfg.op.p = get_int(*op, "operator", "p", 0);
    cfg.op.branch_hidden = get_int_list(*op, "operator", "branch_hidden", false);
    cfg.op.branch_activation =
        get_string(*op, "operator", "branch_activation", std::string("relu"));
    if (cfg.op.branch_activation != "relu" && cfg.op.branch_activation != "tanh" &&
        cfg.op.branch_activation != "sine")
      throw Error(ErrorCode::ConfigError,
                  "operator.branch_activation: expected relu, tanh, or sine");
    cfg.op.trunk_hidden = get_int_list(*op, "operator", "trunk_hidden", false);
    cfg.op.trunk_omega0 = get_number(*op, "operator", "trunk_omega0", 5.0);
    cfg.op.lr = get_number(*op, "operator", "lr", 1e-3);
    cfg.op.epochs = get_int(*op, "operator", "epochs");
    cfg.op.batch_size = get_int(*op, "operator", "batch_size", 0);
    cfg.op.tau = get_number(*op, "operator", "tau", 1.0);
    cfg.op.normalize_embeddings =
        get_bool(*op, "operator", "normalize_embeddings", false);
    cfg.op.pod_center = get_bool(*op, "operator", "pod_center", false);
    if (cfg.op.epochs < 1)
      throw Error(ErrorCode::ConfigError, "operator.epochs: expected >= 1");
    if (!(cfg.op.lr > 0.0))
      throw Error(ErrorCode::ConfigError, "operator.lr: expected > 0");
    if (cfg.op.tau < 0.0)
      throw Error(ErrorCode::ConfigError, "operator.tau: expected >= 0");
    if (!cfg.op.identity_branch) {
      if (cfg.op.p < 1)
        throw Error(ErrorCode::ConfigError,
                    "operator.p: expected >= 1 without an identity branch");
      if (cfg.op.branch_hidden.empty())
        throw Error(ErrorCode::ConfigError,
                    "operator.branch_hidden: expected a non-empty array");
    }
    if (cfg.op.trunk == "network" && cfg.op.trunk_hidden.empty())
      throw Error(ErrorCode::ConfigError,
                  "operator.trunk_hidden: expected a non-empty array");
    if (cfg.op.trunk == "pod" && cfg.op.identity_branch)
      throw Error(ErrorCode::ConfigError,
                  "operator.identity_branch: incompatible with a POD trunk");
  } else if (op) {
    throw Error(ErrorCode::ConfigError,
                "operator: not used by " + cfg.experiment);
  }

  const json* ev = find_field(j, "eval");
  if (ev) {
    check_keys(*ev, "eval",
               {"sensors", "mask_percents", "gpod_rank", "gpod_max_iters",
                "random_atoms", "random_lambda", "consistency_trials",
                "consistency_keep"});
    cfg.eval_sensors = get_int_list(*ev, "eval", "sensors", false);
    for (int m : cfg.eval_sensors)
      if (m < 2)
        throw Error(ErrorCode::ConfigError, "eval.sensors: counts must be >= 2");
    cfg.ablation.mask_percents = get_number_list(*ev, "eval", "mask_percents");
    for (double r : cfg.ablation.mask_percents)
      if (!(r >= 0.0 && r < 100.0))
        throw Error(ErrorCode::ConfigError,
                    "eval.mask_percents: values must lie in [0, 100)");
    cfg.ablation.gpod_rank = get_int(*ev, "eval", "gpod_rank", 3);
    cfg.ablation.gpod_max_iters = get_int(*ev, "eval", "gpod_max_iters", 500);
    cfg.ablation.random_atoms = get_int(*ev, "eval", "random_atoms", 100);
    cfg.ablation.random_lambda = get_number(*ev, "eval", "random_lambda", 1e-6);
    cfg.ablation.consistency_trials =
        get_int(*ev, "eval", "consistency_trials", 5);
    cfg.ablation.consistency_keep =
        get_number(*ev, "eval", "consistency_keep", 0.5);
    if (cfg.ablation.gpod_rank < 1)
      throw Error(ErrorCode::ConfigError, "eval.gpod_rank: expected >= 1");
    if (!(cfg.ablation.random_lambda > 0.0))
      throw Error(ErrorCode::ConfigError, "eval.random_lambda: expected > 0");
    if (cfg.ablation.consistency_trials < 2)
      throw Error(ErrorCode::ConfigError, "eval.consistency_trials: expected >= 2");
    if (!(cfg.ablation.consistency_keep > 0.0 &&
          cfg.ablation.consistency_keep <= 1.0))
      throw Error(ErrorCode::ConfigError,
                  "eval.consistency_keep: expected in (0, 1]");
  }
  if (!is_operator_experiment(cfg.experiment) &&
      cfg.ablation.mask_percents.empty())
    throw Error(ErrorCode::ConfigError,
                "eval.mask_percents: required for " + cfg.experiment);

  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["seeds"] = cfg.seeds;
  j["dataset_dir"] = cfg.dataset_dir;
  j["out_dir"] = cfg.out_dir;
  json data;
  data["n_train"] = cfg.data.n_train;
  data["n_test"] = cfg.data.n_test;
  data["grid_points"] = cfg.data.grid_points;
  data["length_scale"] = cfg.data.length_scale;
  data["m_min"] = cfg.data.m_min;
  data["m_max"] = cfg.data.m_max;
  data["nu"] = cfg.data.nu;
  data["nt"] = cfg.data.nt;
  j["data"] = data;
  json dict;
  dict["lambda"] = cfg.dict.lambda;
  dict["tol"] = cfg.dict.tol;
  dict["max_atoms"] = cfg.dict.max_atoms;
  dict["epochs_per_atom"] = cfg.dict.epochs_per_atom;
  dict["lr"] = cfg.dict.lr;
  dict["min_gain"] = cfg.dict.min_gain;
  dict["hidden"] = cfg.dict.atom_spec.hidden_widths;
  dict["omega0"] = cfg.dict.atom_spec.omega0;
  j["dictionary"] = dict;
  if (is_operator_experiment(cfg.experiment)) {
    json op;
    op["trunk"] = cfg.op.trunk;
    op["identity_branch"] = cfg.op.identity_branch;
    op["p"] = cfg.op.p;
    op["branch_hidden"] = cfg.op.branch_hidden;
    op["branch_activation"] = cfg.op.branch_activation;
    op["trunk_hidden"] = cfg.op.trunk_hidden;
    op["trunk_omega0"] = cfg.op.trunk_omega0;
    op["lr"] = cfg.op.lr;
    op["epochs"] = cfg.op.epochs;
    op["batch_size"] = cfg.op.batch_size;
    op["tau"] = cfg.op.tau;
    op["normalize_embeddings"] = cfg.op.normalize_embeddings;
    op["pod_center"] = cfg.op.pod_center;
    j["operator"] = op;
  }
  json ev;
  ev["sensors"] = cfg.eval_sensors;
  ev["mask_percents"] = cfg.ablation.mask_percents;
  ev["gpod_rank"] = cfg.ablation.gpod_rank;
  ev["gpod_max_iters"] = cfg.ablation.gpod_max_iters;
  ev["random_atoms"] = cfg.ablation.random_atoms;
  ev["random_lambda"] = cfg.ablation.random_lambda;
  ev["consistency_trials"] = cfg.ablation.consistency_trials;
  ev["consistency_keep"] = cfg.ablation.consistency_keep;
  j["eval"] = ev;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  return sha256_hex(config_to_json(cfg).dump());
}

int cmd_gen_data(const CliOptions& opt) {
  ExperimentConfig cfg = run_stage(
      Stage::Config, [&] { return load_experiment_config(opt.config_path); });
  if (opt.dry_run) {
    std::printf("config ok: %s\n", cfg.experiment.c_str());
    return 0;
  }
  const std::string root =
      opt.out_override.empty() ? cfg.dataset_dir : opt.out_override;
  for (std::uint64_t seed : selected_seeds(cfg, opt)) {
    run_stage(Stage::Data, [&] {
      std::vector<DatasetRecord> records = generate_records(cfg, seed);
      DatasetManifest manifest;
      manifest.generator = cfg.experiment;
      manifest.config = config_to_json(cfg)["data"];
      manifest.seed = seed;
      manifest.n_train = cfg.data.n_train;
      manifest.n_test = cfg.data.n_test;
      manifest.domain = Box::unit(input_dim_of(cfg.experiment));
      write_dataset(seed_dir(root, seed), manifest, records);
      return 0;
    });
    std::printf("gen-data %s seed %llu: %d records -> %s\n",
                cfg.experiment.c_str(), (unsigned long long)seed,
                cfg.data.n_train + cfg.data.n_test,
                seed_dir(root, seed).c_str());
  }
  return 0;
}

int cmd_run(const CliOptions& opt) {
  ExperimentConfig cfg = run_stage(
      Stage::Config, [&] { return load_experiment_config(opt.config_path); });
  if (opt.dry_run) {
    std::printf("config ok: %s\n", cfg.experiment.c_str());
    return 0;
  }
  const std::string hash = config_hash(cfg);
  for (std::uint64_t seed : selected_seeds(cfg, opt)) {
    if (is_operator_experiment(cfg.experiment)) {
      run_operator_experiment(cfg, seed, hash, opt);
    } else if (cfg.experiment == "gpod_ablation") {
      run_gpod_ablation(cfg, seed, hash, opt);
    } else {
      run_random_basis_ablation(cfg, seed, hash, opt);
    }
  }
  return 0;
}

int cmd_eval(const CliOptions& opt) {
  ExperimentConfig cfg = run_stage(
      Stage::Config, [&] { return load_experiment_config(opt.config_path); });
  run_stage(Stage::Config, [&] {
    if (!is_operator_experiment(cfg.experiment))
      throw Error(ErrorCode::ConfigError,
                  "eval applies to operator experiments, not " + cfg.experiment);
    return 0;
  });
  int sensor_count = 0;  // 0 means the stored random subsamples
  if (opt.sensors != "random") {
    run_stage(Stage::Config, [&] {
      try {
        std::size_t pos = 0;
        sensor_count = std::stoi(opt.sensors, &pos);
        if (pos != opt.sensors.size() || sensor_count < 2)
          throw Error(ErrorCode::ConfigError, "");
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError,
                    "--sensors: expected \"random\" or an integer >= 2, got " +
                        opt.sensors);
      }
      return 0;
    });
  }
  if (opt.dry_run) {
    std::printf("config ok: %s\n", cfg.experiment.c_str());
    return 0;
  }

  const std::string hash = config_hash(cfg);
  const std::string root =
      opt.out_override.empty() ? cfg.out_dir : opt.out_override;
  for (std::uint64_t seed : selected_seeds(cfg, opt)) {
    LoadedData data = run_stage(
        Stage::Data, [&] { return load_data(cfg, cfg.dataset_dir, seed); });
    run_stage(Stage::Eval, [&] {
      const std::string dir = seed_dir(root, seed);
      json dj = read_json_file(dir + "/dictionary.json");
      json mj = read_json_file(dir + "/model.json");
      if (dj.value("config_hash", "") != hash ||
          mj.value("config_hash", "") != hash)
        throw Error(ErrorCode::FingerprintMismatch,
                    dir + ": artifacts were produced by a different config");
      Dictionary dict = dj.at("dictionary").get<Dictionary>();
      DeepOnetModel model = mj.at("model").get<DeepOnetModel>();
      if (model.input_dictionary_fingerprint != dict.fingerprint())
        throw Error(ErrorCode::FingerprintMismatch,
                    dir + ": model and dictionary fingerprints differ");

      const int n_train = cfg.data.n_train;
      const int n_test = cfg.data.n_test;
      std::vector<OperatorSample> samples(n_test);
      parallel_for_checked(n_test, [&](std::size_t k) {
        const DatasetRecord& rec = data.records[n_train + int(k)];
        PointCloudSignal sig;
        if (sensor_count == 0) {
          sig = input_signal(rec);
        } else {
          if (rec.x_full.cols != 1)
            throw Error(ErrorCode::ConfigError,
                        "numeric sensor sweeps need 1D inputs");
          sig.points = uniform_points_1d(sensor_count);
          sig.values = interp_linear(rec.x_full, rec.u_full, sig.points);
        }
        OperatorSample s;
        s.input_embedding = project(dict, sig, cfg.dict.lambda);
        s.output_points = rec.y;
        s.output_values = rec.s;
        samples[k] = std::move(s);
      });
      double rel = evaluate_operator(model, samples);

      json out;
      out["experiment"] = cfg.experiment;
      out["seed"] = seed;
      out["config_hash"] = hash;
      out["sensors"] = sensor_count == 0 ? json("random") : json(sensor_count);
      out["split"] = "test";
      out["rel_mse"] = rel;
      std::string name = sensor_count == 0 ? std::string("random")
                                           : std::to_string(sensor_count);
      write_json_file(dir + "/eval_" + name + ".json", out);
      std::printf("eval %s seed %llu sensors %s: test rel-mse %.3e\n",
                  cfg.experiment.c_str(), (unsigned long long)seed,
                  name.c_str(), rel);
      return 0;
    });
  }
  return 0;
}

int cmd_report(const CliOptions& opt) {
  ExperimentConfig cfg = run_stage(
      Stage::Config, [&] { return load_experiment_config(opt.config_path); });
  if (opt.dry_run) {
    std::printf("config ok: %s\n", cfg.experiment.c_str());
    return 0;
  }
  const std::string root =
      opt.out_override.empty() ? cfg.out_dir : opt.out_override;

  return run_stage(Stage::Eval, [&] {
    std::vector<std::string> dirs;
    if (std::filesystem::is_directory(root)) {
      for (const auto& e : std::filesystem::directory_iterator(root)) {
        if (e.is_directory() &&
            e.path().filename().string().rfind("seed_", 0) == 0)
          dirs.push_back(e.path().string());
      }
    }
    std::sort(dirs.begin(), dirs.end());

    std::string csv = "experiment,seed,M,split,rel_mse\n";
    auto add_row = [&](const std::string& exp, std::uint64_t seed,
                       const std::string& m, const std::string& split,
                       double err) {
      csv += exp + "," + std::to_string(seed) + "," + m + "," + split + "," +
             fmt_double(err) + "\n";
    };

    for (const std::string& dir : dirs) {
      const std::string mpath = dir + "/metrics.json";
      if (std::filesystem::exists(mpath)) {
        json m = read_json_file(mpath);
        std::uint64_t seed = m.value("seed", 0ull);
        std::string exp = m.value("experiment", cfg.experiment);
        if (m.contains("rows")) {
          for (const json& row : m["rows"]) {
            std::string pct = fmt_double(row["mask_percent"].get<double>());
            add_row(exp + "/gpod", seed, pct, "test", row["gpod"].get<double>());
            add_row(exp + "/learned_dict", seed, pct, "test",
                    row["learned_dict"].get<double>());
          }
        } else if (m.contains("random_cosine")) {
          std::string pct = fmt_double(m["mask_percent"].get<double>());
          add_row(exp + "/learned_dict", seed, pct, "test",
                  m["learned_dict"].get<double>());
          add_row(exp + "/random_cosine", seed, pct, "test",
                  m["random_cosine"].get<double>());
          add_row(exp + "/random_relu", seed, pct, "test",
                  m["random_relu"].get<double>());
        } else {
          add_row(exp, seed, "random", "train", m["train_rel_mse"].get<double>());
          add_row(exp, seed, "random", "test", m["test_rel_mse"].get<double>());
        }
      }
      std::vector<std::string> evals;
      for (const auto& e : std::filesystem::directory_iterator(dir)) {
        std::string name = e.path().filename().string();
        if (name.rfind("eval_", 0) == 0 && name.size() > 10 &&
            name.substr(name.size() - 5) == ".json")
          evals.push_back(e.path().string());
      }
      std::sort(evals.begin(), evals.end());
      for (const std::string& path : evals) {
        json m = read_json_file(path);
        std::string sensors = m["sensors"].is_string()
                                  ? m["sensors"].get<std::string>()
                                  : std::to_string(m["sensors"].get<int>());
        add_row(m.value("experiment", cfg.experiment), m.value("seed", 0ull),
                sensors, m.value("split", "test"), m["rel_mse"].get<double>());
      }
    }
    write_text(root + "/results.csv", csv);
    std::fputs(csv.c_str(), stdout);
    return 0;
  });
}

}  // namespace rino
