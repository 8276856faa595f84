#include "rino/dataset_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rino/json_io.hpp"

namespace rino {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_vector(std::string& out, const std::vector<double>& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    append_double(out, v[i]);
  }
  out += ']';
}

void append_matrix(std::string& out, const DenseMatrix& m) {
  out += '[';
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (i) out += ',';
    out += '[';
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out += ',';
      append_double(out, m(i, j));
    }
    out += ']';
  }
  out += ']';
}

DenseMatrix matrix_from_json(const json& j, const char* field) {
  if (!j.is_array())
    throw Error(ErrorCode::IoError, std::string(field) + " is not an array");
  DenseMatrix m;
  m.rows = j.size();
  for (std::size_t i = 0; i < m.rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || (i > 0 && row.size() != m.cols))
      throw Error(ErrorCode::IoError, std::string(field) + " rows are ragged");
    if (i == 0) m.cols = row.size();
    for (const json& v : row) m.data.push_back(v.get<double>());
  }
  return m;
}

}  // namespace

void write_dataset(const std::string& dir, const DatasetManifest& manifest,
                   const std::vector<DatasetRecord>& records) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir);

  json mj;
  mj["generator"] = manifest.generator;
  mj["config"] = manifest.config;
  mj["seed"] = manifest.seed;
  mj["n_train"] = manifest.n_train;
  mj["n_test"] = manifest.n_test;
  mj["domain"] = manifest.domain;
  {
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write manifest.json");
    out << mj.dump(2) << '\n';
  }

  std::ofstream out(dir + "/data.jsonl", std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write data.jsonl");
  std::string line;
  for (const DatasetRecord& rec : records) {
    line.clear();
    line += "{\"id\":";
    line += std::to_string(rec.id);
    line += ",\"x\":";
    append_matrix(line, rec.x);
    line += ",\"u\":";
    append_vector(line, rec.u);
    line += ",\"y\":";
    append_matrix(line, rec.y);
    line += ",\"s\":";
    append_vector(line, rec.s);
    line += ",\"x_full\":";
    append_matrix(line, rec.x_full);
    line += ",\"u_full\":";
    append_vector(line, rec.u_full);
    line += "}\n";
    out << line;
  }
  if (!out) throw Error(ErrorCode::IoError, "short write on data.jsonl");
}

DatasetManifest read_manifest(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json", std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + dir + "/manifest.json");
  json mj = json::parse(in, nullptr, false);
  if (mj.is_discarded())
    throw Error(ErrorCode::IoError, "manifest.json is not valid JSON");
  DatasetManifest manifest;
  try {
    manifest.generator = mj.at("generator").get<std::string>();
    manifest.config = mj.at("config");
    manifest.seed = mj.at("seed").get<std::uint64_t>();
    manifest.n_train = mj.at("n_train").get<int>();
    manifest.n_test = mj.at("n_test").get<int>();
    manifest.domain = mj.at("domain").get<Box>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("manifest.json: ") + e.what());
  }
  return manifest;
}

std::vector<DatasetRecord> read_records(const std::string& dir) {
  std::ifstream in(dir + "/data.jsonl", std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + dir + "/data.jsonl");
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(ErrorCode::IoError,
                  "data.jsonl line " + std::to_string(lineno) + ": bad JSON");
    DatasetRecord rec;
    try {
      rec.id = j.at("id").get<int>();
      rec.x = matrix_from_json(j.at("x"), "x");
      rec.u = j.at("u").get<std::vector<double>>();
      rec.y = matrix_from_json(j.at("y"), "y");
      rec.s = j.at("s").get<std::vector<double>>();
      rec.x_full = matrix_from_json(j.at("x_full"), "x_full");
      rec.u_full = j.at("u_full").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IoError, "data.jsonl line " + std::to_string(lineno) +
                                          ": " + e.what());
    }
    if (rec.x.rows != rec.u.size() || rec.y.rows != rec.s.size() ||
        rec.x_full.rows != rec.u_full.size())
      throw Error(ErrorCode::IoError, "data.jsonl line " + std::to_string(lineno) +
                                          ": point/value length mismatch");
    records.push_back(std::move(rec));
  }
  return records;
}

PointCloudSignal input_signal(const DatasetRecord& rec) {
  PointCloudSignal sig;
  sig.points = rec.x;
  sig.values = rec.u;
  return sig;
}

}  // namespace rino
