#pragma once

#include <json.hpp>

#include "rino/inr.hpp"

namespace rino {

using json = nlohmann::json;

void to_json(json& j, const MlpSpec& spec);
void from_json(const json& j, MlpSpec& spec);

// Params serialize as one entry per layer: [[W rows...], [b...]]. Decimal
// doubles are emitted in shortest round-trip form, so reloading reproduces
// the exact f64 bit patterns.
void to_json(json& j, const MlpParams& params);
void from_json(const json& j, MlpParams& params);

void to_json(json& j, const Box& box);
void from_json(const json& j, Box& box);

struct DenseMatrix;

void to_json(json& j, const DenseMatrix& m);
void from_json(const json& j, DenseMatrix& m);

struct BasisFunction;
struct Dictionary;
struct Embedding;

void to_json(json& j, const BasisFunction& atom);
void from_json(const json& j, BasisFunction& atom);
void to_json(json& j, const Dictionary& dict);
void from_json(const json& j, Dictionary& dict);
void to_json(json& j, const Embedding& emb);
void from_json(const json& j, Embedding& emb);

struct DeepOnetModel;

void to_json(json& j, const DeepOnetModel& model);
void from_json(const json& j, DeepOnetModel& model);

}  // namespace rino
