#pragma once

// JSON encoding of the configuration structs shared by the experiment config
// and the model file. Decoders are strict: unknown keys and wrong types are
// ConfigErrors naming the offending field.

#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sepsis/boost.h"
#include "sepsis/ingest.h"
#include "sepsis/metrics.h"
#include "sepsis/preprocess.h"

namespace sepsis::codec {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

void expect_object(const json& j, const std::string& where);
void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         const std::string& where);

template <typename T>
void read_into(const json& j, std::string_view key, T& out, const std::string& where) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + where + std::string(key) + "' has the wrong type");
  }
}

template <typename T>
T read_required(const json& j, std::string_view key, const std::string& where) {
  if (!j.contains(std::string(key)))
    throw ConfigError("missing field '" + where + std::string(key) + "'");
  T out{};
  read_into(j, key, out, where);
  return out;
}

ordered_json to_json(const FeatureCatalog& c);
FeatureCatalog catalog_from_json(const json& j, const std::string& where);

ordered_json to_json(const ImputationPolicy& p);
ImputationPolicy imputation_from_json(const json& j, const std::string& where);

ordered_json to_json(const WeightingPolicy& p);
WeightingPolicy weighting_from_json(const json& j, const std::string& where);

ordered_json to_json(const Ablation& a);
Ablation ablation_from_json(const json& j, const std::string& where);

ordered_json to_json(const TreeParams& p);
TreeParams tree_params_from_json(const json& j, const std::string& where);

// `with_run_fields` adds minority_fraction and seed (model echo only).
ordered_json to_json(const BoostConfig& b, bool with_run_fields);
BoostConfig boost_from_json(const json& j, const std::string& where, bool with_run_fields);

ordered_json to_json(const UtilityConfig& u);
UtilityConfig utility_from_json(const json& j, const std::string& where);

}  // namespace sepsis::codec
