#include "sepsis/config_io.h"

#include "json_codec.h"
#include "sepsis/report_io.h"

namespace sepsis {

using codec::read_into;

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  codec::reject_unknown_keys(doc,
                             {"seed", "train_fraction", "folds", "minority_grid",
                              "threshold_tuning", "boost", "imputation", "weighting",
                              "ablation", "utility"},
                             "");
  ExperimentConfig c;
  read_into(doc, "seed", c.seed, "");
  read_into(doc, "train_fraction", c.train_fraction, "");
  read_into(doc, "folds", c.folds, "");
  read_into(doc, "minority_grid", c.minority_grid, "");
  read_into(doc, "threshold_tuning", c.threshold_tuning, "");
  if (doc.contains("boost")) c.boost = codec::boost_from_json(doc.at("boost"), "boost.", false);
  if (doc.contains("imputation"))
    c.imputation = codec::imputation_from_json(doc.at("imputation"), "imputation.");
  if (doc.contains("weighting"))
    c.weighting = codec::weighting_from_json(doc.at("weighting"), "weighting.");
  if (doc.contains("ablation"))
    c.ablation = codec::ablation_from_json(doc.at("ablation"), "ablation.");
  if (doc.contains("utility")) c.utility = codec::utility_from_json(doc.at("utility"), "utility.");
  c.validate();
  const auto catalog = FeatureCatalog::challenge_default();
  for (const auto& name : c.weighting.squared_features)
    if (!catalog.index_of(name))
      throw ConfigError("weighting.squared_features: unknown feature '" + name + "'");
  return c;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["train_fraction"] = c.train_fraction;
  j["folds"] = c.folds;
  j["minority_grid"] = c.minority_grid;
  j["threshold_tuning"] = c.threshold_tuning;
  j["boost"] = codec::to_json(c.boost, false);
  j["imputation"] = codec::to_json(c.imputation);
  j["weighting"] = codec::to_json(c.weighting);
  j["ablation"] = codec::to_json(c.ablation);
  j["utility"] = codec::to_json(c.utility);
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(doc);
}

}  // namespace sepsis
