#include "json_codec.h"

#include <algorithm>

namespace sepsis::codec {

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object())
    throw ConfigError("'" + (where.empty() ? std::string("<root>") : where) +
                      "' must be a JSON object");
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown field '" + where + key + "'");
  }
}

ordered_json to_json(const FeatureCatalog& c) {
  return {{"names", c.names},
          {"weighted_set", c.weighted_set},
          {"time_varying_set", c.time_varying_set},
          {"static_set", c.static_set}};
}

FeatureCatalog catalog_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"names", "weighted_set", "time_varying_set", "static_set"}, where);
  FeatureCatalog c;
  c.names = read_required<std::vector<std::string>>(j, "names", where);
  read_into(j, "weighted_set", c.weighted_set, where);
  read_into(j, "time_varying_set", c.time_varying_set, where);
  read_into(j, "static_set", c.static_set, where);
  c.validate();
  return c;
}

ordered_json to_json(const ImputationPolicy& p) {
  return {{"min_observations", p.min_observations}, {"extrapolate_ends", p.extrapolate_ends}};
}

ImputationPolicy imputation_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"min_observations", "extrapolate_ends"}, where);
  ImputationPolicy p;
  read_into(j, "min_observations", p.min_observations, where);
  read_into(j, "extrapolate_ends", p.extrapolate_ends, where);
  return p;
}

ordered_json to_json(const WeightingPolicy& p) {
  return {{"squared_features", p.squared_features}};
}

WeightingPolicy weighting_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"squared_features"}, where);
  WeightingPolicy p;
  read_into(j, "squared_features", p.squared_features, where);
  return p;
}

ordered_json to_json(const Ablation& a) {
  return {{"kind", to_string(a.kind)}, {"threshold", a.missing_threshold}, {"k", a.iqr_k}};
}

Ablation ablation_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"kind", "threshold", "k"}, where);
  Ablation a;
  std::string kind = "none";
  read_into(j, "kind", kind, where);
  a.kind = parse_ablation_kind(kind);
  read_into(j, "threshold", a.missing_threshold, where);
  read_into(j, "k", a.iqr_k, where);
  return a;
}

ordered_json to_json(const TreeParams& p) {
  return {{"max_splits", p.max_splits},
          {"min_leaf_weight", p.min_leaf_weight},
          {"max_surrogates", p.max_surrogates},
          {"max_depth", p.max_depth}};
}

TreeParams tree_params_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"max_splits", "min_leaf_weight", "max_surrogates", "max_depth"}, where);
  TreeParams p;
  read_into(j, "max_splits", p.max_splits, where);
  read_into(j, "min_leaf_weight", p.min_leaf_weight, where);
  read_into(j, "max_surrogates", p.max_surrogates, where);
  read_into(j, "max_depth", p.max_depth, where);
  return p;
}

ordered_json to_json(const BoostConfig& b, bool with_run_fields) {
  ordered_json j;
  j["cycles"] = b.cycles;
  if (with_run_fields) {
    j["minority_fraction"] = b.minority_fraction;
    j["seed"] = b.seed;
  }
  j["epsilon_floor"] = b.epsilon_floor;
  j["max_resample_retries"] = b.max_resample_retries;
  j["tree"] = to_json(b.tree);
  return j;
}

BoostConfig boost_from_json(const json& j, const std::string& where, bool with_run_fields) {
  if (with_run_fields)
    reject_unknown_keys(j,
                        {"cycles", "minority_fraction", "seed", "epsilon_floor",
                         "max_resample_retries", "tree"},
                        where);
  else
    reject_unknown_keys(j, {"cycles", "epsilon_floor", "max_resample_retries", "tree"}, where);
  BoostConfig b;
  read_into(j, "cycles", b.cycles, where);
  if (with_run_fields) {
    read_into(j, "minority_fraction", b.minority_fraction, where);
    read_into(j, "seed", b.seed, where);
  }
  read_into(j, "epsilon_floor", b.epsilon_floor, where);
  read_into(j, "max_resample_retries", b.max_resample_retries, where);
  if (j.contains("tree")) b.tree = tree_params_from_json(j.at("tree"), where + "tree.");
  return b;
}

ordered_json to_json(const UtilityConfig& u) {
  return {{"dt_early", u.dt_early},
          {"dt_optimal", u.dt_optimal},
          {"dt_late", u.dt_late},
          {"max_u_tp", u.max_u_tp},
          {"min_u_fn", u.min_u_fn},
          {"u_fp", u.u_fp},
          {"u_tn", u.u_tn},
          {"label_lead", u.label_lead},
          {"penalize_after_window", u.penalize_after_window}};
}

UtilityConfig utility_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j,
                      {"dt_early", "dt_optimal", "dt_late", "max_u_tp", "min_u_fn", "u_fp",
                       "u_tn", "label_lead", "penalize_after_window"},
                      where);
  UtilityConfig u;
  read_into(j, "dt_early", u.dt_early, where);
  read_into(j, "dt_optimal", u.dt_optimal, where);
  read_into(j, "dt_late", u.dt_late, where);
  read_into(j, "max_u_tp", u.max_u_tp, where);
  read_into(j, "min_u_fn", u.min_u_fn, where);
  read_into(j, "u_fp", u.u_fp, where);
  read_into(j, "u_tn", u.u_tn, where);
  read_into(j, "label_lead", u.label_lead, where);
  read_into(j, "penalize_after_window", u.penalize_after_window, where);
  return u;
}

}  // namespace sepsis::codec
