#include "sepsis/model_io.h"

#include <cmath>

#include "json_codec.h"
#include "sepsis/report_io.h"

namespace sepsis {

using codec::json;
using codec::ordered_json;
using codec::read_into;
using codec::read_required;

namespace {

const char* branch_name(Branch b) { return b == Branch::kLeft ? "left" : "right"; }

Branch parse_branch(const std::string& s, const std::string& where) {
  if (s == "left") return Branch::kLeft;
  if (s == "right") return Branch::kRight;
  throw ConfigError("field '" + where + "missing_to' must be \"left\" or \"right\"");
}

ordered_json node_to_json(const DecisionTree& tree, std::size_t id,
                          const std::vector<std::string>& names) {
  const auto& node = tree.nodes[id];
  ordered_json j;
  j["id"] = id;
  j["class_fractions"] = node.class_fractions;
  if (node.is_leaf) {
    j["leaf"] = true;
    j["class"] = node.majority_class;
    return j;
  }
  j["leaf"] = false;
  j["feature"] = node.split.feature;
  if (node.split.feature < names.size()) j["feature_name"] = names[node.split.feature];
  j["threshold"] = node.split.threshold;
  j["missing_to"] = branch_name(node.split.missing_to);
  j["gain"] = node.split.gain;
  ordered_json surrogates = ordered_json::array();
  for (const auto& s : node.surrogates)
    surrogates.push_back({{"feature", s.feature},
                          {"threshold", s.threshold},
                          {"agrees_with_primary", s.agrees_with_primary},
                          {"association", s.association}});
  j["surrogates"] = std::move(surrogates);
  j["left"] = node_to_json(tree, static_cast<std::size_t>(node.left), names);
  j["right"] = node_to_json(tree, static_cast<std::size_t>(node.right), names);
  return j;
}

// Places the nested node at its stored id; returns that id.
int node_from_json(const json& j, DecisionTree& tree, std::vector<bool>& filled, int depth,
                   const std::string& where) {
  codec::expect_object(j, where);
  const auto id = read_required<std::size_t>(j, "id", where);
  if (id >= tree.nodes.size() || filled[id])
    throw ConfigError("tree node id " + std::to_string(id) + " is out of range or repeated");
  filled[id] = true;
  TreeNode node;
  node.depth = depth;
  node.class_fractions = read_required<std::array<double, 2>>(j, "class_fractions", where);
  node.is_leaf = read_required<bool>(j, "leaf", where);
  node.majority_class = node.class_fractions[1] > node.class_fractions[0] ? 1 : 0;
  if (node.is_leaf) {
    read_into(j, "class", node.majority_class, where);
  } else {
    node.split.feature = read_required<std::size_t>(j, "feature", where);
    node.split.threshold = read_required<double>(j, "threshold", where);
    node.split.missing_to = parse_branch(read_required<std::string>(j, "missing_to", where), where);
    read_into(j, "gain", node.split.gain, where);
    if (node.split.feature >= tree.n_features || !std::isfinite(node.split.threshold))
      throw ConfigError("tree node " + std::to_string(id) + " has an invalid split");
    for (const auto& s : j.value("surrogates", json::array())) {
      SurrogateRule r;
      r.feature = read_required<std::size_t>(s, "feature", where + "surrogates.");
      r.threshold = read_required<double>(s, "threshold", where + "surrogates.");
      r.agrees_with_primary = read_required<bool>(s, "agrees_with_primary", where + "surrogates.");
      r.association = read_required<double>(s, "association", where + "surrogates.");
      if (r.feature >= tree.n_features || r.feature == node.split.feature)
        throw ConfigError("tree node " + std::to_string(id) + " has an invalid surrogate");
      node.surrogates.push_back(r);
    }
    if (!j.contains("left") || !j.contains("right"))
      throw ConfigError("internal tree node " + std::to_string(id) + " lacks children");
  }
  tree.nodes[id] = node;
  if (!node.is_leaf) {
    const int left = node_from_json(j.at("left"), tree, filled, depth + 1, where);
    const int right = node_from_json(j.at("right"), tree, filled, depth + 1, where);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
  }
  return static_cast<int>(id);
}

std::size_t count_nodes(const json& j) {
  if (!j.is_object()) throw ConfigError("tree node must be a JSON object");
  std::size_t n = 1;
  if (j.contains("left")) n += count_nodes(j.at("left"));
  if (j.contains("right")) n += count_nodes(j.at("right"));
  return n;
}

}  // namespace

ordered_json model_to_json(const EnsembleModel& model) {
  const auto& pre = model.preprocessing;
  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["catalog"] = codec::to_json(pre.catalog);

  ordered_json p;
  p["imputation"] = codec::to_json(pre.imputation);
  p["weighting"] = codec::to_json(pre.weighting);
  p["ablation"] = codec::to_json(pre.ablation);
  p["feature_names"] = pre.feature_names;
  p["removed_features"] = pre.removed_features;
  ordered_json fences = ordered_json::array();
  for (const auto& f : pre.fences)
    fences.push_back({{"feature", f.feature},
                      {"q1", f.q1},
                      {"q3", f.q3},
                      {"lower", f.lower},
                      {"upper", f.upper}});
  p["iqr_fences"] = std::move(fences);
  j["preprocessing"] = std::move(p);

  j["boost"] = codec::to_json(model.config, true);
  j["training"] = {{"cycles_run", model.summary.cycles_run},
                   {"selected_minority_fraction", model.summary.minority_fraction},
                   {"seed", model.summary.seed},
                   {"stopped_early", model.summary.stopped_early}};
  j["threshold"] = model.threshold;
  j["n_features"] = model.n_features();
  j["vote_weights"] = model.vote_weights;
  ordered_json trees = ordered_json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(t, 0, pre.feature_names));
  j["trees"] = std::move(trees);
  return j;
}

EnsembleModel model_from_json(const json& doc) {
  codec::expect_object(doc, "");
  const auto version = read_required<int>(doc, "format_version", "");
  if (version != kModelFormatVersion)
    throw ConfigError("model format_version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");

  EnsembleModel model;
  auto& pre = model.preprocessing;
  if (!doc.contains("catalog")) throw ConfigError("missing field 'catalog'");
  pre.catalog = codec::catalog_from_json(doc.at("catalog"), "catalog.");

  if (!doc.contains("preprocessing")) throw ConfigError("missing field 'preprocessing'");
  const auto& p = doc.at("preprocessing");
  codec::expect_object(p, "preprocessing");
  const std::string pw = "preprocessing.";
  if (p.contains("imputation"))
    pre.imputation = codec::imputation_from_json(p.at("imputation"), pw + "imputation.");
  if (p.contains("weighting"))
    pre.weighting = codec::weighting_from_json(p.at("weighting"), pw + "weighting.");
  if (p.contains("ablation"))
    pre.ablation = codec::ablation_from_json(p.at("ablation"), pw + "ablation.");
  pre.feature_names = read_required<std::vector<std::string>>(p, "feature_names", pw);
  read_into(p, "removed_features", pre.removed_features, pw);
  for (const auto& f : p.value("iqr_fences", json::array())) {
    IqrFence fence;
    fence.feature = read_required<std::string>(f, "feature", pw + "iqr_fences.");
    fence.q1 = read_required<double>(f, "q1", pw + "iqr_fences.");
    fence.q3 = read_required<double>(f, "q3", pw + "iqr_fences.");
    fence.lower = read_required<double>(f, "lower", pw + "iqr_fences.");
    fence.upper = read_required<double>(f, "upper", pw + "iqr_fences.");
    pre.fences.push_back(fence);
  }

  if (doc.contains("boost")) model.config = codec::boost_from_json(doc.at("boost"), "boost.", true);
  if (doc.contains("training")) {
    const auto& t = doc.at("training");
    read_into(t, "cycles_run", model.summary.cycles_run, "training.");
    read_into(t, "selected_minority_fraction", model.summary.minority_fraction, "training.");
    read_into(t, "seed", model.summary.seed, "training.");
    read_into(t, "stopped_early", model.summary.stopped_early, "training.");
  }
  model.threshold = read_required<double>(doc, "threshold", "");
  const auto n_features = read_required<std::size_t>(doc, "n_features", "");
  if (n_features != pre.feature_names.size())
    throw ConfigError("model n_features (" + std::to_string(n_features) +
                      ") does not match its feature list (" +
                      std::to_string(pre.feature_names.size()) + ")");
  model.vote_weights = read_required<std::vector<double>>(doc, "vote_weights", "");

  if (!doc.contains("trees") || !doc.at("trees").is_array())
    throw ConfigError("missing field 'trees'");
  for (const auto& tj : doc.at("trees")) {
    DecisionTree tree;
    tree.n_features = n_features;
    tree.nodes.resize(count_nodes(tj));
    std::vector<bool> filled(tree.nodes.size(), false);
    if (node_from_json(tj, tree, filled, 0, "trees.") != 0)
      throw ConfigError("tree root must have id 0");
    model.trees.push_back(std::move(tree));
  }
  model.validate();
  return model;
}

void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

EnsembleModel load_model(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace sepsis
