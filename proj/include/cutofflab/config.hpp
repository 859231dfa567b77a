#pragma once

// Experiment configuration: a versioned JSON document validated against a
// fixed schema (unknown keys are rejected) and turned into group/state
// builders. The same descriptors drive single analyses and family scans.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutofflab/errors.hpp"
#include "cutofflab/group.hpp"
#include "cutofflab/state.hpp"

namespace cutofflab {

using Json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

struct AnalysisSettings {
  unsigned k_min = 1;
  unsigned k_max = 8;
  unsigned radius = 20;          // truncation radius for series bounds
  unsigned profile_radius = 6;   // decay-profile window
  double epsilon = 0.01;
  std::size_t cap = kDefaultCap;
  double psd_tolerance = kPsdTolerance;
  double strictness_tolerance = kStrictnessTolerance;
};

struct FamilySpec {
  std::string parameter;  // "rank" or "copies"
  std::vector<long> values;
};

struct ExperimentConfig {
  Json group;
  Json state;
  AnalysisSettings analysis;
  std::optional<FamilySpec> family;
  unsigned cogrowth_max_length = 6;
  std::optional<std::string> output;
};

namespace detail_config {

inline void require_keys(const Json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline unsigned get_positive_int(const Json& obj, const std::string& where,
                                 const std::string& key) {
  if (!obj.contains(key))
    throw ConfigError(where + ": missing required key '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long>() <= 0)
    throw ConfigError(where + "." + key + ": expected a positive integer");
  return static_cast<unsigned>(v.get<long>());
}

inline void validate_group(const Json& g, const std::string& where) {
  require_keys(g, where, {"kind", "rank", "commuting_edges", "factors"});
  if (!g.contains("kind") || !g.at("kind").is_string())
    throw ConfigError(where + ": missing string key 'kind'");
  const std::string kind = g.at("kind").get<std::string>();
  if (kind == "free" || kind == "universal_coxeter") {
    get_positive_int(g, where, "rank");
    if (g.contains("commuting_edges") || g.contains("factors"))
      throw ConfigError(where + ": '" + kind + "' takes only 'rank'");
  } else if (kind == "right_angled_coxeter") {
    get_positive_int(g, where, "rank");
    if (!g.contains("commuting_edges") || !g.at("commuting_edges").is_array())
      throw ConfigError(where + ": 'right_angled_coxeter' needs 'commuting_edges'");
    for (const auto& e : g.at("commuting_edges")) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer())
        throw ConfigError(where + ".commuting_edges: entries must be [u, v]");
    }
  } else if (kind == "free_product") {
    if (!g.contains("factors") || !g.at("factors").is_array() ||
        g.at("factors").empty())
      throw ConfigError(where + ": 'free_product' needs a 'factors' array");
    int idx = 0;
    for (const auto& f : g.at("factors"))
      validate_group(f, where + ".factors[" + std::to_string(idx++) + "]");
  } else {
    throw ConfigError(where + ": unknown group kind '" + kind + "'");
  }
}

inline void validate_state(const Json& s, const std::string& where) {
  require_keys(s, where, {"kind", "t", "lambda", "normalize", "factors"});
  if (!s.contains("kind") || !s.at("kind").is_string())
    throw ConfigError(where + ": missing string key 'kind'");
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "length") {
    if (!s.contains("t") || !s.at("t").is_number() ||
        !(s.at("t").get<double>() > 0.0))
      throw ConfigError(where + ": 'length' needs a positive number 't'");
  } else if (kind == "counit") {
    if (s.size() != 1) throw ConfigError(where + ": 'counit' takes no fields");
  } else if (kind == "radial") {
    if (!s.contains("lambda") || !s.at("lambda").is_array() ||
        s.at("lambda").empty())
      throw ConfigError(where + ": 'radial' needs a nonempty 'lambda' array");
    for (const auto& v : s.at("lambda"))
      if (!v.is_number())
        throw ConfigError(where + ".lambda: entries must be numbers");
    if (s.contains("normalize") && !s.at("normalize").is_boolean())
      throw ConfigError(where + ".normalize: expected a boolean");
  } else if (kind == "free_product") {
    if (!s.contains("factors") || !s.at("factors").is_array() ||
        s.at("factors").empty())
      throw ConfigError(where + ": 'free_product' needs a 'factors' array");
    int idx = 0;
    for (const auto& f : s.at("factors"))
      validate_state(f, where + ".factors[" + std::to_string(idx++) + "]");
  } else {
    throw ConfigError(where + ": unknown state kind '" + kind + "'");
  }
}

}  // namespace detail_config

inline ExperimentConfig parse_config(const Json& doc) {
  detail_config::require_keys(doc, "config",
                              {"schema_version", "group", "state", "analysis",
                               "family", "cogrowth", "output"});
  if (!doc.contains("schema_version") ||
      !doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != kConfigSchemaVersion)
    throw ConfigError("config: schema_version must be " +
                      std::to_string(kConfigSchemaVersion));
  if (!doc.contains("group")) throw ConfigError("config: missing 'group'");
  if (!doc.contains("state")) throw ConfigError("config: missing 'state'");
  detail_config::validate_group(doc.at("group"), "group");
  detail_config::validate_state(doc.at("state"), "state");

  ExperimentConfig cfg;
  cfg.group = doc.at("group");
  cfg.state = doc.at("state");

  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    detail_config::require_keys(
        a, "analysis",
        {"k_min", "k_max", "radius", "profile_radius", "epsilon", "cap",
         "psd_tolerance", "strictness_tolerance"});
    auto get_num = [&](const char* key, double fallback, bool positive) {
      if (!a.contains(key)) return fallback;
      if (!a.at(key).is_number())
        throw ConfigError(std::string("analysis.") + key + ": expected a number");
      const double v = a.at(key).get<double>();
      if (positive && !(v > 0.0))
        throw ConfigError(std::string("analysis.") + key + ": must be positive");
      return v;
    };
    if (a.contains("k_min"))
      cfg.analysis.k_min = detail_config::get_positive_int(a, "analysis", "k_min");
    if (a.contains("k_max"))
      cfg.analysis.k_max = detail_config::get_positive_int(a, "analysis", "k_max");
    if (cfg.analysis.k_min > cfg.analysis.k_max)
      throw ConfigError("analysis: k_min exceeds k_max");
    if (a.contains("radius"))
      cfg.analysis.radius = detail_config::get_positive_int(a, "analysis", "radius");
    if (a.contains("profile_radius"))
      cfg.analysis.profile_radius =
          detail_config::get_positive_int(a, "analysis", "profile_radius");
    cfg.analysis.epsilon = get_num("epsilon", cfg.analysis.epsilon, true);
    if (!(cfg.analysis.epsilon < 0.5))
      throw ConfigError("analysis.epsilon: must lie in (0, 1/2)");
    if (a.contains("cap"))
      cfg.analysis.cap = detail_config::get_positive_int(a, "analysis", "cap");
    cfg.analysis.psd_tolerance =
        get_num("psd_tolerance", cfg.analysis.psd_tolerance, true);
    cfg.analysis.strictness_tolerance =
        get_num("strictness_tolerance", cfg.analysis.strictness_tolerance, true);
  }

  if (doc.contains("family")) {
    const auto& f = doc.at("family");
    detail_config::require_keys(f, "family", {"parameter", "values"});
    if (!f.contains("parameter") || !f.at("parameter").is_string())
      throw ConfigError("family: missing string key 'parameter'");
    FamilySpec spec;
    spec.parameter = f.at("parameter").get<std::string>();
    if (spec.parameter != "rank" && spec.parameter != "copies")
      throw ConfigError("family.parameter: expected 'rank' or 'copies'");
    if (!f.contains("values") || !f.at("values").is_array() ||
        f.at("values").empty())
      throw ConfigError("family: missing nonempty 'values' array");
    for (const auto& v : f.at("values")) {
      if (!v.is_number_integer() || v.get<long>() <= 0)
        throw ConfigError("family.values: entries must be positive integers");
      spec.values.push_back(v.get<long>());
    }
    cfg.family = std::move(spec);
  }

  if (doc.contains("cogrowth")) {
    const auto& c = doc.at("cogrowth");
    detail_config::require_keys(c, "cogrowth", {"max_length"});
    if (c.contains("max_length"))
      cfg.cogrowth_max_length =
          detail_config::get_positive_int(c, "cogrowth", "max_length");
  }

  if (doc.contains("output")) {
    if (!doc.at("output").is_string())
      throw ConfigError("config: 'output' must be a string path");
    cfg.output = doc.at("output").get<std::string>();
  }
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline GroupModel build_group(const Json& g) {
  const std::string kind = g.at("kind").get<std::string>();
  if (kind == "free") return GroupModel::free_group(g.at("rank").get<unsigned>());
  if (kind == "universal_coxeter")
    return GroupModel::universal_coxeter(g.at("rank").get<unsigned>());
  if (kind == "right_angled_coxeter") {
    std::vector<std::pair<unsigned, unsigned>> edges;
    for (const auto& e : g.at("commuting_edges"))
      edges.emplace_back(e[0].get<unsigned>(), e[1].get<unsigned>());
    return GroupModel::right_angled_coxeter(g.at("rank").get<unsigned>(), edges);
  }
  std::vector<GroupModel> factors;
  for (const auto& f : g.at("factors")) factors.push_back(build_group(f));
  return GroupModel::free_product(std::move(factors));
}

inline StateModel build_state(const Json& s, const GroupModel& model) {
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "length") return length_state(model, s.at("t").get<double>());
  if (kind == "counit") return counit_state(model);
  if (kind == "radial") {
    RadialCoefficients coeffs;
    for (const auto& v : s.at("lambda")) coeffs.lambda.push_back(v.get<double>());
    if (s.value("normalize", false)) coeffs = coeffs.normalized(model);
    return radial_state(model, coeffs);
  }
  // free_product
  if (model.kind() != GroupKind::FreeProduct)
    throw ConfigError("state.free_product: group is not a free product");
  const auto& factor_descs = s.at("factors");
  if (factor_descs.size() != model.factors().size())
    throw ConfigError("state.free_product: factor count mismatch with group");
  std::vector<StateModel> factors;
  for (std::size_t i = 0; i < model.factors().size(); ++i)
    factors.push_back(build_state(factor_descs[i], model.factors()[i]));
  return free_product_state(model, std::move(factors));
}

/// Instantiates the group/state pair for one family parameter value.
/// "rank" substitutes the value into the group's rank; "copies" replicates a
/// single-factor free product that many times (states follow suit). Radial
/// states with "normalize": true are renormalized per member.
inline std::pair<GroupModel, StateModel> instantiate_family_member(
    const ExperimentConfig& cfg, long value) {
  if (!cfg.family) throw ConfigError("config has no family block");
  Json group = cfg.group;
  Json state = cfg.state;
  if (cfg.family->parameter == "rank") {
    if (!group.contains("rank"))
      throw ConfigError("family.parameter=rank: group has no 'rank'");
    group["rank"] = value;
  } else {  // copies
    if (group.at("kind").get<std::string>() != "free_product" ||
        group.at("factors").size() != 1)
      throw ConfigError(
          "family.parameter=copies: group must be a single-factor free_product");
    if (state.at("kind").get<std::string>() != "free_product" ||
        state.at("factors").size() != 1)
      throw ConfigError(
          "family.parameter=copies: state must be a single-factor free_product");
    Json gf = Json::array();
    Json sf = Json::array();
    for (long i = 0; i < value; ++i) {
      gf.push_back(group.at("factors")[0]);
      sf.push_back(state.at("factors")[0]);
    }
    group["factors"] = gf;
    state["factors"] = sf;
  }
  GroupModel model = build_group(group);
  StateModel st = build_state(state, model);
  return {std::move(model), std::move(st)};
}

}  // namespace cutofflab
