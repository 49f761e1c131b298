#include <json.hpp>

#include "sublin/errors.hpp"
#include "sublin/scenario.hpp"

namespace sublin::scenario {

using nlohmann::json;

std::string to_json(const ScenarioSet& set) {
  json members = json::array();
  for (const auto& m : set.members()) {
    json atoms = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
      json atom = json::array();
      for (double c : m.point(i)) atom.push_back(c);
      atom.push_back(m.weight(i));
      atoms.push_back(std::move(atom));
    }
    members.push_back(json{{"atoms", std::move(atoms)}});
  }
  return json{{"members", std::move(members)}}.dump();
}

ScenarioSet scenario_set_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario set JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("members") || !doc["members"].is_array()) {
    throw ConfigError("scenario set JSON needs a \"members\" array");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "members") throw ConfigError("unknown field '" + key + "' in scenario set JSON");
  }
  std::vector<DiscreteDistribution> members;
  for (const auto& m : doc["members"]) {
    if (!m.is_object() || !m.contains("atoms") || !m["atoms"].is_array() || m.size() != 1) {
      throw ConfigError("each member must be {\"atoms\": [...]}");
    }
    std::size_t dim = 0;
    std::vector<double> coords;
    std::vector<double> weights;
    for (const auto& atom : m["atoms"]) {
      if (!atom.is_array() || atom.size() < 2) {
        throw ConfigError("each atom must be [x..., weight]");
      }
      for (const auto& v : atom) {
        if (!v.is_number()) throw ConfigError("atom entries must be numbers");
      }
      const std::size_t d = atom.size() - 1;
      if (dim == 0) dim = d;
      if (d != dim) throw ConfigError("atoms of one member differ in dimension");
      for (std::size_t i = 0; i < d; ++i) coords.push_back(atom[i].get<double>());
      weights.push_back(atom[d].get<double>());
    }
    members.emplace_back(dim, std::move(coords), std::move(weights));
  }
  return ScenarioSet(std::move(members));
}

}  // namespace sublin::scenario
