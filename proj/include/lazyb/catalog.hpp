#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lazyb/model_graph.hpp"
#include "lazyb/traffic.hpp"

namespace lazyb {

/// A model plus the serving-side knowledge attached to it: the output-length
/// profile used by the predictor and an optional explicit dec_timesteps.
struct CatalogEntry {
  ModelGraph graph;
  LengthDistribution length_dist;
  std::optional<std::uint32_t> dec_timesteps;
};

class Catalog {
 public:
  void add(CatalogEntry entry);

  const CatalogEntry* find(const std::string& name) const;
  /// Throws ValidationError for unknown names.
  const CatalogEntry& at(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;

  static ModelSpec parse_model_spec(const nlohmann::json& j);
  static Catalog from_json(const nlohmann::json& j);
  static Catalog load(const std::string& path);
  /// The calibrated resnet / gnmt / transformer models shipped with the tool.
  static const Catalog& shipped();

 private:
  std::map<std::string, CatalogEntry> entries_;
};

}  // namespace lazyb
