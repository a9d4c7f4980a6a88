#include "lazyb/catalog.hpp"

#include <fstream>

#include "lazyb/shipped_data.hpp"

namespace lazyb {

using nlohmann::json;

void Catalog::add(CatalogEntry entry) {
  const std::string name = entry.graph.name();
  require(!entries_.contains(name), "duplicate model '" + name + "' in catalog");
  entries_.emplace(name, std::move(entry));
}

const CatalogEntry* Catalog::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

const CatalogEntry& Catalog::at(const std::string& name) const {
  const auto* e = find(name);
  require(e != nullptr, "unknown model '" + name + "'");
  return *e;
}

std::vector<std::string> Catalog::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : entries_) out.push_back(k);
  return out;
}

ModelSpec Catalog::parse_model_spec(const json& j) {
  require(j.is_object(), "catalog: model spec must be an object");
  ModelSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "static") {
      spec.kind = GraphKind::StaticGraph;
    } else if (kind == "dynamic") {
      spec.kind = GraphKind::DynamicGraph;
    } else {
      throw ValidationError("catalog: model '" + spec.name + "' has unknown kind '" + kind + "'");
    }
    spec.recurrent = j.value("recurrent", false);
    spec.enc_timesteps = j.value("enc_timesteps", 1u);
    spec.max_dec_timesteps = j.value("max_dec_timesteps", 1u);
    spec.calibration_dec_timesteps = j.value("calibration_dec_timesteps", 0u);
    for (const auto& jn : j.at("nodes")) {
      ModelSpec::Node n;
      n.kind = parse_node_kind(jn.at("kind").get<std::string>());
      const auto lat = jn.at("base_latency_us").get<std::int64_t>();
      n.base_latency_us = lat;
      const auto sat = jn.value("saturation_batch", std::int64_t{16});
      require(sat >= 1, "catalog: saturation_batch must be >= 1");
      n.saturation_batch = static_cast<std::uint32_t>(sat);
      if (jn.contains("weight_group") && !jn.at("weight_group").is_null()) {
        n.weight_group = jn.at("weight_group").get<std::uint32_t>();
      }
      n.label = jn.value("label", std::string{});
      spec.nodes.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("catalog: ") + e.what());
  }
  return spec;
}

Catalog Catalog::from_json(const json& j) {
  require(j.is_array(), "catalog: top level must be an array of model specs");
  Catalog cat;
  for (const auto& jm : j) {
    CatalogEntry e{build_model(parse_model_spec(jm)), {}, std::nullopt};
    try {
      if (jm.contains("dec_timesteps")) {
        const auto d = jm.at("dec_timesteps").get<std::uint32_t>();
        require(d >= 1, "catalog: dec_timesteps must be >= 1");
        e.dec_timesteps = d;
      }
      if (jm.contains("length_cdf")) {
        std::vector<LengthDistribution::Point> pts;
        for (const auto& p : jm.at("length_cdf")) {
          pts.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<double>()});
        }
        e.length_dist = LengthDistribution(std::move(pts));
      }
    } catch (const json::exception& ex) {
      throw ValidationError(std::string("catalog: ") + ex.what());
    }
    if (e.graph.is_dynamic() && e.length_dist.empty()) {
      e.length_dist = LengthDistribution::default_en_de();
    }
    if (e.graph.is_dynamic()) {
      require(e.length_dist.max_len() <= e.graph.max_dec_timesteps(),
              "catalog: length profile of '" + e.graph.name() +
                  "' exceeds max_dec_timesteps");
    }
    cat.add(std::move(e));
  }
  return cat;
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open catalog '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("catalog '" + path + "': " + e.what());
  }
  return from_json(j);
}

const Catalog& Catalog::shipped() {
  static const Catalog cat = from_json(json::parse(shipped::kCatalogJson));
  return cat;
}

}  // namespace lazyb
