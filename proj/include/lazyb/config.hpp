#pragma once

#include <string>

#include <json.hpp>

#include "lazyb/policy.hpp"

namespace lazyb {

/// Accepts either `{"policy": {...}}` or the bare policy object. Unknown keys
/// are rejected.
PolicyConfig parse_policy_config(const nlohmann::json& j);
PolicyConfig load_policy_config(const std::string& path);
nlohmann::json to_json(const PolicyConfig& cfg);

nlohmann::json load_json_file(const std::string& path);

}  // namespace lazyb
