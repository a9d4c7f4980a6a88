#include "lazyb/config.hpp"

#include <fstream>
#include <set>

namespace lazyb {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

namespace {

template <typename T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("policy config '") + key + "': " + e.what());
  }
}

}  // namespace

PolicyConfig parse_policy_config(const nlohmann::json& root) {
  const nlohmann::json& j = root.contains("policy") ? root.at("policy") : root;
  require(j.is_object(), "policy config must be a JSON object");
  static const std::set<std::string> known = {
      "kind", "window_us", "max_batch", "sla_target_us", "dec_timesteps", "coverage_n",
      "credit_progress", "wait_basis", "oracle_true_lengths", "preempt_overhead_us"};
  for (const auto& [k, v] : j.items()) {
    require(known.contains(k), "policy config: unknown key '" + k + "'");
  }
  require(j.contains("kind"), "policy config: 'kind' is required");

  PolicyConfig cfg;
  cfg.kind = parse_policy_kind(get_as<std::string>(j, "kind"));
  if (j.contains("window_us")) cfg.window_us = get_as<Micros>(j, "window_us");
  if (j.contains("max_batch")) {
    const auto mb = get_as<std::int64_t>(j, "max_batch");
    require(mb >= 1 && mb <= 1'000'000, "policy config: max_batch out of range");
    cfg.max_batch = static_cast<std::uint32_t>(mb);
  }
  if (j.contains("sla_target_us")) cfg.slack.sla_target_us = get_as<Micros>(j, "sla_target_us");
  if (j.contains("dec_timesteps")) {
    const auto d = get_as<std::int64_t>(j, "dec_timesteps");
    require(d >= 1 && d <= 1'000'000, "policy config: dec_timesteps out of range");
    cfg.slack.dec_timesteps = static_cast<std::uint32_t>(d);
  }
  if (j.contains("coverage_n")) cfg.slack.coverage_n = get_as<double>(j, "coverage_n");
  if (j.contains("credit_progress")) cfg.slack.credit_progress = get_as<bool>(j, "credit_progress");
  if (j.contains("wait_basis")) {
    const auto w = get_as<std::string>(j, "wait_basis");
    if (w == "first_issue") {
      cfg.slack.wait_basis = WaitBasis::FirstIssue;
    } else if (w == "now") {
      cfg.slack.wait_basis = WaitBasis::Now;
    } else {
      throw ValidationError("policy config: wait_basis must be 'first_issue' or 'now'");
    }
  }
  if (j.contains("oracle_true_lengths")) {
    cfg.oracle_true_lengths = get_as<bool>(j, "oracle_true_lengths");
  }
  if (j.contains("preempt_overhead_us")) {
    cfg.preempt_overhead_us = get_as<Micros>(j, "preempt_overhead_us");
  }
  cfg.validate();
  return cfg;
}

PolicyConfig load_policy_config(const std::string& path) {
  return parse_policy_config(load_json_file(path));
}

nlohmann::json to_json(const PolicyConfig& cfg) {
  nlohmann::json j;
  j["kind"] = to_string(cfg.kind);
  j["window_us"] = cfg.window_us;
  j["max_batch"] = cfg.max_batch;
  j["sla_target_us"] = cfg.slack.sla_target_us;
  if (cfg.slack.dec_timesteps) j["dec_timesteps"] = *cfg.slack.dec_timesteps;
  j["coverage_n"] = cfg.slack.coverage_n;
  j["credit_progress"] = cfg.slack.credit_progress;
  j["wait_basis"] = cfg.slack.wait_basis == WaitBasis::Now ? "now" : "first_issue";
  j["oracle_true_lengths"] = cfg.oracle_true_lengths;
  j["preempt_overhead_us"] = cfg.preempt_overhead_us;
  return j;
}

}  // namespace lazyb
