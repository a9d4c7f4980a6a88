#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lazyb/catalog.hpp"
#include "lazyb/metrics.hpp"
#include "lazyb/policy.hpp"

namespace lazyb {

enum class SweepAxis { Rate, Sla, Window };

std::string to_string(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::Rate;
  std::vector<double> values;
  std::vector<PolicyConfig> policies;
  std::uint32_t runs_per_point = 20;
  std::uint64_t base_seed = 1;
  std::string model;
  Micros duration_us = 5'000'000;
  // Fixed load for the SLA and window axes.
  double rate_qps = 0.0;
  // 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate(const Catalog& catalog) const;
};

/// JSON form:
/// {"model": "resnet", "duration_us": 5000000, "runs_per_point": 20,
///  "base_seed": 1, "rate_qps": 1000,
///  "axis": {"kind": "rate_qps" | "sla_target_us" | "window_us", "values": [...]},
///  "policies": [{"kind": "graphb", "window_us": 95000}, ...]}
SweepSpec parse_sweep_spec(const nlohmann::json& j);

/// Per-run summaries of one (axis point, policy) cell, ordered by seed.
struct SweepCell {
  double axis_value = 0.0;
  std::size_t policy_index = 0;
  std::vector<RunSummary> runs;
};

/// Runs every (axis point x policy x seed) simulation. Cells come back in
/// spec order regardless of how the work was scheduled. Simulations whose
/// outcome cannot depend on the axis value are run once and re-summarized.
std::vector<SweepCell> run_sweep_cells(const SweepSpec& spec, const Catalog& catalog);

std::vector<AggregateRow> run_sweep(const SweepSpec& spec, const Catalog& catalog);

/// Policy config actually simulated for one axis point.
PolicyConfig config_at(const SweepSpec& spec, std::size_t policy_index, double axis_value);

}  // namespace lazyb
