#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lazyb/engine.hpp"

namespace lazyb {

/// Nearest-rank percentile: element ceil(p*n)-1 of the sorted list.
Micros percentile(std::span<const Micros> latencies, double p);

struct RunSummary {
  std::string policy;
  double rate_qps = 0.0;
  std::uint64_t seed = 0;
  double avg_latency_us = 0.0;
  Micros p25_latency_us = 0;
  Micros p50_latency_us = 0;
  Micros p75_latency_us = 0;
  Micros p99_latency_us = 0;
  double throughput_rps = 0.0;
  double sla_violation_rate = 0.0;
  std::size_t request_count = 0;
};

RunSummary summarize(std::span<const RequestRecord> records, Micros sla_target_us,
                     Micros horizon_us);
RunSummary summarize(const SimResult& result);

/// Sorted unique latencies with their empirical cumulative fractions.
std::vector<std::pair<Micros, double>> cdf(std::span<const Micros> latencies);

std::vector<Micros> latencies_of(std::span<const RequestRecord> records);

/// mean / p25 / p75 of one metric across runs.
struct Spread {
  double mean = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};

/// Order-independent: the values are sorted before anything is computed.
Spread spread(std::vector<double> values);

struct AggregateRow {
  std::string axis;  // "rate_qps", "sla_target_us" or "window_us"
  double axis_value = 0.0;
  std::string policy;
  std::size_t runs = 0;
  Spread avg_latency_us, p50_latency_us, p99_latency_us, throughput_rps, sla_violation_rate;
};

AggregateRow aggregate(std::string axis, double axis_value, std::string policy,
                       std::span<const RunSummary> runs);

void write_summary_csv(std::ostream& out, std::span<const RunSummary> rows);
void write_cdf_csv(std::ostream& out, const std::vector<std::pair<Micros, double>>& points);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);

}  // namespace lazyb
