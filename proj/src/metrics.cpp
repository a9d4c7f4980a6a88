#include "lazyb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

namespace lazyb {

Micros percentile(std::span<const Micros> latencies, double p) {
  require(!latencies.empty(), "percentile of an empty list");
  require(p >= 0.0 && p <= 1.0, "percentile p must be in [0, 1]");
  std::vector<Micros> v(latencies.begin(), latencies.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<std::int64_t>(v.size());
  auto idx = static_cast<std::int64_t>(std::ceil(p * static_cast<double>(n))) - 1;
  idx = std::clamp<std::int64_t>(idx, 0, n - 1);
  return v[static_cast<std::size_t>(idx)];
}

std::vector<Micros> latencies_of(std::span<const RequestRecord> records) {
  std::vector<Micros> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.latency_us);
  return out;
}

RunSummary summarize(std::span<const RequestRecord> records, Micros sla_target_us,
                     Micros horizon_us) {
  require(!records.empty(), "summarize: empty result");
  require(horizon_us > 0, "summarize: horizon must be positive");
  const auto lat = latencies_of(records);
  RunSummary s;
  s.request_count = records.size();
  double sum = 0.0;
  std::size_t violated = 0, within = 0;
  for (const auto& r : records) {
    sum += static_cast<double>(r.latency_us);
    if (r.latency_us > sla_target_us) ++violated;
    if (r.complete_us <= horizon_us) ++within;
  }
  const double n = static_cast<double>(records.size());
  s.avg_latency_us = sum / n;
  s.p25_latency_us = percentile(lat, 0.25);
  s.p50_latency_us = percentile(lat, 0.50);
  s.p75_latency_us = percentile(lat, 0.75);
  s.p99_latency_us = percentile(lat, 0.99);
  s.throughput_rps = static_cast<double>(within) / (static_cast<double>(horizon_us) / 1e6);
  s.sla_violation_rate = static_cast<double>(violated) / n;
  return s;
}

RunSummary summarize(const SimResult& result) {
  RunSummary s = summarize(result.requests, result.policy.slack.sla_target_us,
                           result.meta.duration_us);
  s.policy = result.policy.label();
  s.rate_qps = result.meta.rate_qps;
  s.seed = result.meta.seed;
  return s;
}

std::vector<std::pair<Micros, double>> cdf(std::span<const Micros> latencies) {
  require(!latencies.empty(), "cdf of an empty list");
  std::vector<Micros> v(latencies.begin(), latencies.end());
  std::sort(v.begin(), v.end());
  std::vector<std::pair<Micros, double>> out;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.emplace_back(v[i], i + 1 == v.size() ? 1.0 : static_cast<double>(i + 1) / n);
  }
  return out;
}

Spread spread(std::vector<double> values) {
  require(!values.empty(), "spread of an empty list");
  std::sort(values.begin(), values.end());
  // Sorted first so the sum does not depend on run order.
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  auto rank = [&values](double p) {
    const auto n = static_cast<std::int64_t>(values.size());
    auto idx = static_cast<std::int64_t>(std::ceil(p * static_cast<double>(n))) - 1;
    return values[static_cast<std::size_t>(std::clamp<std::int64_t>(idx, 0, n - 1))];
  };
  return Spread{total / static_cast<double>(values.size()), rank(0.25), rank(0.75)};
}

AggregateRow aggregate(std::string axis, double axis_value, std::string policy,
                       std::span<const RunSummary> runs) {
  require(!runs.empty(), "aggregate of zero runs");
  AggregateRow row;
  row.axis = std::move(axis);
  row.axis_value = axis_value;
  row.policy = std::move(policy);
  row.runs = runs.size();
  auto field = [&runs](auto get) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const auto& r : runs) v.push_back(static_cast<double>(get(r)));
    return spread(std::move(v));
  };
  row.avg_latency_us = field([](const RunSummary& r) { return r.avg_latency_us; });
  row.p50_latency_us = field([](const RunSummary& r) { return r.p50_latency_us; });
  row.p99_latency_us = field([](const RunSummary& r) { return r.p99_latency_us; });
  row.throughput_rps = field([](const RunSummary& r) { return r.throughput_rps; });
  row.sla_violation_rate = field([](const RunSummary& r) { return r.sla_violation_rate; });
  return row;
}

void write_summary_csv(std::ostream& out, std::span<const RunSummary> rows) {
  out << "policy,rate_qps,seed,avg_latency_us,p25_latency_us,p50_latency_us,p75_latency_us,"
         "p99_latency_us,throughput_rps,sla_violation_rate,request_count\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.3f},{},{},{},{},{:.3f},{:.6f},{}\n", r.policy, r.rate_qps,
                       r.seed, r.avg_latency_us, r.p25_latency_us, r.p50_latency_us,
                       r.p75_latency_us, r.p99_latency_us, r.throughput_rps,
                       r.sla_violation_rate, r.request_count);
  }
}

void write_cdf_csv(std::ostream& out, const std::vector<std::pair<Micros, double>>& points) {
  out << "latency_us,cumulative_fraction\n";
  for (const auto& [lat, frac] : points) out << fmt::format("{},{:.6f}\n", lat, frac);
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "axis,axis_value,policy,runs";
  for (const char* m : {"avg_latency_us", "p50_latency_us", "p99_latency_us", "throughput_rps",
                        "sla_violation_rate"}) {
    out << ',' << m << "_mean," << m << "_p25," << m << "_p75";
  }
  out << '\n';
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{}", r.axis, r.axis_value, r.policy, r.runs);
    for (const Spread* s : {&r.avg_latency_us, &r.p50_latency_us, &r.p99_latency_us,
                            &r.throughput_rps, &r.sla_violation_rate}) {
      out << fmt::format(",{:.6f},{:.6f},{:.6f}", s->mean, s->p25, s->p75);
    }
    out << '\n';
  }
}

}  // namespace lazyb
