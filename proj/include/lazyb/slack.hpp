#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "lazyb/model_graph.hpp"
#include "lazyb/traffic.hpp"

namespace lazyb {

struct CatalogEntry;

/// How T_wait is measured for a request that is already executing.
enum class WaitBasis {
  FirstIssue,  // arrival -> first issue (initial queueing only)
  Now,         // arrival -> now (everything that has elapsed so far)
};

struct SlackConfig {
  Micros sla_target_us = 100'000;
  /// Explicit decoder unroll used by the predictor for every model. When
  /// unset, the catalog's per-model value or the coverage threshold is used.
  std::optional<std::uint32_t> dec_timesteps;
  double coverage_n = 0.90;
  /// Subtract work a request has already completed from its estimate.
  bool credit_progress = false;
  WaitBasis wait_basis = WaitBasis::Now;
};

struct SlackEstimate {
  Micros slack_us = 0;
  Micros t_wait_us = 0;
  Micros predicted_exec_us = 0;
};

/// Smallest profiled length L with CDF(L) >= n.
std::uint32_t coverage_threshold(const LengthDistribution& dist, double n);

/// Graph-wide single-input latency: static nodes once, encoder nodes
/// enc_t times, decoder nodes dec_t times, all at batch size 1.
Micros single_input_exec_time(const ModelGraph& model, std::uint32_t enc_t, std::uint32_t dec_t);

/// Single-input latency of the work left from `next` onward (inclusive),
/// assuming the decoder runs for max(dec_t, current decoder step + 1) steps.
Micros remaining_single_exec_time(const ModelGraph& model, const NodeCursor& next,
                                  std::uint32_t enc_t, std::uint32_t dec_t);

/// slack = SLA - (T_wait + sum(exec_times)). With one element this is the
/// unbatched form; with N elements the batch is costed as N inputs run
/// back to back.
SlackEstimate slack(const SlackConfig& cfg, Micros t_wait_us, std::span<const Micros> exec_times_us);

/// Decoder length the predictor assumes for `entry`'s model.
std::uint32_t predicted_dec_timesteps(const CatalogEntry& entry, const SlackConfig& cfg);

}  // namespace lazyb
