#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lazyb/batch_state_table.hpp"
#include "lazyb/catalog.hpp"
#include "lazyb/slack.hpp"

namespace lazyb {

enum class PolicyKind { Serial, GraphB, Cellular, LazyB, Oracle };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& s);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::LazyB;
  Micros window_us = 0;  // GraphB / Cellular batching time-window
  std::uint32_t max_batch = 64;
  SlackConfig slack;
  /// Oracle only: cost the future with true decoder lengths instead of the
  /// predictor's dec_timesteps.
  bool oracle_true_lengths = false;
  /// Extra accelerator time charged whenever an active batch is preempted.
  Micros preempt_overhead_us = 0;

  /// Human-readable label, e.g. "GraphB(95)" or "LazyB".
  std::string label() const;
  void validate() const;
};

/// A request waiting in the inference queue.
struct PendingRequest {
  RequestId id = 0;
  Micros arrival_us = 0;
  const CatalogEntry* model = nullptr;
  std::uint32_t actual_dec = 1;
};

/// Bookkeeping the schedulers may read about in-flight requests.
struct RequestTiming {
  Micros arrival_us = 0;
  std::optional<Micros> first_issue_us;
  std::uint32_t actual_dec = 1;
};

struct Decision {
  enum class Kind { Dispatch, AdmitLazy, Wait };
  Kind kind = Kind::Wait;
  std::vector<RequestId> request_ids;
  NodeCursor start;

  // Diagnostics for admission auditing; set by the slack-aware policies.
  std::optional<Micros> min_slack_us;
  std::optional<Micros> predicted_exec_us;
  std::optional<Micros> conservative_exec_us;

  static Decision wait() { return {}; }
};

/// Everything a policy sees when it is consulted. Policies are only asked at
/// node boundaries or while the accelerator is idle.
struct SchedulerView {
  Micros now = 0;
  bool processor_idle = true;  // no node running and the table is empty
  const std::deque<PendingRequest>& queue;
  const BatchStateTable& bst;
  std::span<const RequestTiming> requests;  // indexed by RequestId
  const Catalog& catalog;
};

Decision serial_decide(const std::deque<PendingRequest>& queue, bool processor_idle);

/// Dispatches the oldest min(|queue|, max_batch) requests once the processor
/// is idle and either the queue holds max_batch requests or the window
/// anchored at the oldest arrival has elapsed.
Decision graphb_decide(const std::deque<PendingRequest>& queue, Micros now, bool processor_idle,
                       std::optional<Micros> window_anchor, const PolicyConfig& cfg);

/// Graph batching plus joining: at a node boundary, queued requests whose
/// first cell shares weights with the active batch's next cell join it.
Decision cellular_decide(const SchedulerView& view, const PolicyConfig& cfg);

/// Slack of the prospective set (table members plus the first `k`
/// candidates) under the conservative summed single-input estimate.
struct SlackAudit {
  Micros min_slack_us = 0;
  Micros max_t_wait_us = 0;
  Micros predicted_exec_us = 0;
};

/// Maps a prospective admission to the execution time the predictor charges.
class ExecEstimator {
 public:
  virtual ~ExecEstimator() = default;
  /// Execution time charged for the table plus the first `k` queue entries.
  virtual Micros estimate(const SchedulerView& view, std::size_t k,
                          const PolicyConfig& cfg) const = 0;
};

/// Sum of every member's single-input time (the conservative estimate).
class ConservativeEstimator final : public ExecEstimator {
 public:
  Micros estimate(const SchedulerView& view, std::size_t k, const PolicyConfig& cfg) const override;
};

/// Exact time to drain the merged set using the cost model's batched
/// latencies.
class OracleEstimator final : public ExecEstimator {
 public:
  Micros estimate(const SchedulerView& view, std::size_t k, const PolicyConfig& cfg) const override;
};

SlackAudit audit_admission(const SchedulerView& view, std::size_t k, const PolicyConfig& cfg,
                           const ExecEstimator& estimator);

/// Lazy batching: dispatch immediately on an idle processor; otherwise admit
/// the largest queue prefix that keeps every affected request's slack
/// non-negative within max_batch.
Decision lazyb_decide(const SchedulerView& view, const PolicyConfig& cfg,
                      const ExecEstimator& estimator);

/// LazyB control flow with the exact drain-time estimate.
Decision oracle_decide(const SchedulerView& view, const PolicyConfig& cfg);

/// Common interface the engine drives.
class Policy {
 public:
  explicit Policy(PolicyConfig cfg) : cfg_(std::move(cfg)) {}
  virtual ~Policy() = default;

  virtual Decision decide(const SchedulerView& view) const = 0;
  /// Next time at which the policy wants to be consulted even if nothing
  /// else happens (the batching window expiry), if any.
  virtual std::optional<Micros> next_timer(const SchedulerView&) const { return std::nullopt; }
  /// Whether cellular-batchable entries share node executions.
  virtual bool co_schedule_cells() const { return false; }

  const PolicyConfig& config() const { return cfg_; }

 protected:
  PolicyConfig cfg_;
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg);

/// Number of queue entries, from the front, that target the same model as
/// the first one.
std::size_t same_model_prefix(const std::deque<PendingRequest>& queue, std::size_t limit);

}  // namespace lazyb
