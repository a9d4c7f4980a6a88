#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lazyb/batch_state_table.hpp"
#include "lazyb/catalog.hpp"
#include "lazyb/execution.hpp"
#include "lazyb/policy.hpp"
#include "lazyb/traffic.hpp"

namespace lazyb {

struct RunMeta {
  std::uint64_t seed = 0;
  double rate_qps = 0.0;
  Micros duration_us = 0;
};

struct RequestRecord {
  std::uint64_t id = 0;
  std::string model;
  Micros arrival_us = 0;
  Micros first_issue_us = 0;
  Micros complete_us = 0;
  Micros latency_us = 0;
  bool sla_violated = false;
  std::uint32_t max_observed_batch = 0;
  std::uint32_t actual_dec_timesteps = 1;
  /// SLA - (arrival-to-admission wait + charged execution time), when the
  /// policy reported an estimate at admission.
  std::optional<Micros> admission_slack_us;
};

/// One dispatch or lazy admission, with the slack diagnostics the policy
/// reported (absent for the slack-unaware policies).
struct AdmissionRecord {
  Micros time_us = 0;
  bool lazy = false;
  std::vector<RequestId> requests;  // indices into SimResult::requests
  std::optional<Micros> min_slack_us;
  std::optional<Micros> predicted_exec_us;
  std::optional<Micros> conservative_exec_us;
};

struct SimResult {
  PolicyConfig policy;
  RunMeta meta;
  std::vector<RequestRecord> requests;  // trace order
  std::vector<AdmissionRecord> admissions;
  Micros busy_us = 0;
  Micros makespan_us = 0;
  std::uint64_t node_instances = 0;
  std::size_t max_depth = 0;
};

/// Incremental simulator. run() is the usual entry point; the class form lets
/// tests inspect the state between events.
class Engine {
 public:
  Engine(const Catalog& catalog, const std::vector<InferenceRequest>& trace, PolicyConfig cfg,
         RunMeta meta = {}, EventLog* log = nullptr);

  /// Processes every event at the next event time. Returns false once
  /// drained.
  bool step();
  void run_to_end();

  /// True iff nothing is queued, nothing is in the table, nothing is running
  /// and no arrivals remain.
  bool drain_check() const;

  Micros now() const { return now_; }
  bool node_running() const { return running_.has_value(); }
  const BatchStateTable& bst() const { return bst_; }
  std::size_t queued() const { return queue_.size(); }

  SimResult take_result();

 private:
  std::optional<Micros> next_event_time() const;
  void consult_policy();
  void start_node();
  void complete_node();

  const Catalog& catalog_;
  const std::vector<InferenceRequest>& trace_;
  std::unique_ptr<Policy> policy_;
  EventLog* log_;

  std::vector<const CatalogEntry*> models_;
  std::vector<RequestTiming> timing_;
  SimResult result_;
  std::deque<PendingRequest> queue_;
  BatchStateTable bst_;
  std::size_t next_arrival_ = 0;
  Micros now_ = 0;
  std::optional<Micros> timer_;
  Micros pending_overhead_ = 0;

  struct Running {
    StepPlan plan;
    Micros end_us;
  };
  std::optional<Running> running_;
};

SimResult run(const Catalog& catalog, const std::vector<InferenceRequest>& trace,
              const PolicyConfig& cfg, const RunMeta& meta = {}, EventLog* log = nullptr);

void write_result_csv(std::ostream& out, const SimResult& result);
void write_result_csv(const std::string& path, const SimResult& result);

/// Reads back the per-request columns of a result CSV.
std::vector<RequestRecord> read_result_csv(std::istream& in);
std::vector<RequestRecord> read_result_csv(const std::string& path);

}  // namespace lazyb
