#include "lazyb/policy.hpp"

#include <algorithm>
#include <unordered_map>

#include "lazyb/execution.hpp"

namespace lazyb {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Serial: return "serial";
    case PolicyKind::GraphB: return "graphb";
    case PolicyKind::Cellular: return "cellular";
    case PolicyKind::LazyB: return "lazyb";
    case PolicyKind::Oracle: return "oracle";
  }
  return "?";
}

PolicyKind parse_policy_kind(const std::string& s) {
  if (s == "serial") return PolicyKind::Serial;
  if (s == "graphb") return PolicyKind::GraphB;
  if (s == "cellular") return PolicyKind::Cellular;
  if (s == "lazyb") return PolicyKind::LazyB;
  if (s == "oracle") return PolicyKind::Oracle;
  throw ValidationError("unknown policy kind '" + s + "'");
}

namespace {

std::string window_label(Micros w) {
  if (w % 1000 == 0) return std::to_string(w / 1000);
  return std::to_string(w) + "us";
}

}  // namespace

std::string PolicyConfig::label() const {
  switch (kind) {
    case PolicyKind::Serial: return "Serial";
    case PolicyKind::GraphB: return "GraphB(" + window_label(window_us) + ")";
    case PolicyKind::Cellular: return "Cellular(" + window_label(window_us) + ")";
    case PolicyKind::LazyB: return "LazyB";
    case PolicyKind::Oracle: return "Oracle";
  }
  return "?";
}

void PolicyConfig::validate() const {
  require(max_batch >= 1, "policy: max_batch must be >= 1");
  if (kind == PolicyKind::GraphB || kind == PolicyKind::Cellular) {
    require(window_us >= 1, "policy: window_us must be >= 1 for " + to_string(kind));
  }
  require(slack.sla_target_us >= 1, "policy: sla_target_us must be >= 1");
  require(slack.coverage_n > 0.0 && slack.coverage_n <= 1.0, "policy: coverage_n must be in (0, 1]");
  require(!slack.dec_timesteps || *slack.dec_timesteps >= 1, "policy: dec_timesteps must be >= 1");
  require(preempt_overhead_us >= 0, "policy: preempt_overhead_us must be >= 0");
}

std::size_t same_model_prefix(const std::deque<PendingRequest>& queue, std::size_t limit) {
  std::size_t k = 0;
  while (k < queue.size() && k < limit && queue[k].model == queue.front().model) ++k;
  return k;
}

namespace {

Decision make(Decision::Kind kind, const std::deque<PendingRequest>& queue, std::size_t k) {
  Decision d;
  d.kind = kind;
  d.request_ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) d.request_ids.push_back(queue[i].id);
  d.start = NodeCursor{0, 0};
  return d;
}

Micros t_wait_of_member(const SchedulerView& view, RequestId id, const SlackConfig& cfg) {
  const auto& r = view.requests[id];
  if (cfg.wait_basis == WaitBasis::Now || !r.first_issue_us) return view.now - r.arrival_us;
  return *r.first_issue_us - r.arrival_us;
}

}  // namespace

Decision serial_decide(const std::deque<PendingRequest>& queue, bool processor_idle) {
  if (!processor_idle || queue.empty()) return Decision::wait();
  return make(Decision::Kind::Dispatch, queue, 1);
}

Decision graphb_decide(const std::deque<PendingRequest>& queue, Micros now, bool processor_idle,
                       std::optional<Micros> window_anchor, const PolicyConfig& cfg) {
  if (!processor_idle || queue.empty()) return Decision::wait();
  const bool size_trigger = queue.size() >= cfg.max_batch;
  const bool window_trigger = window_anchor && now - *window_anchor >= cfg.window_us;
  if (!size_trigger && !window_trigger) return Decision::wait();
  return make(Decision::Kind::Dispatch, queue, same_model_prefix(queue, cfg.max_batch));
}

Decision cellular_decide(const SchedulerView& view, const PolicyConfig& cfg) {
  if (view.processor_idle) {
    return graphb_decide(view.queue, view.now, true,
                         view.queue.empty() ? std::nullopt
                                            : std::optional<Micros>(view.queue.front().arrival_us),
                         cfg);
  }
  const SubBatchEntry* top = view.bst.active();
  if (top == nullptr || view.queue.empty()) return Decision::wait();
  const CatalogEntry* model = view.queue.front().model;
  if (model->graph.name() != top->model_name) return Decision::wait();
  if (view.bst.in_flight() >= cfg.max_batch) return Decision::wait();
  if (!cellular_batchable(model->graph.first_cursor(), model->graph, top->next, model->graph)) {
    return Decision::wait();
  }
  const std::size_t k = same_model_prefix(view.queue, cfg.max_batch - view.bst.in_flight());
  return make(Decision::Kind::AdmitLazy, view.queue, k);
}

Micros ConservativeEstimator::estimate(const SchedulerView& view, std::size_t k,
                                       const PolicyConfig& cfg) const {
  Micros sum = 0;
  for (const auto& e : view.bst.entries()) {
    const CatalogEntry& ce = view.catalog.at(e.model_name);
    const std::uint32_t dec = predicted_dec_timesteps(ce, cfg.slack);
    const Micros per = cfg.slack.credit_progress
                           ? remaining_single_exec_time(ce.graph, e.next, ce.graph.enc_timesteps(), dec)
                           : single_input_exec_time(ce.graph, ce.graph.enc_timesteps(), dec);
    sum += per * static_cast<Micros>(e.size());
  }
  for (std::size_t i = 0; i < k; ++i) {
    const CatalogEntry& ce = *view.queue[i].model;
    sum += single_input_exec_time(ce.graph, ce.graph.enc_timesteps(),
                                  predicted_dec_timesteps(ce, cfg.slack));
  }
  return sum;
}

Micros OracleEstimator::estimate(const SchedulerView& view, std::size_t k,
                                 const PolicyConfig& cfg) const {
  BatchStateTable sim = view.bst;
  sim.set_log(nullptr);
  std::unordered_map<RequestId, std::uint32_t> lengths;
  auto predicted_len = [&](const CatalogEntry& ce, const NodeCursor& at) -> std::uint32_t {
    const std::uint32_t dec = predicted_dec_timesteps(ce, cfg.slack);
    const ModelGraph& g = ce.graph;
    if (g.is_dynamic() && at.node_id >= g.dec_begin() && at.node_id < g.dec_end()) {
      return std::max(dec, at.timestep + 1);
    }
    return dec;
  };
  for (const auto& e : view.bst.entries()) {
    const CatalogEntry& ce = view.catalog.at(e.model_name);
    for (RequestId id : e.request_ids) {
      lengths[id] = cfg.oracle_true_lengths ? view.requests[id].actual_dec : predicted_len(ce, e.next);
    }
  }
  if (k > 0) {
    std::vector<RequestId> ids;
    const CatalogEntry& ce = *view.queue.front().model;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& p = view.queue[i];
      ids.push_back(p.id);
      lengths[p.id] = cfg.oracle_true_lengths ? p.actual_dec : predicted_len(ce, ce.graph.first_cursor());
    }
    sim.push(std::move(ids), ce.graph.first_cursor(), ce.graph.name());
  }
  return drain_time(std::move(sim), view.catalog,
                    [&lengths](RequestId id) { return lengths.at(id); });
}

SlackAudit audit_admission(const SchedulerView& view, std::size_t k, const PolicyConfig& cfg,
                           const ExecEstimator& estimator) {
  SlackAudit a;
  for (const auto& e : view.bst.entries()) {
    for (RequestId id : e.request_ids) {
      a.max_t_wait_us = std::max(a.max_t_wait_us, t_wait_of_member(view, id, cfg.slack));
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    a.max_t_wait_us = std::max(a.max_t_wait_us, view.now - view.queue[i].arrival_us);
  }
  a.predicted_exec_us = estimator.estimate(view, k, cfg);
  a.min_slack_us = cfg.slack.sla_target_us - (a.max_t_wait_us + a.predicted_exec_us);
  return a;
}

Decision lazyb_decide(const SchedulerView& view, const PolicyConfig& cfg,
                      const ExecEstimator& estimator) {
  if (view.queue.empty()) return Decision::wait();
  static const ConservativeEstimator conservative;

  auto annotate = [&](Decision d, std::size_t k, const SlackAudit& a) {
    d.min_slack_us = a.min_slack_us;
    d.predicted_exec_us = a.predicted_exec_us;
    d.conservative_exec_us = &estimator == &conservative
                                 ? a.predicted_exec_us
                                 : conservative.estimate(view, k, cfg);
    return d;
  };

  if (view.processor_idle) {
    // No window: whatever is queued goes out now.
    const std::size_t k = same_model_prefix(view.queue, cfg.max_batch);
    return annotate(make(Decision::Kind::Dispatch, view.queue, k), k,
                    audit_admission(view, k, cfg, estimator));
  }
  if (view.bst.in_flight() >= cfg.max_batch) return Decision::wait();
  const std::size_t kmax = same_model_prefix(view.queue, cfg.max_batch - view.bst.in_flight());

  // Slack only shrinks as the prefix grows, so search for the largest
  // admissible prefix.
  std::size_t lo = 0, hi = kmax;
  std::optional<SlackAudit> best;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    const SlackAudit a = audit_admission(view, mid, cfg, estimator);
    if (a.min_slack_us >= 0) {
      lo = mid;
      best = a;
    } else {
      hi = mid - 1;
    }
  }
  if (lo == 0) return Decision::wait();
  return annotate(make(Decision::Kind::AdmitLazy, view.queue, lo), lo, *best);
}

Decision oracle_decide(const SchedulerView& view, const PolicyConfig& cfg) {
  static const OracleEstimator oracle;
  return lazyb_decide(view, cfg, oracle);
}

namespace {

std::optional<Micros> window_timer(const SchedulerView& view, const PolicyConfig& cfg) {
  if (!view.processor_idle || view.queue.empty()) return std::nullopt;
  const Micros expiry = view.queue.front().arrival_us + cfg.window_us;
  if (expiry <= view.now) return std::nullopt;
  return expiry;
}

class SerialPolicy final : public Policy {
 public:
  using Policy::Policy;
  Decision decide(const SchedulerView& v) const override {
    return serial_decide(v.queue, v.processor_idle);
  }
};

class GraphBPolicy final : public Policy {
 public:
  using Policy::Policy;
  Decision decide(const SchedulerView& v) const override {
    std::optional<Micros> anchor;
    if (!v.queue.empty()) anchor = v.queue.front().arrival_us;
    return graphb_decide(v.queue, v.now, v.processor_idle, anchor, cfg_);
  }
  std::optional<Micros> next_timer(const SchedulerView& v) const override {
    return window_timer(v, cfg_);
  }
};

class CellularPolicy final : public Policy {
 public:
  using Policy::Policy;
  Decision decide(const SchedulerView& v) const override { return cellular_decide(v, cfg_); }
  std::optional<Micros> next_timer(const SchedulerView& v) const override {
    return window_timer(v, cfg_);
  }
  bool co_schedule_cells() const override { return true; }
};

class LazyBPolicy final : public Policy {
 public:
  using Policy::Policy;
  Decision decide(const SchedulerView& v) const override {
    return lazyb_decide(v, cfg_, estimator_);
  }

 private:
  ConservativeEstimator estimator_;
};

class OraclePolicy final : public Policy {
 public:
  using Policy::Policy;
  Decision decide(const SchedulerView& v) const override { return oracle_decide(v, cfg_); }
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case PolicyKind::Serial: return std::make_unique<SerialPolicy>(cfg);
    case PolicyKind::GraphB: return std::make_unique<GraphBPolicy>(cfg);
    case PolicyKind::Cellular: return std::make_unique<CellularPolicy>(cfg);
    case PolicyKind::LazyB: return std::make_unique<LazyBPolicy>(cfg);
    case PolicyKind::Oracle: return std::make_unique<OraclePolicy>(cfg);
  }
  throw ValidationError("unknown policy kind");
}

}  // namespace lazyb
