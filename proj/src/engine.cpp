#include "lazyb/engine.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "lazyb/execution.hpp"

namespace lazyb {

Engine::Engine(const Catalog& catalog, const std::vector<InferenceRequest>& trace, PolicyConfig cfg,
               RunMeta meta, EventLog* log)
    : catalog_(catalog), trace_(trace), policy_(make_policy(cfg)), log_(log), bst_(log) {
  require(trace.size() < std::numeric_limits<RequestId>::max(), "trace too long");
  result_.policy = std::move(cfg);
  result_.meta = meta;
  models_.reserve(trace.size());
  timing_.reserve(trace.size());
  result_.requests.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    const CatalogEntry* m = catalog.find(r.model);
    require(m != nullptr, "trace row " + std::to_string(i) + ": unknown model '" + r.model + "'");
    require(i == 0 || trace[i - 1].arrival_us <= r.arrival_us,
            "trace row " + std::to_string(i) + ": arrivals must be sorted");
    require(r.arrival_us >= 0, "trace row " + std::to_string(i) + ": negative arrival");
    if (m->graph.is_dynamic()) {
      require(r.actual_dec_timesteps >= 1 && r.actual_dec_timesteps <= m->graph.max_dec_timesteps(),
              "trace row " + std::to_string(i) + ": decoder length out of range");
    }
    const std::uint32_t dec = m->graph.effective_dec(r.actual_dec_timesteps);
    models_.push_back(m);
    timing_.push_back(RequestTiming{r.arrival_us, std::nullopt, dec});
    RequestRecord rec;
    rec.id = r.id;
    rec.model = r.model;
    rec.arrival_us = r.arrival_us;
    rec.actual_dec_timesteps = dec;
    result_.requests.push_back(std::move(rec));
  }
}

std::optional<Micros> Engine::next_event_time() const {
  std::optional<Micros> t;
  auto take = [&t](Micros c) {
    if (!t || c < *t) t = c;
  };
  if (next_arrival_ < trace_.size()) take(trace_[next_arrival_].arrival_us);
  if (running_) take(running_->end_us);
  if (timer_) take(*timer_);
  return t;
}

bool Engine::step() {
  const auto t = next_event_time();
  if (!t) return false;
  ensure(*t >= now_, "event time went backwards");
  now_ = *t;
  if (log_) log_->set_time(now_);

  while (next_arrival_ < trace_.size() && trace_[next_arrival_].arrival_us == now_) {
    const auto id = static_cast<RequestId>(next_arrival_);
    queue_.push_back(PendingRequest{id, trace_[id].arrival_us, models_[id], timing_[id].actual_dec});
    ++next_arrival_;
  }
  if (running_ && running_->end_us == now_) complete_node();
  if (timer_ && *timer_ <= now_) timer_.reset();
  if (!running_) consult_policy();
  return true;
}

void Engine::run_to_end() {
  while (step()) {
  }
  ensure(drain_check(), "simulation stopped with work outstanding");
}

bool Engine::drain_check() const {
  return queue_.empty() && bst_.empty() && !running_ && next_arrival_ == trace_.size();
}

void Engine::consult_policy() {
  const SchedulerView view{now_, bst_.empty(), queue_, bst_, timing_, catalog_};
  Decision d = policy_->decide(view);
  if (d.kind != Decision::Kind::Wait) {
    ensure(!d.request_ids.empty() && d.request_ids.size() <= queue_.size(),
           "policy returned an empty or oversized admission");
    const CatalogEntry* model = queue_.front().model;
    for (std::size_t i = 0; i < d.request_ids.size(); ++i) {
      ensure(queue_[i].id == d.request_ids[i] && queue_[i].model == model,
             "policy admission is not a same-model queue prefix");
    }
    const bool preempting = !bst_.empty();
    ensure(d.kind == Decision::Kind::AdmitLazy || !preempting,
           "dispatch while the batch state table is busy");
    queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(d.request_ids.size()));

    for (RequestId id : d.request_ids) {
      timing_[id].first_issue_us = now_;
      result_.requests[id].first_issue_us = now_;
      if (d.predicted_exec_us) {
        result_.requests[id].admission_slack_us = result_.policy.slack.sla_target_us -
                                                  (now_ - timing_[id].arrival_us + *d.predicted_exec_us);
      }
    }
    bst_.push(d.request_ids, d.start, model->graph.name());
    result_.max_depth = std::max(result_.max_depth, bst_.depth());
    if (preempting) pending_overhead_ += result_.policy.preempt_overhead_us;

    AdmissionRecord rec;
    rec.time_us = now_;
    rec.lazy = d.kind == Decision::Kind::AdmitLazy;
    rec.requests = std::move(d.request_ids);
    rec.min_slack_us = d.min_slack_us;
    rec.predicted_exec_us = d.predicted_exec_us;
    rec.conservative_exec_us = d.conservative_exec_us;
    result_.admissions.push_back(std::move(rec));
  }

  if (!bst_.empty()) {
    timer_.reset();
    start_node();
  } else {
    const SchedulerView idle{now_, true, queue_, bst_, timing_, catalog_};
    timer_ = policy_->next_timer(idle);
  }
}

void Engine::start_node() {
  StepPlan plan = plan_step(bst_, catalog_, policy_->co_schedule_cells());
  const Micros duration = plan.duration_us + pending_overhead_;
  pending_overhead_ = 0;
  result_.busy_us += duration;
  ++result_.node_instances;
  for (std::size_t pos : plan.positions) {
    for (RequestId id : bst_.entry(pos).request_ids) {
      auto& m = result_.requests[id].max_observed_batch;
      m = std::max(m, plan.batch);
    }
  }
  if (log_) {
    log_->record("start", to_string(plan.cursor) + " x" + std::to_string(plan.batch) + " " +
                              std::to_string(duration) + "us");
  }
  running_ = Running{std::move(plan), now_ + duration};
}

void Engine::complete_node() {
  const StepPlan plan = std::move(running_->plan);
  running_.reset();
  const StepOutcome out =
      apply_step(bst_, plan, [this](RequestId id) { return timing_[id].actual_dec; });
  result_.max_depth = std::max(result_.max_depth, bst_.depth());
  for (RequestId id : out.retired) {
    auto& rec = result_.requests[id];
    rec.complete_us = now_;
    rec.latency_us = now_ - rec.arrival_us;
    rec.sla_violated = rec.latency_us > result_.policy.slack.sla_target_us;
  }
}

SimResult Engine::take_result() {
  ensure(drain_check(), "result requested before the simulation drained");
  result_.makespan_us = now_;
  for (const auto& rec : result_.requests) {
    ensure(rec.arrival_us <= rec.first_issue_us && rec.first_issue_us < rec.complete_us,
           "request " + std::to_string(rec.id) + " has inconsistent timestamps");
  }
  return std::move(result_);
}

SimResult run(const Catalog& catalog, const std::vector<InferenceRequest>& trace,
              const PolicyConfig& cfg, const RunMeta& meta, EventLog* log) {
  Engine engine(catalog, trace, cfg, meta, log);
  engine.run_to_end();
  return engine.take_result();
}

void write_result_csv(std::ostream& out, const SimResult& result) {
  out << "id,model,arrival_us,first_issue_us,complete_us,latency_us,sla_violated,max_observed_batch\n";
  for (const auto& r : result.requests) {
    out << r.id << ',' << r.model << ',' << r.arrival_us << ',' << r.first_issue_us << ','
        << r.complete_us << ',' << r.latency_us << ',' << (r.sla_violated ? 1 : 0) << ','
        << r.max_observed_batch << '\n';
  }
}

void write_result_csv(const std::string& path, const SimResult& result) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  write_result_csv(out, result);
  require(out.good(), "write to '" + path + "' failed");
}

namespace {

template <typename T>
T parse_num(const std::string& s, std::size_t line, const char* col) {
  std::istringstream in(s);
  T v{};
  in >> v;
  require(!in.fail() && in.eof(),
          "result line " + std::to_string(line) + ": bad " + col + " '" + s + "'");
  return v;
}

}  // namespace

std::vector<RequestRecord> read_result_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "result CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "id,model,arrival_us,first_issue_us,complete_us,latency_us,sla_violated,"
                  "max_observed_batch",
          "result CSV has an unexpected header");
  std::vector<RequestRecord> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    require(f.size() == 8, "result line " + std::to_string(n) + ": expected 8 columns");
    RequestRecord r;
    r.id = parse_num<std::uint64_t>(f[0], n, "id");
    r.model = f[1];
    r.arrival_us = parse_num<Micros>(f[2], n, "arrival_us");
    r.first_issue_us = parse_num<Micros>(f[3], n, "first_issue_us");
    r.complete_us = parse_num<Micros>(f[4], n, "complete_us");
    r.latency_us = parse_num<Micros>(f[5], n, "latency_us");
    r.sla_violated = parse_num<int>(f[6], n, "sla_violated") != 0;
    r.max_observed_batch = parse_num<std::uint32_t>(f[7], n, "max_observed_batch");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RequestRecord> read_result_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '" + path + "'");
  return read_result_csv(in);
}

}  // namespace lazyb
