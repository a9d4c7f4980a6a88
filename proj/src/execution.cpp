#include "lazyb/execution.hpp"

#include <algorithm>
#include <map>

#include "lazyb/cost_model.hpp"

namespace lazyb {

bool cellular_batchable(const NodeCursor& a, const ModelGraph& ma, const NodeCursor& b,
                        const ModelGraph& mb) {
  if (ma.name() != mb.name()) return false;
  if (a.node_id == b.node_id) return true;
  const auto& wa = ma.node(a.node_id).weight_group;
  const auto& wb = mb.node(b.node_id).weight_group;
  return wa && wb && *wa == *wb;
}

StepPlan plan_step(const BatchStateTable& bst, const Catalog& catalog, bool co_schedule_cells) {
  const SubBatchEntry* top = bst.active();
  ensure(top != nullptr, "plan_step on an empty batch state table");
  StepPlan plan;
  plan.model = &catalog.at(top->model_name).graph;
  plan.cursor = top->next;
  const auto& entries = bst.entries();
  if (co_schedule_cells) {
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
      const auto& e = entries[i];
      if (e.model_name != top->model_name) continue;
      if (cellular_batchable(e.next, *plan.model, top->next, *plan.model)) {
        plan.positions.push_back(i);
        plan.batch += e.size();
      }
    }
  }
  plan.positions.push_back(entries.size() - 1);
  plan.batch += top->size();
  plan.duration_us = node_latency(plan.model->node(plan.cursor.node_id), plan.batch);
  return plan;
}

StepOutcome apply_step(BatchStateTable& bst, const StepPlan& plan, const LengthFn& length_of) {
  StepOutcome out;
  // Highest position first so removals and splits never shift entries that
  // are still to be processed.
  for (auto it = plan.positions.rbegin(); it != plan.positions.rend(); ++it) {
    const std::size_t pos = *it;
    const SubBatchEntry& e = bst.entry(pos);
    const ModelGraph& model = *plan.model;
    const NodeCursor cur = e.next;

    std::vector<RequestId> done;
    // Ordered by cursor so the split layout is deterministic.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<RequestId>> groups;
    for (RequestId id : e.request_ids) {
      auto nxt = detail::step_cursor(model, cur, model.effective_dec(length_of(id)));
      if (!nxt) {
        done.push_back(id);
      } else {
        groups[{nxt->node_id, nxt->timestep}].push_back(id);
      }
    }
    if (groups.size() > 1) {
      std::vector<std::pair<std::vector<RequestId>, NodeCursor>> parts;
      for (auto& [key, ids] : groups) parts.emplace_back(std::move(ids), NodeCursor{key.first, key.second});
      for (RequestId id : done) bst.retire(id);
      // Retiring cannot empty the entry here since groups are non-empty.
      bst.split(pos, std::move(parts));
      out.split = true;
    } else if (groups.size() == 1) {
      const NodeCursor nxt{groups.begin()->first.first, groups.begin()->first.second};
      for (RequestId id : done) bst.retire(id);
      bst.set_next(pos, nxt);
    } else {
      for (RequestId id : done) bst.retire(id);
    }
    out.retired.insert(out.retired.end(), done.begin(), done.end());
  }
  out.merges = bst.merge_adjacent();
  return out;
}

Micros drain_time(BatchStateTable bst, const Catalog& catalog, const LengthFn& length_of,
                  bool co_schedule_cells) {
  bst.set_log(nullptr);
  Micros total = 0;
  while (!bst.empty()) {
    const StepPlan plan = plan_step(bst, catalog, co_schedule_cells);
    total += plan.duration_us;
    apply_step(bst, plan, length_of);
  }
  return total;
}

}  // namespace lazyb
