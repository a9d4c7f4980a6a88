#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lazyb/batch_state_table.hpp"
#include "lazyb/catalog.hpp"

namespace lazyb {

/// Decoder length of a request, as seen by whoever is stepping the table
/// (the engine uses true lengths, a predictor may substitute its own).
using LengthFn = std::function<std::uint32_t(RequestId)>;

/// One node instance about to run on the accelerator.
struct StepPlan {
  std::vector<std::size_t> positions;  // stack positions executing, ascending
  const ModelGraph* model = nullptr;
  NodeCursor cursor;                   // cursor of the active entry
  std::uint32_t batch = 0;
  Micros duration_us = 0;
};

struct StepOutcome {
  std::vector<RequestId> retired;
  std::uint32_t merges = 0;
  bool split = false;
};

/// Whether two cursors may share one cell execution: same model and either
/// the same node or nodes bound to the same weight group.
bool cellular_batchable(const NodeCursor& a, const ModelGraph& ma, const NodeCursor& b,
                        const ModelGraph& mb);

/// Plans the next node instance for the active entry. With
/// `co_schedule_cells`, every other entry whose cursor is cellular-batchable
/// with the active one runs in the same instance.
StepPlan plan_step(const BatchStateTable& bst, const Catalog& catalog, bool co_schedule_cells);

/// Applies a completed step: members whose unrolled sequence ended retire;
/// the rest advance. Members whose next cursors diverge (shorter decoders
/// moving on to epilogue nodes) split into separate entries with the
/// furthest-along group on top. Equal adjacent entries are merged last.
StepOutcome apply_step(BatchStateTable& bst, const StepPlan& plan, const LengthFn& length_of);

/// Runs the table to completion with no further admissions and returns the
/// total accelerator time. `bst` is taken by value and consumed.
Micros drain_time(BatchStateTable bst, const Catalog& catalog, const LengthFn& length_of,
                  bool co_schedule_cells = false);

}  // namespace lazyb
