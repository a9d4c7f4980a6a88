#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lazyb/model_graph.hpp"

namespace lazyb {

/// Timestamped CSV event log (`time_us,event,entry_dump`).
class EventLog {
 public:
  void set_time(Micros t) { now_ = t; }
  void record(std::string_view event, std::string dump);
  void write(std::ostream& out) const;
  std::string str() const;

  struct Line {
    Micros time_us;
    std::string event;
    std::string dump;
  };
  const std::vector<Line>& lines() const { return lines_; }

 private:
  Micros now_ = 0;
  std::vector<Line> lines_;
};

/// Requests that share execution progress. `request_ids` is kept sorted.
struct SubBatchEntry {
  std::vector<RequestId> request_ids;
  NodeCursor next;
  std::string model_name;

  std::uint32_t size() const { return static_cast<std::uint32_t>(request_ids.size()); }
};

std::string dump(const SubBatchEntry& e);

struct MergeOutcome {
  bool merged = false;
  std::uint32_t merges = 0;
};

/// Stack of sub-batches; the top entry is the active batch. Adjacent entries
/// whose next cursors (and models) become equal are merged.
class BatchStateTable {
 public:
  explicit BatchStateTable(EventLog* log = nullptr) : log_(log) {}

  /// Pushes a new active entry. Throws ValidationError if `ids` is empty or
  /// any id is already in flight.
  void push(std::vector<RequestId> ids, NodeCursor start, std::string model_name);

  /// Moves the active entry to `resume`, then merges the two topmost entries
  /// while their cursors and models are equal.
  MergeOutcome advance_top(NodeCursor resume);

  /// Removes one request; an emptied entry is popped out of the stack.
  void retire(RequestId id);

  /// Top of stack, or nullptr when empty. Constant time.
  const SubBatchEntry* active() const;

  // Lower-level mutations used by the execution core. None of these merge;
  // call merge_adjacent() once the step has been fully applied.
  void set_next(std::size_t pos, NodeCursor next);
  /// Replaces entry `pos` by `parts` (bottom to top). Every member of the old
  /// entry must appear in exactly one part.
  void split(std::size_t pos, std::vector<std::pair<std::vector<RequestId>, NodeCursor>> parts);
  /// Merges every adjacent pair with equal cursors and models, repeatedly.
  std::uint32_t merge_adjacent();

  bool empty() const { return entries_.empty(); }
  std::size_t depth() const { return entries_.size(); }
  std::size_t in_flight() const { return where_.size(); }
  bool contains(RequestId id) const { return where_.contains(id); }
  /// Stack position of `id` (0 = bottom). Throws for unknown ids.
  std::size_t position_of(RequestId id) const;
  const std::vector<SubBatchEntry>& entries() const { return entries_; }
  const SubBatchEntry& entry(std::size_t pos) const { return entries_.at(pos); }

  /// Number of entries inspected by active(); lets tests check it stays O(1).
  std::uint64_t active_probes() const { return active_probes_; }

  std::string dump() const;
  void set_log(EventLog* log) { log_ = log; }

 private:
  bool mergeable(std::size_t lower) const;
  void merge_into_lower(std::size_t lower);
  void reindex_from(std::size_t pos);
  void emit(std::string_view event);

  std::vector<SubBatchEntry> entries_;
  std::unordered_map<RequestId, std::size_t> where_;
  EventLog* log_ = nullptr;
  mutable std::uint64_t active_probes_ = 0;
};

}  // namespace lazyb
