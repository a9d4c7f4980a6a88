#include "lazyb/batch_state_table.hpp"

#include <algorithm>
#include <iterator>
#include <ostream>
#include <sstream>

namespace lazyb {

void EventLog::record(std::string_view event, std::string dump) {
  lines_.push_back(Line{now_, std::string(event), std::move(dump)});
}

void EventLog::write(std::ostream& out) const {
  out << "time_us,event,entry_dump\n";
  for (const auto& l : lines_) out << l.time_us << ',' << l.event << ',' << l.dump << '\n';
}

std::string EventLog::str() const {
  std::ostringstream ss;
  write(ss);
  return ss.str();
}

std::string dump(const SubBatchEntry& e) {
  std::string s = "{";
  for (std::size_t i = 0; i < e.request_ids.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(e.request_ids[i]);
  }
  s += "}@";
  s += to_string(e.next);
  return s;
}

std::string BatchStateTable::dump() const {
  std::string s;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ';';
    s += lazyb::dump(entries_[i]);
  }
  return s;
}

void BatchStateTable::emit(std::string_view event) {
  if (log_) log_->record(event, dump());
}

void BatchStateTable::push(std::vector<RequestId> ids, NodeCursor start, std::string model_name) {
  require(!ids.empty(), "push: empty request set");
  std::sort(ids.begin(), ids.end());
  require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), "push: duplicate request id");
  for (RequestId id : ids) {
    require(!where_.contains(id), "push: request " + std::to_string(id) + " already in flight");
  }
  const std::size_t pos = entries_.size();
  for (RequestId id : ids) where_.emplace(id, pos);
  entries_.push_back(SubBatchEntry{std::move(ids), start, std::move(model_name)});
  emit("push");
}

const SubBatchEntry* BatchStateTable::active() const {
  if (entries_.empty()) return nullptr;
  ++active_probes_;
  return &entries_.back();
}

bool BatchStateTable::mergeable(std::size_t lower) const {
  const auto& a = entries_[lower];
  const auto& b = entries_[lower + 1];
  return a.next == b.next && a.model_name == b.model_name;
}

void BatchStateTable::merge_into_lower(std::size_t lower) {
  auto& a = entries_[lower];
  auto& b = entries_[lower + 1];
  std::vector<RequestId> merged;
  merged.reserve(a.request_ids.size() + b.request_ids.size());
  std::merge(a.request_ids.begin(), a.request_ids.end(), b.request_ids.begin(),
             b.request_ids.end(), std::back_inserter(merged));
  a.request_ids = std::move(merged);
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(lower) + 1);
  reindex_from(lower);
  emit("merge");
}

void BatchStateTable::reindex_from(std::size_t pos) {
  for (std::size_t i = pos; i < entries_.size(); ++i) {
    for (RequestId id : entries_[i].request_ids) where_[id] = i;
  }
}

MergeOutcome BatchStateTable::advance_top(NodeCursor resume) {
  ensure(!entries_.empty(), "advance_top on an empty batch state table");
  entries_.back().next = resume;
  emit("advance");
  MergeOutcome out;
  while (entries_.size() >= 2 && mergeable(entries_.size() - 2)) {
    merge_into_lower(entries_.size() - 2);
    out.merged = true;
    ++out.merges;
  }
  return out;
}

void BatchStateTable::retire(RequestId id) {
  auto it = where_.find(id);
  require(it != where_.end(), "retire: unknown request " + std::to_string(id));
  const std::size_t pos = it->second;
  where_.erase(it);
  auto& ids = entries_[pos].request_ids;
  ids.erase(std::lower_bound(ids.begin(), ids.end(), id));
  if (ids.empty()) {
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(pos));
    reindex_from(pos);
  }
  if (log_) log_->record("retire", std::to_string(id) + " " + dump());
}

void BatchStateTable::set_next(std::size_t pos, NodeCursor next) {
  ensure(pos < entries_.size(), "set_next: bad position");
  entries_[pos].next = next;
  emit("advance");
}

void BatchStateTable::split(std::size_t pos,
                            std::vector<std::pair<std::vector<RequestId>, NodeCursor>> parts) {
  ensure(pos < entries_.size(), "split: bad position");
  ensure(!parts.empty(), "split: no parts");
  std::vector<RequestId> covered;
  std::vector<SubBatchEntry> fresh;
  for (auto& [ids, cur] : parts) {
    ensure(!ids.empty(), "split: empty part");
    std::sort(ids.begin(), ids.end());
    covered.insert(covered.end(), ids.begin(), ids.end());
    fresh.push_back(SubBatchEntry{std::move(ids), cur, entries_[pos].model_name});
  }
  std::sort(covered.begin(), covered.end());
  ensure(covered == entries_[pos].request_ids, "split: parts must partition the entry");
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(pos));
  entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(pos),
                  std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()));
  reindex_from(pos);
  emit("split");
}

std::uint32_t BatchStateTable::merge_adjacent() {
  std::uint32_t merges = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = entries_.size(); i-- > 1;) {
      if (mergeable(i - 1)) {
        merge_into_lower(i - 1);
        ++merges;
        changed = true;
        break;
      }
    }
  }
  return merges;
}

std::size_t BatchStateTable::position_of(RequestId id) const {
  auto it = where_.find(id);
  require(it != where_.end(), "unknown request " + std::to_string(id));
  return it->second;
}

}  // namespace lazyb
