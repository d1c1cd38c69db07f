#pragma once

// Worksharing constructs bound to the calling thread's innermost team.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "ompcore/runtime.hpp"
#include "ompcore/schedule.hpp"

namespace ompcore {

inline constexpr std::size_t kMaxLoopDepth = 8;

/// One `range(start, stop, step)` level. Step may be negative, never zero.
struct LoopRange {
  std::int64_t start = 0;
  std::int64_t stop = 0;
  std::int64_t step = 1;

  std::int64_t count() const;
  std::int64_t value_at(std::int64_t k) const { return start + k * step; }
};

struct IndexTuple {
  std::array<std::int64_t, kMaxLoopDepth> values{};
  std::size_t depth = 0;

  std::int64_t operator[](std::size_t level) const { return values[level]; }
  bool operator==(const IndexTuple& other) const;
};

/// A perfect loop nest; inner levels do not depend on outer indices.
class LoopBounds {
 public:
  LoopBounds(std::initializer_list<LoopRange> levels);
  explicit LoopBounds(std::vector<LoopRange> levels);

  std::size_t depth() const { return levels_.size(); }
  const std::vector<LoopRange>& levels() const { return levels_; }
  /// Size of the flattened iteration space.
  std::int64_t total() const { return total_; }
  /// Mixed-radix decomposition of a flattened index (last level fastest).
  IndexTuple at(std::int64_t flat) const;

 private:
  std::vector<LoopRange> levels_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Half-open block of flattened iterations.
struct Chunk {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

/// auto becomes static; runtime reads the calling context's run-sched ICV.
ScheduleSpec resolve_schedule(ScheduleSpec spec);

/// The calling member's share of a worksharing loop. Every team member must
/// construct one with identical bounds and schedule. Unless `nowait`, running
/// out of iterations waits on the team barrier.
class ScheduledRange {
 public:
  class iterator;
  struct sentinel {};

  ScheduledRange(LoopBounds bounds, ScheduleSpec spec = {}, bool nowait = false);
  ~ScheduledRange();

  ScheduledRange(const ScheduledRange&) = delete;
  ScheduledRange& operator=(const ScheduledRange&) = delete;

  /// Next chunk for this member, or nullopt once exhausted (after the exit barrier).
  std::optional<Chunk> next_chunk();

  iterator begin();
  sentinel end() const { return {}; }

  const LoopBounds& bounds() const { return bounds_; }
  const ScheduleSpec& schedule() const { return spec_; }
  bool exhausted() const { return finished_; }

  /// Last tuple this member executed, if any.
  std::optional<IndexTuple> last_yielded() const;
  /// True iff this member ran the sequentially-last iteration.
  bool executed_last_iteration() const;

 private:
  friend class iterator;
  std::optional<Chunk> claim();
  void finish();

  struct SharedCursor {
    std::int64_t next = 0;
  };

  LoopBounds bounds_;
  ScheduleSpec spec_;
  bool nowait_;
  std::shared_ptr<TeamState> team_;
  int thread_index_;
  int team_size_;
  std::uint64_t seq_;
  std::shared_ptr<SharedCursor> cursor_;  // dynamic/guided only
  std::int64_t chunk_size_ = 1;
  std::int64_t static_next_ = 0;          // static only: next chunk number
  std::optional<std::int64_t> last_flat_;
  bool finished_ = false;
  int uncaught_ = 0;
};

class ScheduledRange::iterator {
 public:
  using value_type = IndexTuple;
  using difference_type = std::ptrdiff_t;

  iterator() = default;
  explicit iterator(ScheduledRange* range);

  IndexTuple operator*() const { return range_->bounds_.at(flat_); }
  iterator& operator++();
  void operator++(int) { ++*this; }
  bool operator==(sentinel) const { return range_ == nullptr; }

 private:
  void advance_chunk();

  ScheduledRange* range_ = nullptr;
  std::int64_t flat_ = 0;
  std::int64_t chunk_end_ = 0;
};

/// True iff `last_yielded` is the sequentially-last tuple of `bounds`.
bool is_last_iteration(const LoopBounds& bounds, const std::optional<IndexTuple>& last_yielded);

/// Scope of a `sections` construct. The destructor waits on the team barrier
/// unless `nowait`.
class SectionsScope {
 public:
  SectionsScope(int total, bool nowait = false);
  ~SectionsScope();

  SectionsScope(const SectionsScope&) = delete;
  SectionsScope& operator=(const SectionsScope&) = delete;

  /// True for exactly one team member per id.
  bool try_section(int id);
  bool executed_by_me(int id) const { return mine_.count(id) != 0; }
  /// Whether this member ran the lexically last section (lastprivate).
  bool executed_last() const { return executed_by_me(total_ - 1); }
  int total() const { return total_; }

 private:
  struct Shared {
    std::vector<bool> executed;
  };

  int total_;
  bool nowait_;
  std::shared_ptr<TeamState> team_;
  std::uint64_t seq_;
  std::shared_ptr<Shared> shared_;
  std::set<int> mine_;
  int uncaught_;
};

SectionsScope sections_begin(int total, bool nowait = false);
bool section_try(SectionsScope& scope, int id);

/// Scope of a `single` construct: granted to the first member to arrive.
class SingleScope {
 public:
  explicit SingleScope(bool nowait = false);
  ~SingleScope();

  SingleScope(const SingleScope&) = delete;
  SingleScope& operator=(const SingleScope&) = delete;

  bool granted() const { return granted_; }
  explicit operator bool() const { return granted_; }

 private:
  bool nowait_;
  std::shared_ptr<TeamState> team_;
  std::uint64_t seq_;
  bool granted_ = false;
  int uncaught_;
};

SingleScope single_begin(bool nowait = false);

void barrier();

/// Named critical sections are program-wide; the unnamed one is a single lock.
/// Not reentrant.
void critical_enter(std::optional<std::string_view> name = std::nullopt);
void critical_exit(std::optional<std::string_view> name = std::nullopt);

class CriticalScope {
 public:
  explicit CriticalScope(std::optional<std::string_view> name = std::nullopt);
  ~CriticalScope();

  CriticalScope(const CriticalScope&) = delete;
  CriticalScope& operator=(const CriticalScope&) = delete;

 private:
  std::optional<std::string> name_;
};

}  // namespace ompcore
