#include "ompcore/worksharing.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "ompcore/data_env.hpp"

namespace ompcore {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a / b + (a % b != 0); }

/// ceil((hi - lo) / step) for hi > lo without intermediate overflow.
std::int64_t span_count(std::int64_t lo, std::int64_t hi, std::uint64_t step) {
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  const auto count = (span - 1) / step + 1;
  if (count > static_cast<std::uint64_t>(INT64_MAX)) throw std::overflow_error("iteration space too large");
  return static_cast<std::int64_t>(count);
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("iteration space too large");
  return out;
}

}  // namespace

std::int64_t LoopRange::count() const {
  if (step == 0) throw std::invalid_argument("loop step must not be zero");
  if (step > 0) return start < stop ? span_count(start, stop, static_cast<std::uint64_t>(step)) : 0;
  return start > stop ? span_count(stop, start, 0 - static_cast<std::uint64_t>(step)) : 0;
}

bool IndexTuple::operator==(const IndexTuple& other) const {
  return depth == other.depth && std::equal(values.begin(), values.begin() + depth, other.values.begin());
}

LoopBounds::LoopBounds(std::initializer_list<LoopRange> levels) : LoopBounds(std::vector<LoopRange>(levels)) {}

LoopBounds::LoopBounds(std::vector<LoopRange> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("loop nest needs at least one level");
  if (levels_.size() > kMaxLoopDepth) {
    throw std::invalid_argument("loop nest deeper than " + std::to_string(kMaxLoopDepth) + " levels");
  }
  total_ = 1;
  for (const auto& level : levels_) {
    counts_.push_back(level.count());
    total_ = checked_mul(total_, counts_.back());
  }
}

IndexTuple LoopBounds::at(std::int64_t flat) const {
  IndexTuple out;
  out.depth = levels_.size();
  if (out.depth == 1) {
    out.values[0] = levels_[0].value_at(flat);
    return out;
  }
  for (std::size_t level = levels_.size(); level-- > 0;) {
    out.values[level] = levels_[level].value_at(flat % counts_[level]);
    flat /= counts_[level];
  }
  return out;
}

ScheduleSpec resolve_schedule(ScheduleSpec spec) {
  if (spec.kind == ScheduleKind::runtime) spec = ensure_context().icv.runtime_schedule;
  if (spec.kind == ScheduleKind::auto_ || spec.kind == ScheduleKind::runtime) spec = ScheduleSpec{};
  return spec;
}

bool is_last_iteration(const LoopBounds& bounds, const std::optional<IndexTuple>& last_yielded) {
  if (!last_yielded || bounds.total() == 0) return false;
  return *last_yielded == bounds.at(bounds.total() - 1);
}

// ---------------------------------------------------------------------------
// ScheduledRange

ScheduledRange::ScheduledRange(LoopBounds bounds, ScheduleSpec spec, bool nowait)
    : bounds_(std::move(bounds)), spec_(resolve_schedule(spec)), nowait_(nowait), uncaught_(std::uncaught_exceptions()) {
  auto& record = current_record();
  team_ = record.team;
  thread_index_ = record.thread_index;
  team_size_ = record.team_size;
  seq_ = record.construct_seq++;

  const auto total = bounds_.total();
  switch (spec_.kind) {
    case ScheduleKind::static_:
      chunk_size_ = spec_.chunk.value_or(std::max<std::int64_t>(1, ceil_div(total, team_size_)));
      static_next_ = thread_index_;
      break;
    case ScheduleKind::dynamic:
    case ScheduleKind::guided:
      chunk_size_ = spec_.chunk.value_or(1);
      cursor_ = team_->construct_enter<SharedCursor>(seq_, [] { return new SharedCursor{}; });
      break;
    default:
      break;
  }
}

ScheduledRange::~ScheduledRange() {
  if (!finished_ && std::uncaught_exceptions() <= uncaught_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

std::optional<Chunk> ScheduledRange::claim() {
  const auto total = bounds_.total();
  if (spec_.kind == ScheduleKind::static_) {
    const auto begin = checked_mul(static_next_, chunk_size_);
    if (begin >= total) return std::nullopt;
    static_next_ += team_size_;
    return Chunk{begin, std::min(total, begin + chunk_size_)};
  }

  std::lock_guard lock(team_->mutex());
  const auto begin = cursor_->next;
  if (begin >= total) return std::nullopt;
  std::int64_t size = chunk_size_;
  if (spec_.kind == ScheduleKind::guided) {
    size = std::max(ceil_div(total - begin, team_size_), chunk_size_);
  }
  size = std::min(size, total - begin);
  cursor_->next = begin + size;
  return Chunk{begin, begin + size};
}

void ScheduledRange::finish() {
  finished_ = true;
  if (!nowait_) team_->barrier_wait();
  if (cursor_) team_->construct_leave(seq_);
}

std::optional<Chunk> ScheduledRange::next_chunk() {
  if (finished_) return std::nullopt;
  if (auto chunk = claim()) return chunk;
  finish();
  return std::nullopt;
}

ScheduledRange::iterator ScheduledRange::begin() { return iterator(this); }

std::optional<IndexTuple> ScheduledRange::last_yielded() const {
  if (!last_flat_) return std::nullopt;
  return bounds_.at(*last_flat_);
}

bool ScheduledRange::executed_last_iteration() const {
  return last_flat_ && bounds_.total() > 0 && *last_flat_ == bounds_.total() - 1;
}

ScheduledRange::iterator::iterator(ScheduledRange* range) : range_(range) { advance_chunk(); }

void ScheduledRange::iterator::advance_chunk() {
  auto chunk = range_->next_chunk();
  if (!chunk) {
    range_ = nullptr;
    return;
  }
  flat_ = chunk->begin;
  chunk_end_ = chunk->end;
  range_->last_flat_ = flat_;
}

ScheduledRange::iterator& ScheduledRange::iterator::operator++() {
  if (++flat_ < chunk_end_) {
    range_->last_flat_ = flat_;
  } else {
    advance_chunk();
  }
  return *this;
}

// ---------------------------------------------------------------------------
// sections / single

SectionsScope::SectionsScope(int total, bool nowait)
    : total_(total), nowait_(nowait), uncaught_(std::uncaught_exceptions()) {
  if (total < 0) throw std::invalid_argument("sections: negative section count");
  auto& record = current_record();
  team_ = record.team;
  seq_ = record.construct_seq++;
  shared_ = team_->construct_enter<Shared>(seq_, [total] { return new Shared{std::vector<bool>(total, false)}; });
}

SectionsScope::~SectionsScope() {
  if (std::uncaught_exceptions() > uncaught_) return;
  if (!nowait_) team_->barrier_wait();
  team_->construct_leave(seq_);
}

bool SectionsScope::try_section(int id) {
  if (id < 0 || id >= total_) {
    throw std::logic_error("section id " + std::to_string(id) + " outside 0.." + std::to_string(total_ - 1));
  }
  {
    std::lock_guard lock(team_->mutex());
    if (shared_->executed[static_cast<std::size_t>(id)]) return false;
    shared_->executed[static_cast<std::size_t>(id)] = true;
  }
  mine_.insert(id);
  return true;
}

SectionsScope sections_begin(int total, bool nowait) { return SectionsScope(total, nowait); }

bool section_try(SectionsScope& scope, int id) { return scope.try_section(id); }

namespace {

struct SingleShared {
  bool claimed = false;
  std::shared_ptr<CopyChannel> channel = std::make_shared<CopyChannel>();
};

}  // namespace

SingleScope::SingleScope(bool nowait) : nowait_(nowait), uncaught_(std::uncaught_exceptions()) {
  auto& record = current_record();
  team_ = record.team;
  seq_ = record.construct_seq++;
  auto shared = team_->construct_enter<SingleShared>(seq_, [] { return new SingleShared{}; });
  {
    std::lock_guard lock(team_->mutex());
    granted_ = !shared->claimed;
    shared->claimed = true;
  }
  record.copy_channel = shared->channel;
}

SingleScope::~SingleScope() {
  if (std::uncaught_exceptions() > uncaught_) return;
  if (!nowait_) team_->barrier_wait();
  team_->construct_leave(seq_);
}

SingleScope single_begin(bool nowait) { return SingleScope(nowait); }

void barrier() { current_record().team->barrier_wait(); }

// ---------------------------------------------------------------------------
// critical

namespace {

std::mutex& critical_lock(const std::string& name) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::mutex> registry;
  std::lock_guard lock(registry_mutex);
  return registry[name];
}

std::vector<std::string>& held_critical_names() {
  thread_local std::vector<std::string> held;
  return held;
}

// The unnamed critical section cannot collide with an identifier.
std::string critical_key(std::optional<std::string_view> name) { return name ? std::string(*name) : std::string(); }

}  // namespace

void critical_enter(std::optional<std::string_view> name) {
  auto key = critical_key(name);
  critical_lock(key).lock();
  held_critical_names().push_back(std::move(key));
}

void critical_exit(std::optional<std::string_view> name) {
  auto key = critical_key(name);
  auto& held = held_critical_names();
  auto it = std::find(held.rbegin(), held.rend(), key);
  if (it == held.rend()) throw std::logic_error("critical_exit without matching critical_enter");
  held.erase(std::next(it).base());
  critical_lock(key).unlock();
}

CriticalScope::CriticalScope(std::optional<std::string_view> name) {
  if (name) name_ = std::string(*name);
  critical_enter(name);
}

CriticalScope::~CriticalScope() {
  if (name_) {
    critical_exit(std::string_view(*name_));
  } else {
    critical_exit();
  }
}

}  // namespace ompcore
