#pragma once

// Thread teams, per-thread context stacks and the omp_* query/control API.

#include <any>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ompcore/barrier.hpp"
#include "ompcore/schedule.hpp"

namespace ompcore {

struct CopyChannel;

/// Completion counter for the children of one task (or implicit task).
/// Guarded by the owning team's mutex.
struct TaskNode {
  std::size_t pending_children = 0;
  bool explicit_task = false;
};

struct Task {
  std::function<void()> body;
  std::shared_ptr<TaskNode> parent;
};

struct ContainedError {
  int thread_index = 0;
  std::string what;
};

struct RegionOutcome {
  std::vector<ContainedError> caught_errors;
  /// Tasks still queued when the region returned; 0 unless the runtime is broken.
  std::size_t tasks_left = 0;

  bool ok() const { return caught_errors.empty(); }
};

/// Raised in a member that was blocked on a peer which failed and left the team.
class RegionAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State shared by every member of one team: lock, barrier, task queue and
/// the key/value table used by worksharing constructs.
class TeamState {
 public:
  explicit TeamState(int size);

  TeamState(const TeamState&) = delete;
  TeamState& operator=(const TeamState&) = delete;

  int size() const { return size_; }
  std::mutex& mutex() { return mutex_; }
  std::condition_variable& signal() { return signal_; }

  /// Team barrier. Parked members execute queued tasks; the barrier opens only
  /// once every member arrived and no task is queued or running.
  void barrier_wait();

  /// Removes the calling member from the team after a failure: drops it from
  /// the barrier and wakes anything waiting on it.
  void leave();

  bool aborted() const;  // requires mutex()
  std::size_t barrier_parties() const;

  void push_task(Task task);
  /// Executes `task` on the caller right away, accounted like a queued one.
  void run_undeferred(Task task);
  /// Runs queued tasks until `node` has no pending children; with
  /// `drain_queue`, also until the queue is empty.
  void taskwait(const std::shared_ptr<TaskNode>& node, bool drain_queue);
  /// Runs whatever is still queued on the calling thread.
  void drain();
  std::size_t queued_tasks() const;

  /// Fetches (creating on first arrival) the state of the `seq`-th worksharing
  /// construct. Members must call construct_leave once done with it.
  template <class T, class Make>
  std::shared_ptr<T> construct_enter(std::uint64_t seq, Make make) {
    std::lock_guard lock(mutex_);
    auto key = construct_key(seq);
    auto it = table_.find(key);
    if (it == table_.end()) {
      it = table_.emplace(key, TableEntry{std::any(std::shared_ptr<T>(make())), size_}).first;
    }
    return std::any_cast<std::shared_ptr<T>>(it->second.value);
  }
  void construct_leave(std::uint64_t seq);
  std::size_t table_size() const;

  void record_error(int thread_index, std::string what);
  std::vector<ContainedError> take_errors();

 private:
  struct TableEntry {
    std::any value;
    int remaining = 0;
  };

  static std::string construct_key(std::uint64_t seq);
  void run_task(Task task, std::unique_lock<std::mutex>& lock);
  bool barrier_can_open() const;

  const int size_;
  mutable std::mutex mutex_;
  std::condition_variable signal_;
  GenerationCount barrier_;
  std::deque<Task> queue_;
  std::size_t running_tasks_ = 0;
  std::unordered_map<std::string, TableEntry> table_;
  std::vector<ContainedError> errors_;
  bool aborted_ = false;
};

/// One entry of a thread's context stack: its view of one team.
struct TeamRecord {
  int thread_index = 0;
  int team_size = 1;
  std::shared_ptr<TeamState> team;
  std::uint64_t construct_seq = 0;
  std::shared_ptr<CopyChannel> copy_channel;
  std::shared_ptr<TaskNode> current_task;
};

/// Internal control variables.
struct Icv {
  int requested_num_threads = 1;
  bool nested_enabled = false;
  ScheduleSpec runtime_schedule{};
};

struct TeamContext {
  std::vector<TeamRecord> stack;
  Icv icv;

  TeamRecord& top() { return stack.back(); }
  std::size_t depth() const { return stack.size(); }
};

/// The calling thread's context, created on first use with an implicit
/// single-thread region at the bottom of the stack.
TeamContext& ensure_context();

/// Innermost team record of the calling thread.
TeamRecord& current_record();

/// Runs `block` on a team of threads; the caller is member 0.
RegionOutcome parallel_run(const std::function<void()>& block, std::optional<int> num_threads = std::nullopt,
                           std::optional<bool> if_value = std::nullopt);

void omp_set_num_threads(int n);
int omp_get_num_threads();
int omp_get_thread_num();
int omp_get_max_threads();
bool omp_in_parallel();
void omp_set_nested(bool flag);
bool omp_get_nested();
double omp_get_wtime();

using EnvLookup = std::function<const char*(const char*)>;

std::optional<int> parse_num_threads_env(std::string_view text);
std::optional<bool> parse_bool_env(std::string_view text);

/// ICVs from OMP_NUM_THREADS, OMP_NESTED and OMP_SCHEDULE. Malformed values
/// fall back to the default and print a warning to `warnings`.
Icv icv_from_environment(const EnvLookup& lookup, std::ostream& warnings);

int default_num_threads();

}  // namespace ompcore
