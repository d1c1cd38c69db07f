#include "ompcore/runtime.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <system_error>
#include <thread>
#include <utility>

#include "ompcore/tasking.hpp"

namespace ompcore {

namespace {

std::unique_ptr<TeamContext>& context_slot() {
  thread_local std::unique_ptr<TeamContext> slot;
  return slot;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

TeamRecord make_record(int index, int size, std::shared_ptr<TeamState> team) {
  TeamRecord record;
  record.thread_index = index;
  record.team_size = size;
  record.team = std::move(team);
  record.current_task = std::make_shared<TaskNode>();
  return record;
}

void run_member(const std::function<void()>& block, TeamState& team, int index) {
  try {
    block();
  } catch (const std::exception& e) {
    team.record_error(index, e.what());
    team.leave();
    return;
  } catch (...) {
    team.record_error(index, "unknown exception");
    team.leave();
    return;
  }
  // Implicit barrier at region end; queued tasks are finished here.
  team.barrier_wait();
}

int resolve_team_size(const TeamContext& ctx, std::optional<int> num_threads, std::optional<bool> if_value) {
  if (num_threads && *num_threads < 1) {
    throw std::invalid_argument("num_threads must be positive, got " + std::to_string(*num_threads));
  }
  if (if_value && !*if_value) return 1;
  bool inside_team = std::any_of(ctx.stack.begin(), ctx.stack.end(), [](const TeamRecord& r) { return r.team_size > 1; });
  if (inside_team && !ctx.icv.nested_enabled) return 1;
  return num_threads.value_or(ctx.icv.requested_num_threads);
}

}  // namespace

// ---------------------------------------------------------------------------
// TeamState

TeamState::TeamState(int size) : size_(size), barrier_(static_cast<std::size_t>(size)) {
  if (size < 1) throw std::invalid_argument("team size must be positive");
}

bool TeamState::barrier_can_open() const {
  return barrier_.arrived() > 0 && barrier_.all_arrived() && queue_.empty() && running_tasks_ == 0;
}

void TeamState::barrier_wait() {
  std::unique_lock lock(mutex_);
  const auto ticket = barrier_.arrive();
  for (;;) {
    if (barrier_.passed(ticket)) return;
    if (barrier_can_open()) {
      barrier_.release();
      signal_.notify_all();
      return;
    }
    if (!queue_.empty()) {
      Task task = std::move(queue_.front());
      queue_.pop_front();
      run_task(std::move(task), lock);
      continue;
    }
    signal_.wait(lock);
  }
}

void TeamState::leave() {
  std::lock_guard lock(mutex_);
  barrier_.drop();
  aborted_ = true;
  signal_.notify_all();
}

bool TeamState::aborted() const { return aborted_; }

std::size_t TeamState::barrier_parties() const {
  std::lock_guard lock(mutex_);
  return barrier_.parties();
}

void TeamState::push_task(Task task) {
  std::lock_guard lock(mutex_);
  if (task.parent) ++task.parent->pending_children;
  queue_.push_back(std::move(task));
  signal_.notify_all();
}

void TeamState::run_undeferred(Task task) {
  std::unique_lock lock(mutex_);
  if (task.parent) ++task.parent->pending_children;
  run_task(std::move(task), lock);
}

void TeamState::taskwait(const std::shared_ptr<TaskNode>& node, bool drain_queue) {
  std::unique_lock lock(mutex_);
  for (;;) {
    const bool children_done = !node || node->pending_children == 0;
    if (children_done && (!drain_queue || queue_.empty())) return;
    if (!queue_.empty()) {
      // Newest first: keeps recursive task trees from nesting breadth-first on the stack.
      Task task = std::move(queue_.back());
      queue_.pop_back();
      run_task(std::move(task), lock);
      continue;
    }
    signal_.wait(lock);
  }
}

void TeamState::drain() {
  std::unique_lock lock(mutex_);
  while (!queue_.empty()) {
    Task task = std::move(queue_.front());
    queue_.pop_front();
    run_task(std::move(task), lock);
  }
}

std::size_t TeamState::queued_tasks() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

void TeamState::run_task(Task task, std::unique_lock<std::mutex>& lock) {
  ++running_tasks_;
  lock.unlock();

  auto node = std::make_shared<TaskNode>();
  node->explicit_task = true;
  auto& record = current_record();
  const int index = record.thread_index;
  auto saved = std::exchange(record.current_task, node);
  try {
    task.body();
  } catch (const std::exception& e) {
    record_error(index, std::string("task: ") + e.what());
  } catch (...) {
    record_error(index, "task: unknown exception");
  }
  // The body may have pushed and popped nested regions; re-fetch the record.
  current_record().current_task = std::move(saved);

  lock.lock();
  --running_tasks_;
  if (task.parent && task.parent->pending_children > 0) --task.parent->pending_children;
  signal_.notify_all();
}

std::string TeamState::construct_key(std::uint64_t seq) { return "construct:" + std::to_string(seq); }

void TeamState::construct_leave(std::uint64_t seq) {
  std::lock_guard lock(mutex_);
  auto it = table_.find(construct_key(seq));
  if (it != table_.end() && --it->second.remaining <= 0) table_.erase(it);
}

std::size_t TeamState::table_size() const {
  std::lock_guard lock(mutex_);
  return table_.size();
}

void TeamState::record_error(int thread_index, std::string what) {
  std::lock_guard lock(mutex_);
  errors_.push_back(ContainedError{thread_index, std::move(what)});
}

std::vector<ContainedError> TeamState::take_errors() {
  std::lock_guard lock(mutex_);
  return std::exchange(errors_, {});
}

// ---------------------------------------------------------------------------
// Contexts and regions

TeamContext& ensure_context() {
  auto& slot = context_slot();
  if (!slot) {
    slot = std::make_unique<TeamContext>();
    slot->icv = icv_from_environment([](const char* name) { return std::getenv(name); }, std::cerr);
    slot->stack.push_back(make_record(0, 1, std::make_shared<TeamState>(1)));
  }
  return *slot;
}

TeamRecord& current_record() { return ensure_context().top(); }

RegionOutcome parallel_run(const std::function<void()>& block, std::optional<int> num_threads,
                           std::optional<bool> if_value) {
  auto& ctx = ensure_context();
  const int size = resolve_team_size(ctx, num_threads, if_value);
  auto team = std::make_shared<TeamState>(size);

  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(size - 1));
  for (int index = 1; index < size; ++index) {
    try {
      workers.emplace_back([&block, team, size, index, stack = ctx.stack, icv = ctx.icv]() mutable {
        auto& slot = context_slot();
        slot = std::make_unique<TeamContext>();
        slot->stack = std::move(stack);
        slot->icv = icv;
        slot->stack.push_back(make_record(index, size, team));
        run_member(block, *team, index);
        slot.reset();
      });
    } catch (const std::system_error& e) {
      for (int missing = index; missing < size; ++missing) {
        team->record_error(missing, std::string("failed to start thread: ") + e.what());
        team->leave();
      }
      break;
    }
  }

  ctx.stack.push_back(make_record(0, size, team));
  run_member(block, *team, 0);
  for (auto& worker : workers) worker.join();
  // Only non-empty if members failed before reaching the closing barrier.
  drain_at_region_end(*team);
  ctx.stack.pop_back();

  RegionOutcome outcome;
  outcome.caught_errors = team->take_errors();
  outcome.tasks_left = team->queued_tasks();
  return outcome;
}

// ---------------------------------------------------------------------------
// API

void omp_set_num_threads(int n) {
  if (n < 1) throw std::invalid_argument("omp_set_num_threads: n must be >= 1, got " + std::to_string(n));
  ensure_context().icv.requested_num_threads = n;
}

int omp_get_num_threads() { return current_record().team_size; }

int omp_get_thread_num() { return current_record().thread_index; }

int omp_get_max_threads() { return ensure_context().icv.requested_num_threads; }

bool omp_in_parallel() {
  const auto& stack = ensure_context().stack;
  return std::any_of(stack.begin(), stack.end(), [](const TeamRecord& r) { return r.team_size > 1; });
}

void omp_set_nested(bool flag) { ensure_context().icv.nested_enabled = flag; }

bool omp_get_nested() { return ensure_context().icv.nested_enabled; }

double omp_get_wtime() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// ---------------------------------------------------------------------------
// Environment

int default_num_threads() {
  auto n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::optional<int> parse_num_threads_env(std::string_view text) {
  text = trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || value < 1) return std::nullopt;
  return value;
}

std::optional<bool> parse_bool_env(std::string_view text) {
  std::string lowered(trim(text));
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "true") return true;
  if (lowered == "false") return false;
  return std::nullopt;
}

Icv icv_from_environment(const EnvLookup& lookup, std::ostream& warnings) {
  Icv icv;
  icv.requested_num_threads = default_num_threads();

  if (const char* raw = lookup("OMP_NUM_THREADS")) {
    if (auto n = parse_num_threads_env(raw)) {
      icv.requested_num_threads = *n;
    } else {
      warnings << "warning: ignoring malformed OMP_NUM_THREADS='" << raw << "'\n";
    }
  }
  if (const char* raw = lookup("OMP_NESTED")) {
    if (auto flag = parse_bool_env(raw)) {
      icv.nested_enabled = *flag;
    } else {
      warnings << "warning: ignoring malformed OMP_NESTED='" << raw << "'\n";
    }
  }
  if (const char* raw = lookup("OMP_SCHEDULE")) {
    auto spec = parse_schedule_spec(raw);
    if (spec && spec->kind != ScheduleKind::runtime) {
      icv.runtime_schedule = *spec;
    } else {
      warnings << "warning: ignoring malformed OMP_SCHEDULE='" << raw << "'\n";
    }
  }
  return icv;
}

}  // namespace ompcore
