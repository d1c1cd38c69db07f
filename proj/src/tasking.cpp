#include "ompcore/tasking.hpp"

#include <memory>
#include <utility>

namespace ompcore {

void task_submit(std::function<void()> body, std::optional<bool> if_value) {
  auto& ctx = ensure_context();
  auto& record = ctx.top();

  if (ctx.depth() == 1) {
    // Nothing would drain a queue here, so the task is undeferred.
    auto node = std::make_shared<TaskNode>();
    node->explicit_task = true;
    auto saved = std::exchange(record.current_task, std::move(node));
    struct Restore {
      std::shared_ptr<TaskNode> saved;
      ~Restore() { current_record().current_task = std::move(saved); }
    } restore{std::move(saved)};
    body();
    return;
  }

  Task task{std::move(body), record.current_task};
  if (if_value && !*if_value) {
    record.team->run_undeferred(std::move(task));
  } else {
    record.team->push_task(std::move(task));
  }
}

void taskwait() {
  auto& record = current_record();
  auto team = record.team;
  auto node = record.current_task;
  // Implicit tasks consume the whole queue; explicit tasks only wait for their
  // children, which keeps recursive task trees from nesting on one stack.
  team->taskwait(node, !node || !node->explicit_task);
}

void drain_at_region_end(TeamState& team) { team.drain(); }

std::size_t pending_tasks() { return current_record().team->queued_tasks(); }

}  // namespace ompcore
