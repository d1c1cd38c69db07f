#include "doctest.h"

#include <atomic>
#include <stdexcept>
#include <vector>

#include "ompcore/tasking.hpp"
#include "ompcore/worksharing.hpp"
#include "support.hpp"

using namespace ompcore;
using ompcore::testing::fib_reference;

namespace {

std::int64_t fib_tasks(int n) {
  if (n < 2) return n;
  std::int64_t x = 0;
  std::int64_t y = 0;
  task_submit([&x, n] { x = fib_tasks(n - 1); });
  task_submit([&y, n] { y = fib_tasks(n - 2); });
  taskwait();
  return x + y;
}

}  // namespace

TEST_CASE("fib reference values") {
  CHECK(fib_reference(0) == 0);
  CHECK(fib_reference(1) == 1);
  CHECK(fib_reference(10) == 55);
  CHECK(fib_reference(20) == 6765);
}

TEST_CASE("recursive task fib matches the reference") {
  for (int threads : {1, 2, 4, 8}) {
    for (int n = 0; n <= 20; ++n) {
      std::int64_t result = -1;
      auto outcome = parallel_run(
          [&] {
            SingleScope single;
            if (single) result = fib_tasks(n);
          },
          threads);
      CAPTURE(threads);
      CAPTURE(n);
      CHECK(outcome.ok());
      CHECK(outcome.tasks_left == 0);
      CHECK(result == fib_reference(n));
    }
  }
}

TEST_CASE("every task runs exactly once") {
  constexpr int kTasks = 1000;
  for (int threads : {1, 2, 4, 8}) {
    std::vector<std::atomic<int>> tokens(kTasks);
    auto outcome = parallel_run(
        [&] {
          SingleScope single(true);
          if (single) {
            for (int i = 0; i < kTasks; ++i) task_submit([&tokens, i] { ++tokens[static_cast<std::size_t>(i)]; });
          }
        },
        threads);
    CHECK(outcome.ok());
    CHECK(outcome.tasks_left == 0);
    int wrong = 0;
    for (auto& t : tokens) wrong += t != 1;
    CHECK(wrong == 0);
  }
}

TEST_CASE("barrier completes outstanding tasks") {
  std::atomic<int> done{0};
  parallel_run(
      [&] {
        task_submit([&] { ++done; });
        barrier();
        CHECK(done == 4);
        CHECK(pending_tasks() == 0);
      },
      4);
}

TEST_CASE("taskwait waits for the caller's children") {
  std::atomic<int> done{0};
  parallel_run(
      [&] {
        for (int i = 0; i < 10; ++i) task_submit([&] { ++done; });
        taskwait();
        CHECK(done >= 10);
      },
      3);
  CHECK(done == 30);
}

TEST_CASE("taskwait returns once the children are done") {
  std::atomic<int> siblings{0};
  std::size_t queued_after_wait = 0;
  auto outcome = parallel_run(
      [&] {
        task_submit([&] {
          task_submit([] {});
          taskwait();
          queued_after_wait = pending_tasks();
        });
        for (int i = 0; i < 5; ++i) task_submit([&] { ++siblings; });
      },
      1);
  CHECK(outcome.ok());
  CHECK(queued_after_wait == 5);
  CHECK(siblings == 5);
}

TEST_CASE("taskwait in an implicit task consumes the whole queue") {
  std::atomic<int> grandchildren{0};
  std::size_t queued_after_wait = 1;
  int seen_after_wait = 0;
  auto outcome = parallel_run(
      [&] {
        task_submit([&] {
          for (int i = 0; i < 3; ++i) task_submit([&] { ++grandchildren; });
        });
        taskwait();
        queued_after_wait = pending_tasks();
        seen_after_wait = grandchildren;
      },
      1);
  CHECK(outcome.ok());
  CHECK(queued_after_wait == 0);
  CHECK(seen_after_wait == 3);
}

TEST_CASE("deep task trees on one thread") {
  std::int64_t result = 0;
  auto outcome = parallel_run(
      [&] {
        SingleScope single;
        if (single) result = fib_tasks(27);
      },
      1);
  CHECK(outcome.ok());
  CHECK(result == fib_reference(27));
}

TEST_CASE("if(false) tasks run before submit returns") {
  parallel_run(
      [&] {
        bool ran = false;
        task_submit([&] { ran = true; }, false);
        CHECK(ran);
      },
      2);
}

TEST_CASE("tasks outside any parallel region run immediately") {
  int value = 0;
  task_submit([&] { value = 1; });
  CHECK(value == 1);
  taskwait();
  CHECK(pending_tasks() == 0);
  CHECK_THROWS_AS(task_submit([] { throw std::runtime_error("serial"); }), std::runtime_error);
  CHECK(fib_tasks(15) == fib_reference(15));
}

TEST_CASE("task failures are contained and reported") {
  std::atomic<int> ran{0};
  auto outcome = parallel_run(
      [&] {
        SingleScope single;
        if (single) {
          task_submit([] { throw std::runtime_error("task failed"); });
          for (int i = 0; i < 5; ++i) task_submit([&] { ++ran; });
        }
      },
      2);
  REQUIRE(outcome.caught_errors.size() == 1);
  CHECK(outcome.caught_errors[0].what.find("task failed") != std::string::npos);
  CHECK(ran == 5);
  CHECK(outcome.tasks_left == 0);
}

TEST_CASE("queue is quiescent after every region") {
  for (int round = 0; round < 50; ++round) {
    std::shared_ptr<TeamState> team;
    auto outcome = parallel_run(
        [&] {
          if (omp_get_thread_num() == 0) team = current_record().team;
          for (int i = 0; i < round % 7; ++i) task_submit([] {});
        },
        1 + round % 4);
    CHECK(outcome.tasks_left == 0);
    CHECK(team->queued_tasks() == 0);
  }
}
