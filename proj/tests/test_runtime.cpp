#include "doctest.h"

#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ompcore/runtime.hpp"
#include "ompcore/worksharing.hpp"

using namespace ompcore;

TEST_CASE("initial thread lives in an implicit one-thread region") {
  CHECK(omp_get_num_threads() == 1);
  CHECK(omp_get_thread_num() == 0);
  CHECK_FALSE(omp_in_parallel());
  CHECK(ensure_context().depth() == 1);
}

TEST_CASE("parallel_run gives every member a distinct index") {
  std::mutex m;
  std::multiset<int> seen;
  std::set<int> sizes;
  auto outcome = parallel_run(
      [&] {
        std::lock_guard lock(m);
        seen.insert(omp_get_thread_num());
        sizes.insert(omp_get_num_threads());
        CHECK(omp_in_parallel());
      },
      4);
  CHECK(outcome.ok());
  CHECK(outcome.tasks_left == 0);
  CHECK(seen == std::multiset<int>{0, 1, 2, 3});
  CHECK(sizes == std::set<int>{4});
  CHECK(ensure_context().depth() == 1);
  CHECK_FALSE(omp_in_parallel());
}

TEST_CASE("team size follows the thread-count ICV") {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  std::atomic<int> members{0};
  parallel_run([&] { ++members; });
  CHECK(members == 3);
  omp_set_num_threads(saved);
  CHECK_THROWS_AS(omp_set_num_threads(0), std::invalid_argument);
}

TEST_CASE("if(false) and bad thread counts") {
  std::atomic<int> members{0};
  parallel_run([&] { ++members; }, 8, false);
  CHECK(members == 1);
  CHECK_THROWS_AS(parallel_run([] {}, 0), std::invalid_argument);
  CHECK_THROWS_AS(parallel_run([] {}, -2), std::invalid_argument);
}

TEST_CASE("nested regions serialize unless nesting is enabled") {
  const bool saved = omp_get_nested();
  std::mutex m;
  std::set<std::pair<int, int>> pairs;
  std::set<int> inner_sizes;
  auto body = [&] {
    const int outer = omp_get_thread_num();
    parallel_run(
        [&] {
          std::lock_guard lock(m);
          pairs.insert({outer, omp_get_thread_num()});
          inner_sizes.insert(omp_get_num_threads());
        },
        2);
    // Own index restored after the inner region.
    CHECK(omp_get_thread_num() == outer);
  };

  omp_set_nested(false);
  parallel_run(body, 2);
  CHECK(pairs == std::set<std::pair<int, int>>{{0, 0}, {1, 0}});
  CHECK(inner_sizes == std::set<int>{1});

  pairs.clear();
  inner_sizes.clear();
  omp_set_nested(true);
  parallel_run(body, 2);
  CHECK(pairs == std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(inner_sizes == std::set<int>{2});
  omp_set_nested(saved);
}

TEST_CASE("a serialized nested region inside a team still has its own barrier") {
  std::atomic<int> hits{0};
  parallel_run(
      [&] {
        parallel_run([&] {
          barrier();
          ++hits;
        });
      },
      3);
  CHECK(hits == 3);
}

TEST_CASE("containment: a failing member is reported and the team completes") {
  std::atomic<int> finished{0};
  auto outcome = parallel_run(
      [&] {
        if (omp_get_thread_num() == 2) throw std::runtime_error("boom");
        barrier();
        ++finished;
      },
      4);
  REQUIRE(outcome.caught_errors.size() == 1);
  CHECK(outcome.caught_errors[0].thread_index == 2);
  CHECK(outcome.caught_errors[0].what == "boom");
  CHECK(finished == 3);

  std::atomic<int> after{0};
  auto next = parallel_run([&] { ++after; }, 4);
  CHECK(next.ok());
  CHECK(after == 4);
}

TEST_CASE("containment inside a worksharing loop") {
  auto outcome = parallel_run(
      [&] {
        ScheduledRange range({LoopRange{0, 100, 1}}, ScheduleSpec{ScheduleKind::dynamic, 3});
        for (auto idx : range) {
          if (idx[0] == 50) throw std::logic_error("bad iteration");
        }
      },
      4);
  CHECK(outcome.caught_errors.size() == 1);
}

TEST_CASE("omp_get_wtime is monotonic") {
  const double a = omp_get_wtime();
  const double b = omp_get_wtime();
  CHECK(b >= a);
}

TEST_CASE("environment parsing") {
  CHECK(parse_num_threads_env("4") == 4);
  CHECK(parse_num_threads_env(" 12 ") == 12);
  CHECK_FALSE(parse_num_threads_env("0"));
  CHECK_FALSE(parse_num_threads_env("-3"));
  CHECK_FALSE(parse_num_threads_env("4,2"));
  CHECK_FALSE(parse_num_threads_env(""));
  CHECK(parse_bool_env("TRUE") == true);
  CHECK(parse_bool_env("false") == false);
  CHECK_FALSE(parse_bool_env("yes"));

  std::map<std::string, std::string> env = {
      {"OMP_NUM_THREADS", "6"}, {"OMP_NESTED", "true"}, {"OMP_SCHEDULE", "guided,4"}};
  auto lookup = [&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  std::ostringstream warnings;
  auto icv = icv_from_environment(lookup, warnings);
  CHECK(icv.requested_num_threads == 6);
  CHECK(icv.nested_enabled);
  CHECK(icv.runtime_schedule == ScheduleSpec{ScheduleKind::guided, 4});
  CHECK(warnings.str().empty());

  env = {{"OMP_NUM_THREADS", "many"}, {"OMP_NESTED", "maybe"}, {"OMP_SCHEDULE", "sometimes"}};
  std::ostringstream noisy;
  auto fallback = icv_from_environment(lookup, noisy);
  CHECK(fallback.requested_num_threads == default_num_threads());
  CHECK_FALSE(fallback.nested_enabled);
  CHECK(fallback.runtime_schedule == ScheduleSpec{});
  CHECK(noisy.str().find("OMP_NUM_THREADS") != std::string::npos);
  CHECK(noisy.str().find("OMP_NESTED") != std::string::npos);
  CHECK(noisy.str().find("OMP_SCHEDULE") != std::string::npos);

  env.clear();
  std::ostringstream quiet;
  CHECK(icv_from_environment(lookup, quiet).requested_num_threads == default_num_threads());
  CHECK(quiet.str().empty());
}

TEST_CASE("schedule spec strings") {
  CHECK(parse_schedule_spec("static") == ScheduleSpec{ScheduleKind::static_, std::nullopt});
  CHECK(parse_schedule_spec("Dynamic, 8") == ScheduleSpec{ScheduleKind::dynamic, 8});
  CHECK_FALSE(parse_schedule_spec("static,0"));
  CHECK_FALSE(parse_schedule_spec("fast"));
  CHECK_FALSE(parse_schedule_spec("static,x"));
  CHECK(to_string(ScheduleSpec{ScheduleKind::guided, 3}) == "guided,3");
}
