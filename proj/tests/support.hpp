#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <string_view>
#include <vector>

#include "ompcore/runtime.hpp"
#include "ompcore/worksharing.hpp"

namespace ompcore::testing {

/// Flattened indices yielded to each member of a `threads`-wide team.
inline std::vector<std::vector<std::int64_t>> collect_assignment(std::int64_t n, int threads, ScheduleSpec spec) {
  std::vector<std::vector<std::int64_t>> out(static_cast<std::size_t>(threads));
  auto outcome = parallel_run(
      [&] {
        auto& mine = out[static_cast<std::size_t>(omp_get_thread_num())];
        ScheduledRange range({LoopRange{0, n, 1}}, spec);
        for (auto idx : range) mine.push_back(idx[0]);
      },
      threads);
  if (!outcome.ok()) throw std::runtime_error(outcome.caught_errors.front().what);
  return out;
}

/// True iff the union of all members' indices is exactly {0..n-1} with no repeats.
inline bool is_partition(const std::vector<std::vector<std::int64_t>>& assignment, std::int64_t n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& mine : assignment) {
    for (auto i : mine) {
      if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)]++) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

/// Every directive string used by the example programs.
inline const std::vector<std::string_view>& example_directives() {
  static const std::vector<std::string_view> corpus = {
      "parallel",
      "parallel num_threads(2)",
      "parallel reduction(+:PI)",
      "parallel for reduction(+:PI)",
      "parallel for reduction(+:count)",
      "parallel shared(b) private(c) firstprivate(d) num_threads(4)",
      "parallel firstprivate(x)",
      "for",
      "for schedule(static, 2)",
      "for schedule(static, 2) collapse(2) lastprivate(x)",
      "sections",
      "section",
      "single",
      "single copyprivate(x)",
      "task",
      "taskwait",
      "critical",
  };
  return corpus;
}

/// Sequential reference Fibonacci.
inline std::int64_t fib_reference(int n) {
  std::int64_t a = 0, b = 1;
  for (int i = 0; i < n; ++i) {
    auto next = a + b;
    a = b;
    b = next;
  }
  return a;
}

}  // namespace ompcore::testing
