// Acceptance checks: one PASS/FAIL/SKIPPED line per criterion.
// Exit status is nonzero iff some criterion failed.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "example_programs.hpp"
#include "ompcore/bench.hpp"
#include "ompcore/data_env.hpp"
#include "ompcore/directive.hpp"
#include "ompcore/kernels.hpp"
#include "ompcore/tasking.hpp"
#include "ompcore/transformer.hpp"
#include "ompcore/worksharing.hpp"
#include "support.hpp"

using namespace ompcore;
using namespace ompcore::testing;

namespace {

enum class Verdict { pass, fail, skipped };

struct Outcome {
  Verdict verdict = Verdict::pass;
  std::string detail;
};

Outcome pass(std::string detail) { return {Verdict::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Verdict::fail, std::move(detail)}; }
Outcome check(bool ok, std::string detail) { return {ok ? Verdict::pass : Verdict::fail, std::move(detail)}; }

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

/// Runs `body`; a criterion with a time budget fails when it is exceeded.
bool run_criterion(int id, const char* name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = fail(std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (outcome.verdict == Verdict::pass && budget_seconds > 0 && elapsed > budget_seconds) {
    outcome = fail(outcome.detail + "; over the " + fmt("%.0f", budget_seconds) + " s budget");
  }
  const char* label = outcome.verdict == Verdict::pass ? "PASS" : outcome.verdict == Verdict::fail ? "FAIL" : "SKIPPED";
  std::printf("criterion %2d %-7s %-22s %s (%.2f s)\n", id, label, name, outcome.detail.c_str(), elapsed);
  std::fflush(stdout);
  return outcome.verdict != Verdict::fail;
}

// 1 -------------------------------------------------------------------------

Outcome directive_corpus() {
  for (auto text : example_directives()) {
    try {
      parse(text);
    } catch (const DirectiveError& e) {
      return fail("'" + std::string(text) + "' rejected: " + e.what());
    }
  }
  try {
    parse("single copyprivate(x) nowait");
    return fail("'single copyprivate(x) nowait' accepted");
  } catch (const DirectiveError&) {
  }
  return pass(std::to_string(example_directives().size()) + " directives parse; copyprivate+nowait rejected");
}

// 2 -------------------------------------------------------------------------

Outcome partition_grid() {
  int combinations = 0;
  int broken = 0;
  for (std::int64_t n : {0, 1, 7, 100, 101}) {
    for (int threads : {1, 2, 3, 8}) {
      for (std::optional<std::int64_t> chunk : {std::optional<std::int64_t>(1), std::optional<std::int64_t>(2),
                                                std::optional<std::int64_t>(5), std::optional<std::int64_t>()}) {
        for (auto kind : {ScheduleKind::static_, ScheduleKind::dynamic, ScheduleKind::guided}) {
          broken += !is_partition(collect_assignment(n, threads, ScheduleSpec{kind, chunk}), n);
          ++combinations;
        }
      }
    }
  }
  return check(broken == 0 && combinations >= 180,
               std::to_string(combinations) + " combinations, " + std::to_string(broken) + " not partitions");
}

// 3 -------------------------------------------------------------------------

Outcome static_oracle() {
  const std::vector<std::vector<std::int64_t>> expected = {
      {0, 1, 8, 9, 16, 17}, {2, 3, 10, 11, 18, 19}, {4, 5, 12, 13}, {6, 7, 14, 15}};
  const auto got = collect_assignment(20, 4, ScheduleSpec{ScheduleKind::static_, 2});
  return check(got == expected, "N=20 chunk=2 T=4 round-robin table");
}

// 4 -------------------------------------------------------------------------

Outcome exactly_once() {
  std::mt19937_64 rng(4);
  const int team_sizes[] = {2, 4, 8};
  int violations = 0;
  for (int run = 0; run < 1000; ++run) {
    const int threads = team_sizes[run % 3];
    const int ids = std::uniform_int_distribution<int>(3, 8)(rng);
    const bool nowait = rng() % 2 == 0;
    std::vector<std::atomic<int>> grants(static_cast<std::size_t>(ids));
    std::atomic<int> single_grants{0};
    auto outcome = parallel_run(
        [&] {
          {
            auto scope = sections_begin(ids, nowait);
            for (int id = 0; id < ids; ++id) {
              if (section_try(scope, id)) ++grants[static_cast<std::size_t>(id)];
            }
          }
          if (SingleScope single(nowait); single) ++single_grants;
        },
        threads);
    bool ok = outcome.ok() && single_grants == 1;
    for (auto& g : grants) ok = ok && g == 1;
    violations += !ok;
  }
  return check(violations == 0, "1000 runs, " + std::to_string(violations) + " with a grant count other than 1");
}

// 5 -------------------------------------------------------------------------

template <class T>
T sequential_fold(ReductionOp op, T initial, const std::vector<T>& values) {
  T acc = initial;
  for (const auto& v : values) acc = reduction_combine(op, acc, v);
  return acc;
}

template <class T>
T parallel_fold(ReductionOp op, T initial, const std::vector<T>& values, int threads, ScheduleSpec spec) {
  T target = initial;
  auto outcome = parallel_run(
      [&] {
        auto slot = reduction_begin(op, target);
        ScheduledRange range({LoopRange{0, static_cast<std::int64_t>(values.size()), 1}}, spec, true);
        for (auto idx : range) slot.accumulate(values[static_cast<std::size_t>(idx[0])]);
        reduction_end(slot);
      },
      threads);
  if (!outcome.ok()) throw std::runtime_error(outcome.caught_errors.front().what);
  return target;
}

Outcome reduction_equivalence() {
  std::mt19937_64 rng(5);
  const int team_sizes[] = {1, 2, 3, 4, 8};
  const ScheduleSpec specs[] = {{ScheduleKind::static_, std::nullopt}, {ScheduleKind::dynamic, 3}, {ScheduleKind::guided, 2}};
  int mismatches = 0;
  int vectors = 0;
  double worst_relative = 0.0;

  auto draw = [&](int k) {
    const int threads = team_sizes[k % 5];
    const auto spec = specs[k % 3];
    const auto len = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 64)(rng));
    return std::tuple{threads, spec, len};
  };

  for (auto op : {ReductionOp::add, ReductionOp::mul, ReductionOp::min, ReductionOp::max, ReductionOp::bit_and,
                  ReductionOp::bit_or, ReductionOp::bit_xor, ReductionOp::logical_and, ReductionOp::logical_or}) {
    for (int k = 0; k < 200; ++k, ++vectors) {
      auto [threads, spec, len] = draw(k);
      if (op == ReductionOp::logical_and || op == ReductionOp::logical_or) {
        std::vector<bool> flags(len);
        for (std::size_t i = 0; i < len; ++i) flags[i] = rng() % 5 != 0;
        std::vector<char> values(flags.begin(), flags.end());
        for (char initial : {char{0}, char{1}}) {
          mismatches += parallel_fold(op, initial, values, threads, spec) != sequential_fold(op, initial, values);
        }
        continue;
      }
      std::vector<std::int64_t> ints(len);
      const std::int64_t bound = op == ReductionOp::mul ? 3 : 1'000'000;
      for (auto& v : ints) v = std::uniform_int_distribution<std::int64_t>(-bound, bound)(rng);
      const std::int64_t initial = op == ReductionOp::mul ? 1 : std::uniform_int_distribution<std::int64_t>(-9, 9)(rng);
      mismatches += parallel_fold(op, initial, ints, threads, spec) != sequential_fold(op, initial, ints);

      if (op == ReductionOp::add || op == ReductionOp::mul || op == ReductionOp::min || op == ReductionOp::max) {
        std::vector<double> reals(len);
        for (auto& v : reals) v = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
        const double want = sequential_fold(op, op == ReductionOp::mul ? 1.0 : 0.0, reals);
        const double got = parallel_fold(op, op == ReductionOp::mul ? 1.0 : 0.0, reals, threads, spec);
        if (op == ReductionOp::min || op == ReductionOp::max) {
          mismatches += got != want;
        } else {
          const double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
          worst_relative = std::max(worst_relative, rel);
          mismatches += rel > 1e-12;
        }
      }
    }
  }
  return check(mismatches == 0, std::to_string(vectors) + " vectors over 9 operators, " + std::to_string(mismatches) +
                                    " mismatches, worst float relative error " + fmt("%.1e", worst_relative));
}

// 6 -------------------------------------------------------------------------

std::int64_t fib_tasks(int n) {
  if (n < 2) return n;
  std::int64_t x = 0;
  std::int64_t y = 0;
  task_submit([&x, n] { x = fib_tasks(n - 1); });
  task_submit([&y, n] { y = fib_tasks(n - 2); });
  taskwait();
  return x + y;
}

Outcome tasking() {
  int wrong = 0;
  int not_quiescent = 0;
  auto quiescent = [](const RegionOutcome& outcome, const std::shared_ptr<TeamState>& team) {
    return outcome.tasks_left == 0 && team && team->queued_tasks() == 0;
  };
  for (int threads : {1, 2, 4, 8}) {
    for (int n = 0; n <= 20; ++n) {
      std::int64_t result = -1;
      std::shared_ptr<TeamState> team;
      auto outcome = parallel_run(
          [&] {
            if (omp_get_thread_num() == 0) team = current_record().team;
            if (SingleScope single; single) result = fib_tasks(n);
          },
          threads);
      wrong += !outcome.ok() || result != fib_reference(n);
      not_quiescent += !quiescent(outcome, team);
    }
  }

  int token_errors = 0;
  for (int threads : {1, 2, 4, 8}) {
    std::vector<std::atomic<int>> tokens(1000);
    std::shared_ptr<TeamState> team;
    auto outcome = parallel_run(
        [&] {
          if (omp_get_thread_num() == 0) team = current_record().team;
          if (SingleScope single(true); single) {
            for (std::size_t i = 0; i < tokens.size(); ++i) task_submit([&tokens, i] { ++tokens[i]; });
          }
        },
        threads);
    for (auto& t : tokens) token_errors += t != 1;
    not_quiescent += !quiescent(outcome, team);
  }
  return check(wrong == 0 && token_errors == 0 && not_quiescent == 0,
               "fib 0..20 x T{1,2,4,8}: " + std::to_string(wrong) + " wrong; 1000-token: " +
                   std::to_string(token_errors) + " errors; " + std::to_string(not_quiescent) +
                   " non-quiescent regions");
}

// 7 -------------------------------------------------------------------------

Outcome kernels() {
  std::vector<std::string> problems;
  std::ostringstream detail;

  const double pi = run_pi(1'000'000, {4, {}});
  const double pi_error = std::abs(pi - std::numbers::pi);
  if (pi_error > 1e-9) problems.push_back("pi");
  detail << "pi err " << fmt("%.1e", pi_error);

  const double quad = run_quad(10'000'000, {4, {}});
  const double quad_error = std::abs(quad - std::atan(500.0) / std::numbers::pi);
  if (quad_error > 1e-4) problems.push_back("quad");
  detail << ", quad err " << fmt("%.1e", quad_error);

  const auto system = make_jacobi_system(128, 42);
  const auto jacobi = run_jacobi(system, 1000, 1e-7, {4, {}});
  const double residual = residual_norm(system, jacobi.x);
  if (residual > 1e-5) problems.push_back("jacobi");
  detail << ", jacobi residual " << fmt("%.1e", residual) << " (tol 1e-7, " << jacobi.iterations << " iterations)";

  const auto text = make_text(1'000'000, 42);
  const auto reference = serial_wordcount(text);
  for (int threads : {1, 2, 8}) {
    if (run_wordcount(text, {threads, {}}) != reference) {
      problems.push_back("wordcount T=" + std::to_string(threads));
    }
  }
  detail << ", wordcount " << reference.size() << " distinct words";

  for (const auto& p : problems) detail << "; FAILED " << p;
  return check(problems.empty(), detail.str());
}

// 8 -------------------------------------------------------------------------

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(OMPCORE_GOLDEN_DIR) + "/" + name + ".txt");
  if (!in) throw std::runtime_error("missing golden file " + name);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Outcome golden_plans() {
  int matched = 0;
  std::string differing;
  const auto programs = example_programs();
  for (const auto& program : programs) {
    if (render_plan(plan_sequence(program.items, program.params)) == read_golden(program.name)) {
      ++matched;
    } else {
      differing += " " + program.name;
    }
  }
  return check(differing.empty(), std::to_string(matched) + "/" + std::to_string(programs.size()) +
                                       " lowerings match" + (differing.empty() ? "" : "; differ:" + differing));
}

// 9 -------------------------------------------------------------------------

Outcome scaling() {
  const unsigned cores = std::thread::hardware_concurrency();
  if (cores < 8) {
    return {Verdict::skipped, "needs >= 8 logical cores, found " + std::to_string(cores)};
  }
  auto speedup = [](BenchKind kind) {
    BenchConfig config;
    config.bench = kind;
    config.threads = {1, 8};
    config.repeats = 10;
    const auto report = sweep(config);
    return report.results[0].mean_seconds / report.results[1].mean_seconds;
  };
  const double pi = speedup(BenchKind::pi);
  const double words = speedup(BenchKind::wordcount);
  return check(pi >= 3.0 && words >= 2.5,
               "pi " + fmt("%.2fx", pi) + " (>= 3x), wordcount " + fmt("%.2fx", words) + " (>= 2.5x) at 8 threads");
}

// 10 ------------------------------------------------------------------------

Outcome containment() {
  std::atomic<int> finished{0};
  auto failed = parallel_run(
      [&] {
        if (omp_get_thread_num() == 2) throw std::runtime_error("deliberate failure");
        barrier();
        ++finished;
      },
      4);
  const bool one_error = failed.caught_errors.size() == 1 && failed.caught_errors[0].what == "deliberate failure";

  std::atomic<int> after{0};
  long sum = 0;
  auto next = parallel_run(
      [&] {
        auto slot = reduction_begin(ReductionOp::add, sum);
        slot.accumulate(omp_get_thread_num());
        reduction_end(slot);
        barrier();
        ++after;
      },
      4);
  const bool later_ok = next.ok() && after == 4 && sum == 6 && run_fib(15, {4, {}}) == 610;
  return check(one_error && finished == 3 && later_ok,
               std::to_string(failed.caught_errors.size()) + " contained error(s), " + std::to_string(finished.load()) +
                   "/3 survivors finished, later regions " + (later_ok ? "functional" : "broken"));
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run_criterion(1, "directive corpus", 1.0, directive_corpus);
  ok &= run_criterion(2, "partition grid", 30.0, partition_grid);
  ok &= run_criterion(3, "static schedule oracle", 0, static_oracle);
  ok &= run_criterion(4, "exactly-once", 0, exactly_once);
  ok &= run_criterion(5, "reduction equivalence", 0, reduction_equivalence);
  ok &= run_criterion(6, "tasking", 0, tasking);
  ok &= run_criterion(7, "kernel correctness", 0, kernels);
  ok &= run_criterion(8, "plan golden files", 0, golden_plans);
  ok &= run_criterion(9, "scaling", 300.0, scaling);
  ok &= run_criterion(10, "containment", 0, containment);
  return ok ? 0 : 1;
}
