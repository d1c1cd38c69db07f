#include "ompcore/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <unordered_map>

#include "ompcore/data_env.hpp"
#include "ompcore/runtime.hpp"
#include "ompcore/tasking.hpp"
#include "ompcore/worksharing.hpp"

namespace ompcore {

namespace {

void run_region(const std::function<void()>& body, const KernelOptions& options) {
  auto outcome = parallel_run(body, options.threads);
  if (!outcome.ok()) {
    const auto& first = outcome.caught_errors.front();
    throw KernelError("kernel failed in thread " + std::to_string(first.thread_index) + ": " + first.what);
  }
}

void require_positive(std::int64_t n, const char* what) {
  if (n < 1) throw std::invalid_argument(std::string(what) + " must be >= 1, got " + std::to_string(n));
}

LoopBounds flat_range(std::int64_t n) { return LoopBounds{LoopRange{0, n, 1}}; }

double pi_term(std::int64_t k, double w) {
  const double local = (static_cast<double>(k) + 0.5) * w;
  return 4.0 / (1.0 + local * local);
}

double quad_step(std::int64_t n) { return 10.0 / static_cast<double>(n); }

/// Sum of f over the midpoints k in [0, n) with a worksharing loop and a `+` reduction.
template <class F>
double reduce_sum(std::int64_t n, const KernelOptions& options, F f) {
  double total = 0.0;
  run_region(
      [&] {
        auto slot = reduction_begin(ReductionOp::add, total);
        ScheduledRange range(flat_range(n), options.schedule, /*nowait=*/true);
        while (auto chunk = range.next_chunk()) {
          double sum = 0.0;
          for (auto k = chunk->begin; k < chunk->end; ++k) sum += f(k);
          slot.accumulate(sum);
        }
        reduction_end(slot);
      },
      options);
  return total;
}

void check_system(const LinearSystem& system) {
  if (system.dim < 1) throw std::invalid_argument("jacobi: dimension must be >= 1");
  const auto n = static_cast<std::size_t>(system.dim);
  if (system.a.size() != n * n || system.b.size() != n) throw std::invalid_argument("jacobi: matrix/vector size mismatch");
  for (int i = 0; i < system.dim; ++i) {
    if (system.at(i, i) == 0.0) throw std::invalid_argument("jacobi: zero on the diagonal at row " + std::to_string(i));
  }
}

void check_iteration_args(int max_iters, double tol) {
  if (max_iters < 1) throw std::invalid_argument("jacobi: max_iters must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("jacobi: tolerance must be >= 0");
}

std::vector<double> jacobi_start(const LinearSystem& system) {
  std::vector<double> x(system.b.size());
  for (int i = 0; i < system.dim; ++i) x[i] = system.b[i] / system.at(i, i);
  return x;
}

/// New value of row `i`; returns the absolute change.
double jacobi_row(const LinearSystem& system, const std::vector<double>& x, std::vector<double>& next, int i) {
  const double* row = system.a.data() + static_cast<std::size_t>(i) * system.dim;
  double sum = 0.0;
  for (int j = 0; j < system.dim; ++j) {
    if (j != i) sum += row[j] * x[j];
  }
  next[i] = (system.b[i] - sum) / row[i];
  return std::abs(next[i] - x[i]);
}

std::int64_t fib_task(int n) {
  if (n < 2) return n;
  std::int64_t i = 0;
  std::int64_t j = 0;
  task_submit([&i, n] { i = fib_task(n - 1); });
  task_submit([&j, n] { j = fib_task(n - 2); });
  taskwait();
  return i + j;
}

void check_fib_arg(int n) {
  if (n < 0 || n > 30) throw std::invalid_argument("fib: n must be in [0, 30], got " + std::to_string(n));
}

bool is_blank(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

template <class Visit>
void for_each_word(std::string_view text, Visit visit) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_blank(text[i])) ++i;
    const auto begin = i;
    while (i < text.size() && !is_blank(text[i])) ++i;
    if (i > begin) visit(text.substr(begin, i - begin));
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(begin, end - begin));
    begin = end + 1;
  }
  return lines;
}

using ViewCounts = std::unordered_map<std::string_view, std::int64_t>;

WordTable to_table(const ViewCounts& counts) {
  WordTable table;
  for (const auto& [word, count] : counts) table.emplace(word, count);
  return table;
}

}  // namespace

double run_pi(std::int64_t n, const KernelOptions& options) {
  require_positive(n, "pi: interval count");
  const double w = 1.0 / static_cast<double>(n);
  return reduce_sum(n, options, [w](std::int64_t k) { return pi_term(k, w); }) * w;
}

double serial_pi(std::int64_t n) {
  require_positive(n, "pi: interval count");
  const double w = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::int64_t k = 0; k < n; ++k) sum += pi_term(k, w);
  return sum * w;
}

double quad_integrand(double x) { return 50.0 / (std::numbers::pi * (2500.0 * x * x + 1.0)); }

double run_quad(std::int64_t n, const KernelOptions& options) {
  require_positive(n, "quad: sample count");
  const double h = quad_step(n);
  return reduce_sum(n, options, [h](std::int64_t k) { return quad_integrand((static_cast<double>(k) + 0.5) * h); }) * h;
}

double serial_quad(std::int64_t n) {
  require_positive(n, "quad: sample count");
  const double h = quad_step(n);
  double sum = 0.0;
  for (std::int64_t k = 0; k < n; ++k) sum += quad_integrand((static_cast<double>(k) + 0.5) * h);
  return sum * h;
}

LinearSystem make_jacobi_system(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("jacobi: dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LinearSystem system{dim, std::vector<double>(static_cast<std::size_t>(dim) * dim), std::vector<double>(dim)};
  for (int i = 0; i < dim; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < dim; ++j) {
      if (j == i) continue;
      const double v = unit(rng);
      system.a[static_cast<std::size_t>(i) * dim + j] = v;
      row_sum += v;
    }
    system.a[static_cast<std::size_t>(i) * dim + i] = row_sum + 1.0;
  }
  for (auto& v : system.b) v = unit(rng);
  return system;
}

LinearSystem identity_system(std::vector<double> b) {
  const int dim = static_cast<int>(b.size());
  LinearSystem system{dim, std::vector<double>(b.size() * b.size()), std::move(b)};
  for (int i = 0; i < dim; ++i) system.a[static_cast<std::size_t>(i) * dim + i] = 1.0;
  return system;
}

JacobiResult run_jacobi(const LinearSystem& system, int max_iters, double tol, const KernelOptions& options) {
  check_system(system);
  check_iteration_args(max_iters, tol);
  const int n = system.dim;
  std::vector<double> x = jacobi_start(system);
  std::vector<double> next(x.size());
  double update = 0.0;
  JacobiResult result;
  bool done = false;

  run_region(
      [&] {
        while (!done) {
          {
            auto slot = reduction_begin(ReductionOp::max, update);
            ScheduledRange rows(flat_range(n), options.schedule, /*nowait=*/true);
            while (auto chunk = rows.next_chunk()) {
              for (auto i = chunk->begin; i < chunk->end; ++i) {
                slot.accumulate(jacobi_row(system, x, next, static_cast<int>(i)));
              }
            }
            reduction_end(slot);
          }
          barrier();
          if (SingleScope single; single) {
            x.swap(next);
            ++result.iterations;
            result.error = update;
            update = 0.0;
            done = result.error < tol || result.iterations >= max_iters;
          }
        }
      },
      options);

  result.x = std::move(x);
  return result;
}

JacobiResult serial_jacobi(const LinearSystem& system, int max_iters, double tol) {
  check_system(system);
  check_iteration_args(max_iters, tol);
  std::vector<double> x = jacobi_start(system);
  std::vector<double> next(x.size());
  JacobiResult result;
  do {
    double update = 0.0;
    for (int i = 0; i < system.dim; ++i) update = std::max(update, jacobi_row(system, x, next, i));
    x.swap(next);
    ++result.iterations;
    result.error = update;
  } while (result.error >= tol && result.iterations < max_iters);
  result.x = std::move(x);
  return result;
}

double residual_norm(const LinearSystem& system, const std::vector<double>& x) {
  check_system(system);
  if (x.size() != system.b.size()) throw std::invalid_argument("jacobi: solution size mismatch");
  double norm = 0.0;
  for (int i = 0; i < system.dim; ++i) {
    double sum = 0.0;
    for (int j = 0; j < system.dim; ++j) sum += system.at(i, j) * x[j];
    norm = std::max(norm, std::abs(sum - system.b[i]));
  }
  return norm;
}

std::int64_t run_fib(int n, const KernelOptions& options) {
  check_fib_arg(n);
  std::int64_t result = 0;
  run_region(
      [&] {
        if (SingleScope single; single) result = fib_task(n);
      },
      options);
  return result;
}

std::int64_t serial_fib(int n) {
  check_fib_arg(n);
  std::int64_t a = 0;
  std::int64_t b = 1;
  for (int k = 0; k < n; ++k) {
    const auto sum = a + b;
    a = b;
    b = sum;
  }
  return a;
}

std::string make_text(std::size_t chars, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(3, 10);
  std::uniform_int_distribution<int> letter(0, 25);
  std::bernoulli_distribution newline(0.1);
  std::string text;
  text.reserve(chars + 11);
  while (text.size() < chars) {
    const int len = length(rng);
    for (int k = 0; k < len; ++k) text.push_back(static_cast<char>('a' + letter(rng)));
    text.push_back(newline(rng) ? '\n' : ' ');
  }
  text.resize(chars);
  return text;
}

WordTable run_wordcount(std::string_view text, const KernelOptions& options) {
  const auto lines = split_lines(text);
  ViewCounts count;
  run_region(
      [&] {
        ViewCounts local_count;
        {
          ScheduledRange range(flat_range(static_cast<std::int64_t>(lines.size())), options.schedule);
          while (auto chunk = range.next_chunk()) {
            for (auto i = chunk->begin; i < chunk->end; ++i) {
              for_each_word(lines[static_cast<std::size_t>(i)], [&](std::string_view word) { ++local_count[word]; });
            }
          }
        }
        CriticalScope critical;
        for (const auto& [word, n] : local_count) count[word] += n;
      },
      options);
  return to_table(count);
}

WordTable serial_wordcount(std::string_view text) {
  ViewCounts count;
  for_each_word(text, [&](std::string_view word) { ++count[word]; });
  return to_table(count);
}

}  // namespace ompcore
