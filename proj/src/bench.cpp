#include "ompcore/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iterator>
#include <memory>
#include <numeric>
#include <ostream>

#include "ompcore/kernels.hpp"
#include "ompcore/runtime.hpp"

namespace ompcore {

namespace {

constexpr std::string_view kBenchNames[] = {"pi", "quad", "jacobi", "fib", "wordcount"};

constexpr double kReductionTolerance = 1e-12;
constexpr double kQuadTolerance = 1e-4;

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_hex(std::uint64_t value) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Order-independent digest of a word table.
std::uint64_t table_digest(const WordTable& table) {
  std::uint64_t digest = 0;
  for (const auto& [word, count] : table) digest += fnv1a(word) * (2 * static_cast<std::uint64_t>(count) + 1);
  return digest;
}

bool close_relative(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(std::abs(want), 1e-300);
}

void mismatch(const BenchConfig& config, int threads, const std::string& got, const std::string& want) {
  throw ChecksumMismatch(std::string(to_string(config.bench)) + " with " + std::to_string(threads) +
                         " threads: result " + got + " differs from serial reference " + want);
}

struct Timed {
  double seconds = 0.0;
  std::string checksum;
};

using Job = std::function<Timed(int threads)>;

template <class Run>
auto timed(Run run) {
  const double start = omp_get_wtime();
  auto value = run();
  return std::pair{omp_get_wtime() - start, std::move(value)};
}

Job make_job(const BenchConfig& config) {
  const auto size = effective_size(config);
  auto options = [schedule = config.schedule](int threads) { return KernelOptions{threads, schedule}; };

  switch (config.bench) {
    case BenchKind::pi:
    case BenchKind::quad: {
      const bool is_pi = config.bench == BenchKind::pi;
      const double want = is_pi ? serial_pi(size) : serial_quad(size);
      return [=](int threads) {
        auto [seconds, got] = timed([&] { return is_pi ? run_pi(size, options(threads)) : run_quad(size, options(threads)); });
        const bool ok = is_pi ? close_relative(got, want, kReductionTolerance) : std::abs(got - want) <= kQuadTolerance;
        if (!ok) mismatch(config, threads, format_real(got), format_real(want));
        return Timed{seconds, format_real(got)};
      };
    }
    case BenchKind::jacobi: {
      auto system = std::make_shared<LinearSystem>(make_jacobi_system(static_cast<int>(size), config.seed));
      auto want = serial_jacobi(*system, config.jacobi_max_iters, config.jacobi_tol);
      const double want_sum = std::accumulate(want.x.begin(), want.x.end(), 0.0);
      return [=](int threads) {
        auto [seconds, got] =
            timed([&] { return run_jacobi(*system, config.jacobi_max_iters, config.jacobi_tol, options(threads)); });
        const double got_sum = std::accumulate(got.x.begin(), got.x.end(), 0.0);
        bool ok = got.iterations == want.iterations;
        for (std::size_t i = 0; ok && i < got.x.size(); ++i) ok = close_relative(got.x[i], want.x[i], kReductionTolerance);
        if (!ok) {
          mismatch(config, threads, format_real(got_sum) + " after " + std::to_string(got.iterations) + " iterations",
                   format_real(want_sum) + " after " + std::to_string(want.iterations) + " iterations");
        }
        return Timed{seconds, format_real(got_sum)};
      };
    }
    case BenchKind::fib: {
      const int n = static_cast<int>(size);
      const auto want = serial_fib(n);
      return [=](int threads) {
        auto [seconds, got] = timed([&] { return run_fib(n, options(threads)); });
        if (got != want) mismatch(config, threads, std::to_string(got), std::to_string(want));
        return Timed{seconds, std::to_string(got)};
      };
    }
    case BenchKind::wordcount: {
      auto text = std::make_shared<const std::string>(make_text(static_cast<std::size_t>(size), config.seed));
      auto want = std::make_shared<const WordTable>(serial_wordcount(*text));
      return [=](int threads) {
        auto [seconds, got] = timed([&] { return run_wordcount(*text, options(threads)); });
        if (got != *want) mismatch(config, threads, format_hex(table_digest(got)), format_hex(table_digest(*want)));
        return Timed{seconds, format_hex(table_digest(got))};
      };
    }
  }
  throw std::invalid_argument("unknown benchmark");
}

}  // namespace

std::string_view to_string(BenchKind kind) { return kBenchNames[static_cast<int>(kind)]; }

std::optional<BenchKind> bench_kind_from_string(std::string_view text) {
  for (int k = 0; k < static_cast<int>(std::size(kBenchNames)); ++k) {
    if (kBenchNames[k] == text) return static_cast<BenchKind>(k);
  }
  return std::nullopt;
}

std::int64_t default_size(BenchKind kind) {
  switch (kind) {
    case BenchKind::pi:
    case BenchKind::quad:
      return 10'000'000;
    case BenchKind::jacobi:
      return 512;
    case BenchKind::fib:
      return 25;
    case BenchKind::wordcount:
      return 1'000'000;
  }
  return 0;
}

std::int64_t effective_size(const BenchConfig& config) {
  return config.size == 0 ? default_size(config.bench) : config.size;
}

void validate(const BenchConfig& config) {
  if (config.size < 0) throw std::invalid_argument("size must be positive, got " + std::to_string(config.size));
  if (config.threads.empty()) throw std::invalid_argument("thread list is empty");
  for (int t : config.threads) {
    if (t < 1) throw std::invalid_argument("thread counts must be positive, got " + std::to_string(t));
  }
  if (config.repeats < 1) throw std::invalid_argument("repeats must be positive, got " + std::to_string(config.repeats));
  const auto size = effective_size(config);
  if (config.bench == BenchKind::fib && size > 30) throw std::invalid_argument("fib size must be <= 30");
  if (config.bench == BenchKind::jacobi && size > 1 << 15) throw std::invalid_argument("jacobi dimension too large");
}

std::vector<int> parse_thread_list(std::string_view text) {
  std::vector<int> out;
  std::size_t begin = 0;
  while (true) {
    auto end = text.find(',', begin);
    auto item = text.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || value < 1) {
      throw std::invalid_argument("invalid thread count '" + std::string(item) + "' in '" + std::string(text) + "'");
    }
    out.push_back(value);
    if (end == std::string_view::npos) break;
    begin = end + 1;
  }
  return out;
}

BenchResult summarize(std::string bench, int threads, const std::vector<double>& seconds, std::string checksum) {
  if (seconds.empty()) throw std::invalid_argument("summarize: no samples");
  const double n = static_cast<double>(seconds.size());
  const double mean = std::accumulate(seconds.begin(), seconds.end(), 0.0) / n;
  double var = 0.0;
  for (double s : seconds) var += (s - mean) * (s - mean);
  return BenchResult{std::move(bench), threads, mean, std::sqrt(var / n), std::move(checksum)};
}

SweepReport sweep(const BenchConfig& config) {
  validate(config);
  const std::string name(to_string(config.bench));
  auto job = make_job(config);
  SweepReport report;
  for (int threads : config.threads) {
    job(threads);
    std::vector<double> samples;
    std::string checksum;
    for (int run = 0; run < config.repeats; ++run) {
      auto timed_run = job(threads);
      samples.push_back(timed_run.seconds);
      report.rows.push_back(BenchRow{name, threads, run, timed_run.seconds, timed_run.checksum});
      checksum = std::move(timed_run.checksum);
    }
    report.results.push_back(summarize(name, threads, samples, checksum));
  }
  return report;
}

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& row : rows) {
    out << row.bench << ',' << row.threads << ',' << row.run << ',' << format_real(row.seconds) << ',' << row.checksum
        << '\n';
  }
}

}  // namespace ompcore
