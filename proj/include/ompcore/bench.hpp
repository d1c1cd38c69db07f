#pragma once

// Thread sweeps over the kernels with CSV timing output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ompcore/schedule.hpp"

namespace ompcore {

enum class BenchKind { pi, quad, jacobi, fib, wordcount };

std::string_view to_string(BenchKind kind);
std::optional<BenchKind> bench_kind_from_string(std::string_view text);

/// size: intervals, samples, matrix dimension, n or character count.
std::int64_t default_size(BenchKind kind);

struct BenchConfig {
  BenchKind bench = BenchKind::pi;
  std::int64_t size = 0;  // 0: default_size(bench)
  std::vector<int> threads{1};
  int repeats = 10;
  ScheduleSpec schedule{};
  std::uint64_t seed = 42;
  int jacobi_max_iters = 1000;
  double jacobi_tol = 1e-6;
};

/// Throws std::invalid_argument on a non-positive size, repeat count or
/// thread count, or an empty thread list.
void validate(const BenchConfig& config);

std::int64_t effective_size(const BenchConfig& config);

/// "1,2,4" -> {1, 2, 4}.
std::vector<int> parse_thread_list(std::string_view text);

struct BenchRow {
  std::string bench;
  int threads = 0;
  int run = 0;
  double seconds = 0.0;
  std::string checksum;
};

struct BenchResult {
  std::string bench;
  int threads = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
  std::string checksum;
};

struct SweepReport {
  std::vector<BenchRow> rows;
  std::vector<BenchResult> results;
};

class ChecksumMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One warm-up run plus `repeats` timed runs per thread count. Every run is
/// checked against the serial reference; the first mismatch throws
/// ChecksumMismatch.
SweepReport sweep(const BenchConfig& config);

/// Mean and population standard deviation.
BenchResult summarize(std::string bench, int threads, const std::vector<double>& seconds, std::string checksum);

inline constexpr std::string_view kCsvHeader = "bench,threads,run,seconds,checksum";

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace ompcore
