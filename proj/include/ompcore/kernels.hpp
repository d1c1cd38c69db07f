#pragma once

// Benchmark kernels over the runtime, each with a serial reference.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ompcore/schedule.hpp"

namespace ompcore {

class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Team size (nullopt: the num-threads ICV) and loop schedule for a kernel run.
struct KernelOptions {
  std::optional<int> threads;
  ScheduleSpec schedule{};
};

/// Midpoint rule for the integral of 4/(1+x^2) over [0,1] with n intervals.
double run_pi(std::int64_t n, const KernelOptions& options = {});
double serial_pi(std::int64_t n);

/// Average-value estimate of the integral of 50/(pi(2500x^2+1)) over [0,10]
/// from n midpoint samples.
double run_quad(std::int64_t n, const KernelOptions& options = {});
double serial_quad(std::int64_t n);
double quad_integrand(double x);

/// Dense row-major system A x = b.
struct LinearSystem {
  int dim = 0;
  std::vector<double> a;
  std::vector<double> b;

  double at(int row, int col) const { return a[static_cast<std::size_t>(row) * dim + col]; }
};

/// Off-diagonals uniform in [0,1), diagonal = row abs-sum + 1, b uniform in [0,1).
LinearSystem make_jacobi_system(int dim, std::uint64_t seed);
LinearSystem identity_system(std::vector<double> b);

struct JacobiResult {
  std::vector<double> x;
  double error = 0.0;  // max-norm of the last update
  int iterations = 0;
};

/// Starts from x = b / diag(A) and iterates until the max-norm update drops
/// below `tol` or `max_iters` updates were made.
JacobiResult run_jacobi(const LinearSystem& system, int max_iters, double tol, const KernelOptions& options = {});
JacobiResult serial_jacobi(const LinearSystem& system, int max_iters, double tol);

/// max_i |(A x - b)_i|
double residual_norm(const LinearSystem& system, const std::vector<double>& x);

/// Recursive Fibonacci with two tasks and a taskwait per call, started by
/// one member of a parallel region.
std::int64_t run_fib(int n, const KernelOptions& options = {});
std::int64_t serial_fib(int n);

using WordTable = std::map<std::string, std::int64_t>;

/// Lowercase words of 3 to 10 letters; each word is followed by a newline
/// with probability 0.1, otherwise by a space. Exactly `chars` bytes long.
std::string make_text(std::size_t chars, std::uint64_t seed);

/// Per-member tables over a worksharing loop of lines, merged under critical.
WordTable run_wordcount(std::string_view text, const KernelOptions& options = {});
WordTable serial_wordcount(std::string_view text);

}  // namespace ompcore
