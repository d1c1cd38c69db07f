#pragma once

// The example programs used for golden lowering tests, as block descriptors.

#include <string>
#include <vector>

#include "ompcore/transformer.hpp"

namespace ompcore::testing {

struct ExampleProgram {
  std::string name;
  std::vector<BlockItem> items;
  std::set<std::string> params;
};

inline std::vector<ExampleProgram> example_programs() {
  std::vector<ExampleProgram> out;

  out.push_back({"parallel_data_sharing",
                 {statement("b = \"1\""), statement("c = -1"), statement("d = [1, 2]"), statement("e = True"),
                  construct("parallel shared(b) private(c) firstprivate(d) num_threads(4)",
                            plain_block({statement("f = omp_get_thread_num()"), statement("a = 1"), statement("c = f"),
                                         statement("d.append(3)"), statement("print(b, c, d, f)")})),
                  statement("print(a, c)")},
                 {"a"}});

  out.push_back({"for_static_chunk",
                 {statement("xs = [0] * 20"),
                  construct("parallel", plain_block({construct("for schedule(static, 2)",
                                                               loop_block({{"i", "0", "len(xs)", "1"}},
                                                                          {statement("xs[i] = i")}))})),
                  statement("print(xs)")},
                 {}});

  out.push_back(
      {"for_collapse_lastprivate",
       {statement("xs = [0] * 20"), statement("x = 0"),
        construct("parallel",
                  plain_block({construct("for schedule(static, 2) collapse(2) lastprivate(x)",
                                         loop_block({{"i", "0", "len(xs)", "1"}, {"j", "0", "4", "1"}},
                                                    {statement("x = j"), statement("xs[i] += x")}))})),
        statement("print(x, xs)")},
       {}});

  out.push_back({"sections_print",
                 {construct("parallel", plain_block({construct("sections",
                                                               section_list({plain_block({statement("print(1)")}),
                                                                             plain_block({statement("print(2)")}),
                                                                             plain_block({statement("print(3)")})}))}))},
                 {}});

  out.push_back({"single_copyprivate",
                 {statement("x = 0"),
                  construct("parallel firstprivate(x)",
                            plain_block({construct("single copyprivate(x)", plain_block({statement("x += 1")})),
                                         statement("print(x)")}))},
                 {}});

  out.push_back({"task_fib",
                 {statement("i = 0"), statement("j = 0"), statement("if n < 2: return n"),
                  construct("task", plain_block({statement("i = fib(n - 1)")})),
                  construct("task", plain_block({statement("j = fib(n - 2)")})), construct("taskwait"),
                  statement("return i + j")},
                 {"n"}});

  out.push_back({"single_fib_driver",
                 {statement("x = 0"),
                  construct("parallel", plain_block({construct("single", plain_block({statement("x = fib(n)")}))})),
                  statement("print(x)")},
                 {"n"}});

  out.push_back({"pi_reduction",
                 {statement("w = 1.0 / n"), statement("PI = 0.0"),
                  construct("parallel for reduction(+:PI)",
                            loop_block({{"i", "0", "n", "1"}},
                                       {statement("local = (i + 0.5) * w"),
                                        statement("PI += 4.0 / (1.0 + local * local)")})),
                  statement("return PI * w")},
                 {"n"}});

  return out;
}

}  // namespace ompcore::testing
