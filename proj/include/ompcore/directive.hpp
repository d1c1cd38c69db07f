#pragma once

// Directive strings ("parallel for reduction(+:count) schedule(static, 2)")
// parsed into a validated, structured form.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ompcore/schedule.hpp"

namespace ompcore {

enum class DirectiveName { parallel, for_, sections, section, single, task, taskwait, barrier, critical };

enum class ClauseKind {
  num_threads,
  if_,
  private_,
  firstprivate,
  lastprivate,
  shared,
  default_,
  reduction,
  schedule,
  collapse,
  nowait,
  copyprivate,
  name,
};

enum class ReductionOp { add, mul, sub, min, max, bit_and, bit_or, bit_xor, logical_and, logical_or };

enum class DefaultKind { shared, none };

std::string_view to_string(DirectiveName name);
std::string_view to_string(ClauseKind kind);
std::string_view to_string(ReductionOp op);
std::string_view to_string(DefaultKind kind);
std::optional<ReductionOp> reduction_op_from_symbol(std::string_view symbol);

/// Variable names listed by private/firstprivate/lastprivate/shared/copyprivate.
struct VarList {
  std::vector<std::string> names;
  bool operator==(const VarList&) const = default;
};

struct ReductionPayload {
  ReductionOp op = ReductionOp::add;
  std::vector<std::string> names;
  bool operator==(const ReductionPayload&) const = default;
};

/// Unevaluated host expression text (num_threads, if).
struct RawExpr {
  std::string text;
  bool operator==(const RawExpr&) const = default;
};

struct CollapseDepth {
  std::int64_t depth = 2;
  bool operator==(const CollapseDepth&) const = default;
};

struct CriticalName {
  std::string name;
  bool operator==(const CriticalName&) const = default;
};

using ClausePayload =
    std::variant<std::monostate, VarList, ReductionPayload, RawExpr, ScheduleSpec, CollapseDepth, DefaultKind, CriticalName>;

struct Clause {
  ClauseKind kind;
  ClausePayload payload;

  bool operator==(const Clause&) const = default;

  const std::vector<std::string>& vars() const;  // VarList or ReductionPayload names
};

struct Directive {
  std::vector<DirectiveName> names;
  std::vector<Clause> clauses;

  bool operator==(const Directive&) const = default;

  bool is(DirectiveName name) const;
  bool is_combined() const { return names.size() > 1; }
  const Clause* find(ClauseKind kind) const;
  bool has(ClauseKind kind) const { return find(kind) != nullptr; }
  bool nowait() const { return has(ClauseKind::nowait); }
  std::optional<ScheduleSpec> schedule() const;
  std::int64_t collapse() const;  // 1 when absent
  DefaultKind default_sharing() const;
  std::optional<std::string> critical_name() const;
  /// All variables listed by clauses of `kind`, in order of appearance.
  std::vector<std::string> vars(ClauseKind kind) const;
};

/// Positioned parse failure. `offset()` is the 0-based character index.
class DirectiveError : public std::runtime_error {
 public:
  DirectiveError(std::size_t offset, const std::string& message);
  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

Directive parse(std::string_view text);

/// Canonical text form; parse(render(d)) == d for every valid directive.
std::string render(const Directive& directive);

const std::map<DirectiveName, std::set<ClauseKind>>& validity_table();

/// Allowed clauses for a (possibly combined) name sequence.
std::set<ClauseKind> allowed_clauses(const std::vector<DirectiveName>& names);

}  // namespace ompcore
