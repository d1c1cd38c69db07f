#pragma once

// Rewrite planning: turns a directive plus a description of its structured
// block into the runtime calls and data-sharing captures that implement it.
// Plans render to a Python-like lowering with `_omp_`-prefixed temporaries.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ompcore/directive.hpp"
#include "ompcore/schedule.hpp"

namespace ompcore {

class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One simple statement of the host program, kept as text.
struct Statement {
  std::string text;
  std::set<std::string> reads;
  std::set<std::string> writes;
};

/// Statement with reads/writes inferred from its text.
Statement statement(std::string text);

/// `for var in range(start, stop, step)`; bounds are opaque expressions.
struct LoopHeader {
  std::string var;
  std::string start = "0";
  std::string stop;
  std::string step = "1";

  bool operator==(const LoopHeader&) const = default;
};

enum class BlockKind { plain, counted_loop, section_list };

struct Construct;
using BlockItem = std::variant<Statement, std::shared_ptr<const Construct>>;

struct BlockDescriptor {
  BlockKind kind = BlockKind::plain;
  std::vector<LoopHeader> loops;  // counted_loop: outermost first
  bool perfectly_nested = true;
  std::vector<Statement> stray;   // statements beside the loop nest
  std::vector<BlockItem> body;    // innermost loop body, or the section constructs
  std::set<std::string> reads;
  std::set<std::string> writes;
  std::set<std::string> locals;
};

struct Construct {
  Directive directive;
  BlockDescriptor block;
};

BlockDescriptor plain_block(std::vector<BlockItem> body = {});
BlockDescriptor loop_block(std::vector<LoopHeader> loops, std::vector<BlockItem> body);
BlockDescriptor section_list(std::vector<BlockDescriptor> sections);
BlockItem construct(std::string_view directive, BlockDescriptor block = {});

/// Fills reads/writes/locals of `block` and of every nested construct.
/// `known` are the names already bound where the block appears.
void infer_usage(BlockDescriptor& block, const std::set<std::string>& known);

enum class Sharing { shared, private_, firstprivate, lastprivate, reduction };

struct Capture {
  Sharing sharing = Sharing::shared;
  ReductionOp op = ReductionOp::add;  // reduction only

  bool operator==(const Capture&) const = default;
};

using CaptureMap = std::map<std::string, Capture>;

std::string_view to_string(Sharing sharing);

/// Clause-listed variables take their clause class; other non-locals are
/// shared, firstprivate for read-only ones on a task, or an error under
/// default(none).
CaptureMap classify_variables(const Directive& directive, const BlockDescriptor& block);

enum class PlanOp {
  statement,
  parallel_run,
  task_submit,
  scheduled_range,
  plain_loop,
  sections,
  section_try,
  single,
  critical,
  taskwait,
  barrier,
  private_init,
  firstprivate_init,
  reduction_begin,
  reduction_end,
  lastprivate_writeback,
  copyprivate_publish,
  copyprivate_collect,
};

struct PlanNode {
  PlanOp op = PlanOp::statement;
  std::string text;     // statement text, or critical name
  std::string symbol;   // generated callable, flag or private copy
  std::string source;   // the variable a data-environment step refers to
  std::vector<std::string> shared;  // callables: names bound to the enclosing scope
  std::vector<std::string> params;  // tasks: values captured at creation
  std::vector<std::string> copied;  // tasks: params that are copied rather than bound
  std::vector<std::string> vars;    // copyprivate lists, or loop variables for lastprivate
  std::vector<LoopHeader> loops;
  std::optional<ScheduleSpec> schedule;
  std::optional<std::string> num_threads;
  std::optional<std::string> if_expr;
  ReductionOp reduction = ReductionOp::add;
  int section_id = -1;
  bool nowait = false;
  CaptureMap captures;
  std::vector<PlanNode> children;

  bool operator==(const PlanNode&) const = default;
};

struct RewritePlan {
  CaptureMap captures;
  std::vector<PlanNode> calls;
};

/// Plans one construct. Usage sets of `block` must already be filled.
RewritePlan plan(const Directive& directive, const BlockDescriptor& block);

/// Plans a statement sequence (a function body) in which `known` names are
/// bound on entry. Usage sets are inferred.
std::vector<PlanNode> plan_sequence(std::vector<BlockItem> items, const std::set<std::string>& known);

std::string render_plan(const RewritePlan& plan);
std::string render_plan(const std::vector<PlanNode>& calls);

/// Replaces whole identifier tokens outside string literals and attribute names.
std::string rename_identifiers(std::string_view text, const std::map<std::string, std::string>& renames);

}  // namespace ompcore
