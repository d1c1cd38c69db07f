#include "ompcore/transformer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace ompcore {

namespace {

// ---------------------------------------------------------------------------
// Token scanning over host-language text

enum class TokKind { identifier, number, string, op };

struct Tok {
  TokKind kind;
  std::size_t begin;
  std::size_t end;
  std::string_view text;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

constexpr std::array<std::string_view, 21> kMultiOps = {
    "**=", "//=", ">>=", "<<=", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=",  "%=",  "&=",  "|=",  "^=", "**", "//", ">>", "<<", "->"};

std::vector<Tok> scan(std::string_view text) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    TokKind kind = TokKind::op;
    if (ident_start(c)) {
      while (i < text.size() && ident_char(text[i])) ++i;
      kind = TokKind::identifier;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < text.size() && (ident_char(text[i]) || text[i] == '.')) ++i;
      kind = TokKind::number;
    } else if (c == '\'' || c == '"') {
      ++i;
      while (i < text.size() && text[i] != c) i += text[i] == '\\' ? 2 : 1;
      i = std::min(i + 1, text.size());
      kind = TokKind::string;
    } else {
      std::size_t len = 1;
      for (auto op : kMultiOps) {
        if (text.substr(i, op.size()) == op) {
          len = op.size();
          break;
        }
      }
      i += len;
    }
    out.push_back(Tok{kind, begin, i, text.substr(begin, i - begin)});
  }
  return out;
}

bool is_keyword(std::string_view word) {
  static const std::set<std::string_view> keywords = {
      "and",   "or",   "not",    "in",     "is",       "if",     "else",   "elif",  "while", "for",
      "return", "None", "True",  "False",  "lambda",   "pass",   "break",  "continue", "del", "global",
      "nonlocal", "def", "class", "import", "from",    "as",     "with",   "yield", "assert", "raise",
      "try",   "except", "finally"};
  return keywords.count(word) != 0;
}

bool is_assign_op(std::string_view op) {
  return op == "=" || (op.size() >= 2 && op.back() == '=' && op != "==" && op != "!=" && op != "<=" && op != ">=");
}

/// Identifier tokens that name variables: not keywords, attributes, calls or
/// keyword-argument names.
std::vector<std::size_t> variable_tokens(const std::vector<Tok>& toks, std::size_t from, std::size_t to) {
  std::vector<std::size_t> out;
  int depth = 0;
  for (std::size_t k = from; k < to; ++k) {
    const auto& t = toks[k];
    if (t.kind == TokKind::op) {
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
      continue;
    }
    if (t.kind != TokKind::identifier || is_keyword(t.text)) continue;
    if (k > 0 && toks[k - 1].text == ".") continue;
    if (k + 1 < toks.size() && toks[k + 1].text == "(") continue;
    if (depth > 0 && k + 1 < toks.size() && toks[k + 1].text == "=") continue;
    out.push_back(k);
  }
  return out;
}

void add_reads(std::string_view text, std::set<std::string>& reads) {
  auto toks = scan(text);
  for (auto k : variable_tokens(toks, 0, toks.size())) reads.emplace(toks[k].text);
}

void infer_statement(std::string_view text, std::set<std::string>& reads, std::set<std::string>& writes) {
  auto toks = scan(text);
  if (toks.empty()) return;

  // `if cond: stmt` and friends: the head is read, the tail is a statement.
  const auto head = toks.front().text;
  if (head == "if" || head == "elif" || head == "while" || head == "else") {
    int depth = 0;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      const auto t = toks[k].text;
      if (t == "(" || t == "[" || t == "{") ++depth;
      if (t == ")" || t == "]" || t == "}") --depth;
      if (t == ":" && depth == 0) {
        for (auto v : variable_tokens(toks, 0, k)) reads.emplace(toks[v].text);
        infer_statement(text.substr(toks[k].end), reads, writes);
        return;
      }
    }
  }

  std::optional<std::size_t> assign;
  int depth = 0;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    const auto& t = toks[k];
    if (t.kind != TokKind::op) continue;
    if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
    if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
    if (depth == 0 && is_assign_op(t.text)) {
      assign = k;
      break;
    }
  }
  if (!assign) {
    for (auto k : variable_tokens(toks, 0, toks.size())) reads.emplace(toks[k].text);
    return;
  }

  const bool augmented = toks[*assign].text != "=";
  const bool bare_names = std::all_of(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(*assign), [](const Tok& t) {
    return t.kind == TokKind::identifier || t.text == ",";
  });
  for (auto k : variable_tokens(toks, 0, *assign)) {
    if (bare_names) {
      writes.emplace(toks[k].text);
      if (augmented) reads.emplace(toks[k].text);
    } else {
      reads.emplace(toks[k].text);  // subscript or attribute target mutates the object
    }
  }
  for (auto k : variable_tokens(toks, *assign + 1, toks.size())) reads.emplace(toks[k].text);
}

std::string renamed(const std::string& name, const std::map<std::string, std::string>& renames) {
  auto it = renames.find(name);
  return it == renames.end() ? name : it->second;
}

// ---------------------------------------------------------------------------
// Usage

bool has_usage(const BlockDescriptor& block) {
  return !block.reads.empty() || !block.writes.empty() || !block.locals.empty();
}

bool usage_inferable(const BlockDescriptor& block) {
  return !has_usage(block) && (!block.body.empty() || !block.loops.empty());
}

/// What a nested construct contributes to the usage of the enclosing block.
void nested_usage(const Construct& c, std::set<std::string>& reads, std::set<std::string>& writes) {
  const auto& b = c.block;
  for (const auto& v : b.reads) {
    if (!b.locals.count(v)) reads.insert(v);
  }
  for (const auto& v : b.writes) {
    if (!b.locals.count(v)) writes.insert(v);
  }
  const auto& d = c.directive;
  for (auto kind : {ClauseKind::num_threads, ClauseKind::if_}) {
    if (const auto* clause = d.find(kind)) add_reads(std::get<RawExpr>(clause->payload).text, reads);
  }
  for (const auto& v : d.vars(ClauseKind::firstprivate)) reads.insert(v);
  for (const auto& v : d.vars(ClauseKind::shared)) reads.insert(v);
  for (const auto& v : d.vars(ClauseKind::lastprivate)) writes.insert(v);
  for (auto kind : {ClauseKind::reduction, ClauseKind::copyprivate}) {
    for (const auto& v : d.vars(kind)) {
      reads.insert(v);
      writes.insert(v);
    }
  }
}

void check_reserved(const BlockDescriptor& block) {
  for (const auto* names : {&block.reads, &block.writes, &block.locals}) {
    for (const auto& n : *names) {
      if (n.rfind("_omp_", 0) == 0) throw PlanError("name '" + n + "' uses the reserved _omp_ prefix");
    }
  }
}

std::set<std::string> loop_vars(const BlockDescriptor& block) {
  std::set<std::string> out;
  for (const auto& h : block.loops) out.insert(h.var);
  return out;
}

std::set<std::string> non_locals(const BlockDescriptor& block) {
  std::set<std::string> out;
  for (const auto* names : {&block.reads, &block.writes}) {
    for (const auto& n : *names) {
      if (!block.locals.count(n)) out.insert(n);
    }
  }
  return out;
}

std::set<std::string> visible_inside(const BlockDescriptor& block, const std::set<std::string>& known) {
  auto out = known;
  out.insert(block.reads.begin(), block.reads.end());
  out.insert(block.writes.begin(), block.writes.end());
  out.insert(block.locals.begin(), block.locals.end());
  return out;
}

// ---------------------------------------------------------------------------
// Planning

using Renames = std::map<std::string, std::string>;

std::pair<Directive, Directive> split_combined(const Directive& d) {
  Directive outer{{DirectiveName::parallel}, {}};
  Directive inner{{d.names[1]}, {}};
  for (const auto& clause : d.clauses) {
    switch (clause.kind) {
      case ClauseKind::num_threads:
      case ClauseKind::if_:
      case ClauseKind::private_:
      case ClauseKind::firstprivate:
      case ClauseKind::shared:
      case ClauseKind::default_:
        outer.clauses.push_back(clause);
        break;
      default:
        inner.clauses.push_back(clause);
    }
  }
  return {outer, inner};
}

PlanNode op_node(PlanOp op) {
  PlanNode node;
  node.op = op;
  return node;
}

std::string directive_label(const Directive& d) {
  std::string out;
  for (auto n : d.names) {
    if (!out.empty()) out += ' ';
    out += to_string(n);
  }
  return out;
}

class Planner {
 public:
  std::vector<PlanNode> lower_items(const std::vector<BlockItem>& items, const Renames& renames,
                                    std::set<std::string> known) {
    std::vector<PlanNode> out;
    for (const auto& item : items) {
      if (const auto* s = std::get_if<Statement>(&item)) {
        PlanNode node;
        node.op = PlanOp::statement;
        node.text = rename_identifiers(s->text, renames);
        out.push_back(std::move(node));
        known.insert(s->writes.begin(), s->writes.end());
        continue;
      }
      const auto& ptr = std::get<std::shared_ptr<const Construct>>(item);
      if (!ptr) throw PlanError("null construct in block");
      Construct c = *ptr;
      if (usage_inferable(c.block)) infer_usage(c.block, known);
      auto lowered = lower_construct(c, renames, known);
      out.insert(out.end(), std::make_move_iterator(lowered.begin()), std::make_move_iterator(lowered.end()));
      known.insert(c.block.writes.begin(), c.block.writes.end());
    }
    return out;
  }

  std::vector<PlanNode> lower_construct(const Construct& c, const Renames& renames, const std::set<std::string>& known) {
    const auto& d = c.directive;
    if (d.names.empty()) throw PlanError("construct without a directive");
    check_reserved(c.block);
    if (d.is_combined()) {
      auto [outer, inner] = split_combined(d);
      BlockDescriptor wrapper;
      auto inner_construct = std::make_shared<Construct>(Construct{inner, c.block});
      nested_usage(*inner_construct, wrapper.reads, wrapper.writes);
      wrapper.body.push_back(inner_construct);
      return lower_parallel(outer, wrapper, renames, known);
    }
    switch (d.names[0]) {
      case DirectiveName::parallel: return lower_parallel(d, c.block, renames, known);
      case DirectiveName::for_: return lower_for(d, c.block, renames, known);
      case DirectiveName::sections: return lower_sections(d, c.block, renames, known);
      case DirectiveName::single: return lower_single(d, c.block, renames, known);
      case DirectiveName::task: return lower_task(d, c.block, renames, known);
      case DirectiveName::critical: return lower_critical(d, c.block, renames, known);
      case DirectiveName::taskwait:
      case DirectiveName::barrier: {
        if (!c.block.body.empty() || c.block.kind != BlockKind::plain) {
          throw PlanError(std::string(to_string(d.names[0])) + " is a standalone directive and takes no block");
        }
        return {op_node(d.is(DirectiveName::taskwait) ? PlanOp::taskwait : PlanOp::barrier)};
      }
      case DirectiveName::section:
        throw PlanError("section may only appear directly inside a sections block");
    }
    throw PlanError("unsupported directive");
  }

 private:
  std::string fresh(std::string_view base) { return "_omp_" + std::string(base) + "_" + std::to_string(++counter_); }

  static void require_kind(const Directive& d, const BlockDescriptor& block, BlockKind kind, std::string_view what) {
    if (block.kind != kind) {
      throw PlanError(directive_label(d) + " requires " + std::string(what));
    }
  }

  /// Data-environment steps shared by every construct kind.
  struct Privatized {
    std::vector<PlanNode> prologue;
    std::vector<PlanNode> reduction_ends;
    std::vector<std::pair<std::string, std::string>> lastprivate;  // (temp, target)
    Renames inner;
  };

  Privatized privatize(const CaptureMap& captures, const Renames& renames) {
    Privatized out;
    out.inner = renames;
    for (const auto& [var, cap] : captures) {
      PlanNode node;
      node.source = renamed(var, renames);
      switch (cap.sharing) {
        case Sharing::shared:
          continue;
        case Sharing::private_:
          node.op = PlanOp::private_init;
          break;
        case Sharing::firstprivate:
          node.op = PlanOp::firstprivate_init;
          break;
        case Sharing::lastprivate:
          node.op = PlanOp::private_init;
          break;
        case Sharing::reduction:
          node.op = PlanOp::reduction_begin;
          node.reduction = cap.op;
          break;
      }
      node.symbol = fresh(var);
      out.inner[var] = node.symbol;
      if (cap.sharing == Sharing::reduction) {
        PlanNode end = node;
        end.op = PlanOp::reduction_end;
        out.reduction_ends.push_back(std::move(end));
      }
      if (cap.sharing == Sharing::lastprivate) out.lastprivate.emplace_back(node.symbol, node.source);
      out.prologue.push_back(std::move(node));
    }
    return out;
  }

  std::vector<PlanNode> lower_parallel(const Directive& d, const BlockDescriptor& block, const Renames& renames,
                                       const std::set<std::string>& known) {
    require_kind(d, block, BlockKind::plain, "a plain block");
    PlanNode node;
    node.op = PlanOp::parallel_run;
    node.symbol = fresh("parallel");
    node.captures = classify_variables(d, block);
    if (const auto* c = d.find(ClauseKind::num_threads)) {
      node.num_threads = rename_identifiers(std::get<RawExpr>(c->payload).text, renames);
    }
    if (const auto* c = d.find(ClauseKind::if_)) node.if_expr = rename_identifiers(std::get<RawExpr>(c->payload).text, renames);
    for (const auto& [var, cap] : node.captures) {
      if (cap.sharing == Sharing::shared) node.shared.push_back(renamed(var, renames));
    }
    std::sort(node.shared.begin(), node.shared.end());

    auto env = privatize(node.captures, renames);
    node.children = std::move(env.prologue);
    auto body = lower_items(block.body, env.inner, visible_inside(block, known));
    node.children.insert(node.children.end(), body.begin(), body.end());
    node.children.insert(node.children.end(), env.reduction_ends.begin(), env.reduction_ends.end());
    return {node};
  }

  std::vector<PlanNode> lower_for(const Directive& d, const BlockDescriptor& block, const Renames& renames,
                                  const std::set<std::string>& known) {
    require_kind(d, block, BlockKind::counted_loop, "a counted loop block");
    if (!block.stray.empty()) {
      throw PlanError("statement '" + block.stray.front().text + "' lies outside the loop of a for construct");
    }
    if (block.loops.empty()) throw PlanError("for requires at least one loop header");
    const auto collapse = static_cast<std::size_t>(d.collapse());
    if (collapse > block.loops.size()) {
      throw PlanError("collapse(" + std::to_string(collapse) + ") needs a loop nest of that depth, found " +
                      std::to_string(block.loops.size()));
    }
    if (collapse > 1 && !block.perfectly_nested) throw PlanError("collapsed loops must be perfectly nested");
    for (std::size_t inner = 1; inner < collapse; ++inner) {
      std::set<std::string> bound_reads;
      const auto& h = block.loops[inner];
      for (const auto* expr : {&h.start, &h.stop, &h.step}) add_reads(*expr, bound_reads);
      for (std::size_t outer = 0; outer < inner; ++outer) {
        if (bound_reads.count(block.loops[outer].var)) {
          throw PlanError("bounds of collapsed loop '" + h.var + "' depend on outer index '" + block.loops[outer].var + "'");
        }
      }
    }

    const auto captures = classify_variables(d, block);
    auto env = privatize(captures, renames);
    const bool reduces = !env.reduction_ends.empty();

    PlanNode range;
    range.op = PlanOp::scheduled_range;
    range.schedule = d.schedule();
    range.nowait = d.nowait() || reduces;
    range.captures = captures;
    for (std::size_t k = 0; k < collapse; ++k) range.loops.push_back(renamed_header(block.loops[k], env.inner));

    auto body = lower_items(block.body, env.inner, visible_inside(block, known));
    for (std::size_t k = block.loops.size(); k-- > collapse;) {
      PlanNode loop;
      loop.op = PlanOp::plain_loop;
      loop.loops.push_back(renamed_header(block.loops[k], env.inner));
      loop.children = std::move(body);
      body = {std::move(loop)};
    }
    range.children = std::move(body);

    std::vector<PlanNode> out = std::move(env.prologue);
    out.push_back(std::move(range));
    out.insert(out.end(), env.reduction_ends.begin(), env.reduction_ends.end());
    for (const auto& [temp, target] : env.lastprivate) {
      PlanNode wb;
      wb.op = PlanOp::lastprivate_writeback;
      wb.symbol = temp;
      wb.source = target;
      for (std::size_t k = 0; k < collapse; ++k) wb.vars.push_back(block.loops[k].var);
      out.push_back(std::move(wb));
    }
    if (reduces && !d.nowait()) out.push_back(op_node(PlanOp::barrier));
    return out;
  }

  std::vector<PlanNode> lower_sections(const Directive& d, const BlockDescriptor& block, const Renames& renames,
                                       const std::set<std::string>& known) {
    require_kind(d, block, BlockKind::section_list, "a section list");
    const auto captures = classify_variables(d, block);
    auto env = privatize(captures, renames);
    const bool reduces = !env.reduction_ends.empty();
    const auto inside = visible_inside(block, known);

    PlanNode node;
    node.op = PlanOp::sections;
    node.nowait = d.nowait() || reduces;
    node.captures = captures;
    int id = 0;
    for (const auto& item : block.body) {
      const auto* ptr = std::get_if<std::shared_ptr<const Construct>>(&item);
      if (!ptr || !*ptr || !(*ptr)->directive.is(DirectiveName::section) || (*ptr)->directive.is_combined()) {
        throw PlanError("only section constructs may appear directly inside sections");
      }
      PlanNode guard;
      guard.op = PlanOp::section_try;
      guard.section_id = id++;
      guard.children = lower_items((*ptr)->block.body, env.inner, inside);
      node.children.push_back(std::move(guard));
    }

    std::vector<PlanNode> out = std::move(env.prologue);
    out.push_back(std::move(node));
    out.insert(out.end(), env.reduction_ends.begin(), env.reduction_ends.end());
    for (const auto& [temp, target] : env.lastprivate) {
      PlanNode wb;
      wb.op = PlanOp::lastprivate_writeback;
      wb.symbol = temp;
      wb.source = target;
      wb.section_id = id - 1;
      out.push_back(std::move(wb));
    }
    if (reduces && !d.nowait()) out.push_back(op_node(PlanOp::barrier));
    return out;
  }

  std::vector<PlanNode> lower_single(const Directive& d, const BlockDescriptor& block, const Renames& renames,
                                     const std::set<std::string>& known) {
    require_kind(d, block, BlockKind::plain, "a plain block");
    const auto copied = d.vars(ClauseKind::copyprivate);
    if (!copied.empty() && d.nowait()) throw PlanError("copyprivate cannot be combined with nowait");

    PlanNode node;
    node.op = PlanOp::single;
    node.symbol = fresh("single");
    node.nowait = d.nowait();
    node.captures = classify_variables(d, block);
    auto env = privatize(node.captures, renames);
    node.children = std::move(env.prologue);
    auto body = lower_items(block.body, env.inner, visible_inside(block, known));
    node.children.insert(node.children.end(), body.begin(), body.end());

    std::vector<PlanNode> out;
    if (copied.empty()) {
      out.push_back(std::move(node));
      return out;
    }
    PlanNode publish;
    publish.op = PlanOp::copyprivate_publish;
    for (const auto& v : copied) publish.vars.push_back(renamed(v, env.inner));
    node.children.push_back(std::move(publish));
    PlanNode collect;
    collect.op = PlanOp::copyprivate_collect;
    for (const auto& v : copied) collect.vars.push_back(renamed(v, renames));
    out.push_back(std::move(node));
    out.push_back(std::move(collect));
    return out;
  }

  std::vector<PlanNode> lower_task(const Directive& d, const BlockDescriptor& block, const Renames& renames,
                                   const std::set<std::string>& known) {
    require_kind(d, block, BlockKind::plain, "a plain block");
    PlanNode node;
    node.op = PlanOp::task_submit;
    node.symbol = fresh("task");
    node.captures = classify_variables(d, block);
    if (const auto* c = d.find(ClauseKind::if_)) node.if_expr = rename_identifiers(std::get<RawExpr>(c->payload).text, renames);

    const auto explicit_first = d.vars(ClauseKind::firstprivate);
    CaptureMap privates;
    for (const auto& [var, cap] : node.captures) {
      const auto name = renamed(var, renames);
      if (cap.sharing == Sharing::shared) {
        node.shared.push_back(name);
      } else if (cap.sharing == Sharing::firstprivate) {
        node.params.push_back(name);
        if (std::find(explicit_first.begin(), explicit_first.end(), var) != explicit_first.end()) node.copied.push_back(name);
      } else {
        privates.emplace(var, cap);
      }
    }
    std::sort(node.shared.begin(), node.shared.end());
    std::sort(node.params.begin(), node.params.end());
    auto env = privatize(privates, renames);
    node.children = std::move(env.prologue);
    auto body = lower_items(block.body, env.inner, visible_inside(block, known));
    node.children.insert(node.children.end(), body.begin(), body.end());
    return {node};
  }

  std::vector<PlanNode> lower_critical(const Directive& d, const BlockDescriptor& block, const Renames& renames,
                                       const std::set<std::string>& known) {
    require_kind(d, block, BlockKind::plain, "a plain block");
    PlanNode node;
    node.op = PlanOp::critical;
    node.text = d.critical_name().value_or("");
    node.captures = classify_variables(d, block);
    node.children = lower_items(block.body, renames, visible_inside(block, known));
    return {node};
  }

  static LoopHeader renamed_header(const LoopHeader& h, const Renames& renames) {
    return LoopHeader{h.var, rename_identifiers(h.start, renames), rename_identifiers(h.stop, renames),
                      rename_identifiers(h.step, renames)};
  }

  int counter_ = 0;
};

// ---------------------------------------------------------------------------
// Rendering

class Renderer {
 public:
  std::string take() { return std::move(out_); }

  void nodes(const std::vector<PlanNode>& list, int indent) {
    for (const auto& n : list) node(n, indent);
  }

 private:
  void line(int indent, const std::string& text) {
    out_.append(static_cast<std::size_t>(indent) * 4, ' ');
    out_ += text;
    out_ += '\n';
  }

  void body(const std::vector<PlanNode>& list, int indent, const std::vector<std::string>& shared = {}) {
    if (!shared.empty()) line(indent, "nonlocal " + join(shared));
    if (list.empty() && shared.empty()) line(indent, "pass");
    nodes(list, indent);
  }

  static std::string join(const std::vector<std::string>& parts, std::string_view sep = ", ") {
    std::string out;
    for (const auto& p : parts) {
      if (!out.empty()) out += sep;
      out += p;
    }
    return out;
  }

  static std::string quoted(std::string_view text) { return "'" + std::string(text) + "'"; }

  static std::string range_args(const PlanNode& n) {
    std::string out;
    if (n.loops.size() == 1) {
      const auto& h = n.loops[0];
      out = h.start + ", " + h.stop + ", " + h.step;
    } else {
      std::vector<std::string> starts, stops, steps;
      for (const auto& h : n.loops) {
        starts.push_back(h.start);
        stops.push_back(h.stop);
        steps.push_back(h.step);
      }
      out = "(" + join(starts) + "), (" + join(stops) + "), (" + join(steps) + ")";
    }
    if (n.schedule) {
      out += ", schedule=" + quoted(to_string(n.schedule->kind));
      if (n.schedule->chunk) out += ", chunks=" + std::to_string(*n.schedule->chunk);
    }
    if (n.nowait) out += ", nowait=True";
    return out;
  }

  static std::string combine_statement(const PlanNode& n) {
    const auto& target = n.source;
    const auto& local = n.symbol;
    switch (n.reduction) {
      case ReductionOp::add:
      case ReductionOp::sub: return target + " += " + local;
      case ReductionOp::mul: return target + " *= " + local;
      case ReductionOp::bit_and: return target + " &= " + local;
      case ReductionOp::bit_or: return target + " |= " + local;
      case ReductionOp::bit_xor: return target + " ^= " + local;
      case ReductionOp::min: return target + " = min(" + target + ", " + local + ")";
      case ReductionOp::max: return target + " = max(" + target + ", " + local + ")";
      case ReductionOp::logical_and: return target + " = " + target + " and " + local;
      case ReductionOp::logical_or: return target + " = " + target + " or " + local;
    }
    return target;
  }

  void node(const PlanNode& n, int indent) {
    switch (n.op) {
      case PlanOp::statement:
        line(indent, n.text);
        break;
      case PlanOp::parallel_run: {
        line(indent, "def " + n.symbol + "():");
        body(n.children, indent + 1, n.shared);
        std::string call = "_omp_parallel_run(" + n.symbol;
        if (n.num_threads) call += ", num_threads=" + *n.num_threads;
        if (n.if_expr) call += ", if_=" + *n.if_expr;
        line(indent, call + ")");
        break;
      }
      case PlanOp::task_submit: {
        std::vector<std::string> params;
        for (const auto& p : n.params) {
          const bool copy = std::find(n.copied.begin(), n.copied.end(), p) != n.copied.end();
          params.push_back(p + "=" + (copy ? "_omp_copy(" + p + ")" : p));
        }
        line(indent, "def " + n.symbol + "(" + join(params) + "):");
        body(n.children, indent + 1, n.shared);
        std::string call = "_omp_task_submit(" + n.symbol;
        if (n.if_expr) call += ", if_=" + *n.if_expr;
        line(indent, call + ")");
        break;
      }
      case PlanOp::scheduled_range: {
        std::vector<std::string> vars;
        for (const auto& h : n.loops) vars.push_back(h.var);
        line(indent, "for " + join(vars) + " in _omp_range(" + range_args(n) + "):");
        body(n.children, indent + 1);
        break;
      }
      case PlanOp::plain_loop: {
        const auto& h = n.loops.at(0);
        line(indent, "for " + h.var + " in range(" + h.start + ", " + h.stop + ", " + h.step + "):");
        body(n.children, indent + 1);
        break;
      }
      case PlanOp::sections:
        line(indent, n.nowait ? "with _omp_sections(nowait=True):" : "with _omp_sections():");
        body(n.children, indent + 1);
        break;
      case PlanOp::section_try:
        line(indent, "if _omp_section(" + std::to_string(n.section_id) + "):");
        body(n.children, indent + 1);
        break;
      case PlanOp::single:
        line(indent, std::string("with _omp_single(") + (n.nowait ? "nowait=True" : "") + ") as " + n.symbol + ":");
        line(indent + 1, "if " + n.symbol + ":");
        body(n.children, indent + 2);
        break;
      case PlanOp::critical:
        line(indent, n.text.empty() ? "with _omp_critical():" : "with _omp_critical(" + quoted(n.text) + "):");
        body(n.children, indent + 1);
        break;
      case PlanOp::taskwait:
        line(indent, "_omp_taskwait()");
        break;
      case PlanOp::barrier:
        line(indent, "_omp_barrier()");
        break;
      case PlanOp::private_init:
        line(indent, n.symbol + " = None");
        break;
      case PlanOp::firstprivate_init:
        line(indent, n.symbol + " = _omp_copy(" + n.source + ")");
        break;
      case PlanOp::reduction_begin:
        line(indent, n.symbol + " = _omp_reduction_identity(" + quoted(to_string(n.reduction)) + ", " + n.source + ")");
        break;
      case PlanOp::reduction_end:
        line(indent, "with _omp_critical():");
        line(indent + 1, combine_statement(n));
        break;
      case PlanOp::lastprivate_writeback: {
        const auto arg = n.section_id >= 0 ? std::to_string(n.section_id) : join(n.vars);
        line(indent, "if _omp_lastprivate(" + arg + "):");
        line(indent + 1, n.source + " = " + n.symbol);
        break;
      }
      case PlanOp::copyprivate_publish:
        line(indent, "_omp_copyprivate_set(" + join(n.vars) + ")");
        break;
      case PlanOp::copyprivate_collect:
        line(indent, join(n.vars) + " = _omp_copyprivate_get()");
        break;
    }
  }

  std::string out_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Public API

Statement statement(std::string text) {
  Statement s;
  infer_statement(text, s.reads, s.writes);
  s.text = std::move(text);
  return s;
}

BlockDescriptor plain_block(std::vector<BlockItem> body) {
  BlockDescriptor b;
  b.body = std::move(body);
  return b;
}

BlockDescriptor loop_block(std::vector<LoopHeader> loops, std::vector<BlockItem> body) {
  BlockDescriptor b;
  b.kind = BlockKind::counted_loop;
  b.loops = std::move(loops);
  b.body = std::move(body);
  return b;
}

BlockDescriptor section_list(std::vector<BlockDescriptor> sections) {
  BlockDescriptor b;
  b.kind = BlockKind::section_list;
  for (auto& s : sections) b.body.push_back(std::make_shared<const Construct>(Construct{parse("section"), std::move(s)}));
  return b;
}

BlockItem construct(std::string_view directive, BlockDescriptor block) {
  return std::make_shared<const Construct>(Construct{parse(directive), std::move(block)});
}

void infer_usage(BlockDescriptor& block, const std::set<std::string>& known) {
  std::set<std::string> reads;
  std::set<std::string> writes;
  for (const auto& s : block.stray) {
    reads.insert(s.reads.begin(), s.reads.end());
    writes.insert(s.writes.begin(), s.writes.end());
  }
  for (const auto& h : block.loops) {
    for (const auto* expr : {&h.start, &h.stop, &h.step}) add_reads(*expr, reads);
    writes.insert(h.var);
  }
  for (const auto& item : block.body) {
    if (const auto* s = std::get_if<Statement>(&item)) {
      reads.insert(s->reads.begin(), s->reads.end());
      writes.insert(s->writes.begin(), s->writes.end());
    }
  }

  std::set<std::string> locals = loop_vars(block);
  for (const auto& w : writes) {
    if (!known.count(w)) locals.insert(w);
  }

  auto inner_known = known;
  inner_known.insert(locals.begin(), locals.end());
  for (auto& item : block.body) {
    auto* ptr = std::get_if<std::shared_ptr<const Construct>>(&item);
    if (!ptr || !*ptr) continue;
    auto copy = std::make_shared<Construct>(**ptr);
    infer_usage(copy->block, inner_known);
    nested_usage(*copy, reads, writes);
    item = std::shared_ptr<const Construct>(std::move(copy));
  }

  block.reads = std::move(reads);
  block.writes = std::move(writes);
  block.locals = std::move(locals);
}

std::string_view to_string(Sharing sharing) {
  switch (sharing) {
    case Sharing::shared: return "shared";
    case Sharing::private_: return "private";
    case Sharing::firstprivate: return "firstprivate";
    case Sharing::lastprivate: return "lastprivate";
    case Sharing::reduction: return "reduction";
  }
  return "?";
}

CaptureMap classify_variables(const Directive& directive, const BlockDescriptor& block) {
  CaptureMap out;
  auto assign = [&](const std::string& var, Capture cap) {
    auto [it, inserted] = out.emplace(var, cap);
    if (!inserted && !(it->second == cap)) {
      throw PlanError("variable '" + var + "' is listed as both " + std::string(to_string(it->second.sharing)) + " and " +
                      std::string(to_string(cap.sharing)));
    }
  };
  for (const auto& clause : directive.clauses) {
    switch (clause.kind) {
      case ClauseKind::shared:
        for (const auto& v : clause.vars()) assign(v, Capture{Sharing::shared});
        break;
      case ClauseKind::private_:
        for (const auto& v : clause.vars()) assign(v, Capture{Sharing::private_});
        break;
      case ClauseKind::firstprivate:
        for (const auto& v : clause.vars()) assign(v, Capture{Sharing::firstprivate});
        break;
      case ClauseKind::lastprivate:
        for (const auto& v : clause.vars()) assign(v, Capture{Sharing::lastprivate});
        break;
      case ClauseKind::reduction: {
        const auto& payload = std::get<ReductionPayload>(clause.payload);
        for (const auto& v : payload.names) assign(v, Capture{Sharing::reduction, payload.op});
        break;
      }
      default:
        break;
    }
  }

  const bool none = directive.has(ClauseKind::default_) && directive.default_sharing() == DefaultKind::none;
  const bool task_rule = directive.is(DirectiveName::task) && !directive.has(ClauseKind::default_);
  for (const auto& var : non_locals(block)) {
    if (out.count(var)) continue;
    if (none) throw PlanError("default(none): variable '" + var + "' needs an explicit data-sharing clause");
    if (task_rule && !block.writes.count(var)) {
      out.emplace(var, Capture{Sharing::firstprivate});
    } else {
      out.emplace(var, Capture{Sharing::shared});
    }
  }
  return out;
}

RewritePlan plan(const Directive& directive, const BlockDescriptor& block) {
  RewritePlan out;
  out.captures = classify_variables(directive, block);
  Planner planner;
  out.calls = planner.lower_construct(Construct{directive, block}, {}, non_locals(block));
  return out;
}

std::vector<PlanNode> plan_sequence(std::vector<BlockItem> items, const std::set<std::string>& known) {
  Planner planner;
  return planner.lower_items(items, {}, known);
}

std::string render_plan(const RewritePlan& plan) { return render_plan(plan.calls); }

std::string render_plan(const std::vector<PlanNode>& calls) {
  Renderer r;
  r.nodes(calls, 0);
  return r.take();
}

std::string rename_identifiers(std::string_view text, const std::map<std::string, std::string>& renames) {
  if (renames.empty()) return std::string(text);
  auto toks = scan(text);
  std::string out;
  std::size_t copied = 0;
  for (auto k : variable_tokens(toks, 0, toks.size())) {
    auto it = renames.find(std::string(toks[k].text));
    if (it == renames.end()) continue;
    out.append(text.substr(copied, toks[k].begin - copied));
    out += it->second;
    copied = toks[k].end;
  }
  out.append(text.substr(copied));
  return out;
}

}  // namespace ompcore
