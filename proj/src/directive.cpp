#include "ompcore/directive.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <utility>

namespace ompcore {

namespace {

constexpr std::pair<DirectiveName, std::string_view> kDirectiveNames[] = {
    {DirectiveName::parallel, "parallel"}, {DirectiveName::for_, "for"},
    {DirectiveName::sections, "sections"}, {DirectiveName::section, "section"},
    {DirectiveName::single, "single"},     {DirectiveName::task, "task"},
    {DirectiveName::taskwait, "taskwait"}, {DirectiveName::barrier, "barrier"},
    {DirectiveName::critical, "critical"},
};

// `name` is deliberately absent: the critical name is written as critical(name).
constexpr std::pair<ClauseKind, std::string_view> kClauseNames[] = {
    {ClauseKind::num_threads, "num_threads"},
    {ClauseKind::if_, "if"},
    {ClauseKind::private_, "private"},
    {ClauseKind::firstprivate, "firstprivate"},
    {ClauseKind::lastprivate, "lastprivate"},
    {ClauseKind::shared, "shared"},
    {ClauseKind::default_, "default"},
    {ClauseKind::reduction, "reduction"},
    {ClauseKind::schedule, "schedule"},
    {ClauseKind::collapse, "collapse"},
    {ClauseKind::nowait, "nowait"},
    {ClauseKind::copyprivate, "copyprivate"},
};

constexpr std::pair<ReductionOp, std::string_view> kReductionOps[] = {
    {ReductionOp::add, "+"},         {ReductionOp::mul, "*"},         {ReductionOp::sub, "-"},
    {ReductionOp::min, "min"},       {ReductionOp::max, "max"},       {ReductionOp::bit_and, "&"},
    {ReductionOp::bit_or, "|"},      {ReductionOp::bit_xor, "^"},     {ReductionOp::logical_and, "&&"},
    {ReductionOp::logical_or, "||"},
};

std::optional<DirectiveName> directive_from_string(std::string_view text) {
  for (auto [name, spelling] : kDirectiveNames) {
    if (spelling == text) return name;
  }
  return std::nullopt;
}

std::optional<ClauseKind> clause_from_string(std::string_view text) {
  for (auto [kind, spelling] : kClauseNames) {
    if (spelling == text) return kind;
  }
  return std::nullopt;
}

bool is_data_sharing(ClauseKind kind) {
  switch (kind) {
    case ClauseKind::private_:
    case ClauseKind::firstprivate:
    case ClauseKind::lastprivate:
    case ClauseKind::shared:
    case ClauseKind::reduction:
      return true;
    default:
      return false;
  }
}

bool is_single_valued(ClauseKind kind) {
  switch (kind) {
    case ClauseKind::num_threads:
    case ClauseKind::if_:
    case ClauseKind::schedule:
    case ClauseKind::collapse:
    case ClauseKind::default_:
    case ClauseKind::name:
      return true;
    default:
      return false;
  }
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Token {
  enum class Kind { identifier, integer, lparen, rparen, comma, colon, symbol, end };
  Kind kind = Kind::end;
  std::string_view text;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view source) : source_(source) {}

  const Token& peek() {
    if (!lookahead_) lookahead_ = scan();
    return *lookahead_;
  }

  Token next() {
    Token tok = peek();
    lookahead_.reset();
    return tok;
  }

  // Consumes raw text up to the ')' matching an already-consumed '('.
  // Returns the trimmed text; the closing paren is consumed.
  std::pair<std::string_view, std::size_t> raw_until_close(std::size_t open_offset) {
    lookahead_.reset();
    std::size_t depth = 1;
    std::size_t begin = pos_;
    while (pos_ < source_.size()) {
      char c = source_[pos_];
      if (c == '(') {
        ++depth;
      } else if (c == ')') {
        if (--depth == 0) break;
      }
      ++pos_;
    }
    if (depth != 0) throw DirectiveError(open_offset, "unbalanced parentheses");
    std::size_t end = pos_;
    ++pos_;  // ')'
    while (begin < end && is_space(source_[begin])) ++begin;
    while (end > begin && is_space(source_[end - 1])) --end;
    return {source_.substr(begin, end - begin), begin};
  }

  std::size_t size() const { return source_.size(); }

 private:
  Token scan() {
    while (pos_ < source_.size() && is_space(source_[pos_])) ++pos_;
    Token tok;
    tok.offset = pos_;
    if (pos_ >= source_.size()) return tok;

    const char c = source_[pos_];
    auto single = [&](Token::Kind kind) {
      tok.kind = kind;
      tok.text = source_.substr(pos_, 1);
      ++pos_;
      return tok;
    };
    if (is_ident_start(c)) {
      std::size_t begin = pos_;
      while (pos_ < source_.size() && is_ident_char(source_[pos_])) ++pos_;
      tok.kind = Token::Kind::identifier;
      tok.text = source_.substr(begin, pos_ - begin);
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t begin = pos_;
      while (pos_ < source_.size() && is_ident_char(source_[pos_])) ++pos_;
      tok.kind = Token::Kind::integer;
      tok.text = source_.substr(begin, pos_ - begin);
      return tok;
    }
    switch (c) {
      case '(': return single(Token::Kind::lparen);
      case ')': return single(Token::Kind::rparen);
      case ',': return single(Token::Kind::comma);
      case ':': return single(Token::Kind::colon);
      case '+':
      case '*':
      case '-':
      case '^':
        return single(Token::Kind::symbol);
      case '&':
      case '|': {
        std::size_t len = (pos_ + 1 < source_.size() && source_[pos_ + 1] == c) ? 2 : 1;
        tok.kind = Token::Kind::symbol;
        tok.text = source_.substr(pos_, len);
        pos_ += len;
        return tok;
      }
      default:
        throw DirectiveError(pos_, std::string("unexpected character '") + c + "'");
    }
  }

  std::string_view source_;
  std::size_t pos_ = 0;
  std::optional<Token> lookahead_;
};

std::string describe(const Token& tok) {
  if (tok.kind == Token::Kind::end) return "end of directive";
  return "'" + std::string(tok.text) + "'";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) {}

  Directive run() {
    parse_names();
    allowed_ = allowed_clauses(directive_.names);
    if (directive_.is(DirectiveName::critical) && lexer_.peek().kind == Token::Kind::lparen) {
      auto open = lexer_.next();
      auto ident = expect(Token::Kind::identifier, "critical section name");
      expect(Token::Kind::rparen, "')'");
      add_clause(Clause{ClauseKind::name, CriticalName{std::string(ident.text)}}, open.offset);
    }
    while (lexer_.peek().kind != Token::Kind::end) {
      if (lexer_.peek().kind == Token::Kind::comma && !directive_.clauses.empty()) {
        lexer_.next();
      }
      parse_clause();
    }
    return std::move(directive_);
  }

 private:
  void parse_names() {
    auto first = lexer_.next();
    if (first.kind != Token::Kind::identifier) {
      throw DirectiveError(first.offset, "expected directive name, found " + describe(first));
    }
    auto name = directive_from_string(first.text);
    if (!name) throw DirectiveError(first.offset, "unknown directive '" + std::string(first.text) + "'");
    directive_.names.push_back(*name);
    if (*name == DirectiveName::parallel && lexer_.peek().kind == Token::Kind::identifier) {
      auto second = directive_from_string(lexer_.peek().text);
      if (second == DirectiveName::for_ || second == DirectiveName::sections) {
        lexer_.next();
        directive_.names.push_back(*second);
      } else if (second) {
        throw DirectiveError(lexer_.peek().offset,
                             "'parallel " + std::string(lexer_.peek().text) + "' is not a combined directive");
      }
    }
  }

  Token expect(Token::Kind kind, std::string_view what) {
    auto tok = lexer_.next();
    if (tok.kind != kind) {
      throw DirectiveError(tok.offset, "expected " + std::string(what) + ", found " + describe(tok));
    }
    return tok;
  }

  std::int64_t parse_integer(const Token& tok) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size()) {
      throw DirectiveError(tok.offset, "invalid integer literal '" + std::string(tok.text) + "'");
    }
    return value;
  }

  std::vector<std::string> parse_name_list() {
    std::vector<std::string> names;
    for (;;) {
      auto ident = expect(Token::Kind::identifier, "variable name");
      std::string name(ident.text);
      if (std::find(names.begin(), names.end(), name) != names.end()) {
        throw DirectiveError(ident.offset, "variable '" + name + "' listed twice in one clause");
      }
      names.push_back(std::move(name));
      auto sep = lexer_.next();
      if (sep.kind == Token::Kind::rparen) return names;
      if (sep.kind != Token::Kind::comma) {
        throw DirectiveError(sep.offset, "expected ',' or ')', found " + describe(sep));
      }
    }
  }

  void parse_clause() {
    auto head = lexer_.next();
    if (head.kind != Token::Kind::identifier) {
      throw DirectiveError(head.offset, "expected clause, found " + describe(head));
    }
    auto kind = clause_from_string(head.text);
    if (!kind) throw DirectiveError(head.offset, "unknown clause '" + std::string(head.text) + "'");
    if (!allowed_.count(*kind)) {
      throw DirectiveError(head.offset, "clause '" + std::string(head.text) + "' is not valid for directive '" +
                                            directive_text() + "'");
    }

    if (*kind == ClauseKind::nowait) {
      add_clause(Clause{ClauseKind::nowait, std::monostate{}}, head.offset);
      return;
    }

    auto open = expect(Token::Kind::lparen, "'('");
    switch (*kind) {
      case ClauseKind::num_threads:
      case ClauseKind::if_: {
        auto [text, at] = lexer_.raw_until_close(open.offset);
        if (text.empty()) throw DirectiveError(at, "empty expression");
        add_clause(Clause{*kind, RawExpr{std::string(text)}}, head.offset);
        return;
      }
      case ClauseKind::private_:
      case ClauseKind::firstprivate:
      case ClauseKind::lastprivate:
      case ClauseKind::shared:
      case ClauseKind::copyprivate:
        add_clause(Clause{*kind, VarList{parse_name_list()}}, head.offset);
        return;
      case ClauseKind::reduction: {
        auto op_tok = lexer_.next();
        std::optional<ReductionOp> op;
        if (op_tok.kind == Token::Kind::symbol || op_tok.kind == Token::Kind::identifier) {
          op = reduction_op_from_symbol(op_tok.text);
        }
        if (!op) throw DirectiveError(op_tok.offset, "invalid reduction operator " + describe(op_tok));
        expect(Token::Kind::colon, "':'");
        add_clause(Clause{ClauseKind::reduction, ReductionPayload{*op, parse_name_list()}}, head.offset);
        return;
      }
      case ClauseKind::schedule: {
        auto kind_tok = expect(Token::Kind::identifier, "schedule kind");
        auto sched = schedule_kind_from_string(kind_tok.text);
        if (!sched) {
          throw DirectiveError(kind_tok.offset, "unknown schedule kind '" + std::string(kind_tok.text) + "'");
        }
        ScheduleSpec spec{*sched, std::nullopt};
        auto sep = lexer_.next();
        if (sep.kind == Token::Kind::comma) {
          auto chunk_tok = expect(Token::Kind::integer, "chunk size");
          auto chunk = parse_integer(chunk_tok);
          if (chunk < 1) throw DirectiveError(chunk_tok.offset, "chunk size must be a positive integer");
          if (*sched == ScheduleKind::auto_ || *sched == ScheduleKind::runtime) {
            throw DirectiveError(chunk_tok.offset,
                                 "schedule(" + std::string(kind_tok.text) + ") does not take a chunk size");
          }
          spec.chunk = chunk;
          sep = lexer_.next();
        }
        if (sep.kind != Token::Kind::rparen) {
          throw DirectiveError(sep.offset, "expected ')', found " + describe(sep));
        }
        add_clause(Clause{ClauseKind::schedule, spec}, head.offset);
        return;
      }
      case ClauseKind::collapse: {
        auto tok = expect(Token::Kind::integer, "collapse depth");
        auto depth = parse_integer(tok);
        if (depth < 2) throw DirectiveError(tok.offset, "collapse depth must be an integer >= 2");
        expect(Token::Kind::rparen, "')'");
        add_clause(Clause{ClauseKind::collapse, CollapseDepth{depth}}, head.offset);
        return;
      }
      case ClauseKind::default_: {
        auto tok = expect(Token::Kind::identifier, "'shared' or 'none'");
        DefaultKind value;
        if (tok.text == "shared") {
          value = DefaultKind::shared;
        } else if (tok.text == "none") {
          value = DefaultKind::none;
        } else {
          throw DirectiveError(tok.offset, "default() accepts 'shared' or 'none'");
        }
        expect(Token::Kind::rparen, "')'");
        add_clause(Clause{ClauseKind::default_, value}, head.offset);
        return;
      }
      case ClauseKind::nowait:
      case ClauseKind::name:
        break;
    }
  }

  void add_clause(Clause clause, std::size_t offset) {
    auto& clauses = directive_.clauses;
    if (clause.kind == ClauseKind::nowait && directive_.has(ClauseKind::nowait)) return;
    if (is_single_valued(clause.kind) && directive_.has(clause.kind)) {
      throw DirectiveError(offset, "duplicate '" + std::string(to_string(clause.kind)) + "' clause");
    }
    if (directive_.is(DirectiveName::single) &&
        ((clause.kind == ClauseKind::nowait && directive_.has(ClauseKind::copyprivate)) ||
         (clause.kind == ClauseKind::copyprivate && directive_.has(ClauseKind::nowait)))) {
      throw DirectiveError(offset, "copyprivate and nowait cannot be combined on 'single'");
    }

    if (std::holds_alternative<VarList>(clause.payload) || std::holds_alternative<ReductionPayload>(clause.payload)) {
      for (const auto& var : clause.vars()) check_variable(clause.kind, var, offset);
    }

    // Merge repeated list clauses of the same kind (and, for reductions, the same operator).
    for (auto& existing : clauses) {
      if (existing.kind != clause.kind) continue;
      if (auto* list = std::get_if<VarList>(&existing.payload)) {
        auto& incoming = std::get<VarList>(clause.payload).names;
        list->names.insert(list->names.end(), incoming.begin(), incoming.end());
        return;
      }
      if (auto* red = std::get_if<ReductionPayload>(&existing.payload)) {
        auto& incoming = std::get<ReductionPayload>(clause.payload);
        if (red->op == incoming.op) {
          red->names.insert(red->names.end(), incoming.names.begin(), incoming.names.end());
          return;
        }
      }
    }
    clauses.push_back(std::move(clause));
  }

  void check_variable(ClauseKind kind, const std::string& var, std::size_t offset) {
    for (const auto& existing : directive_.clauses) {
      if (!std::holds_alternative<VarList>(existing.payload) &&
          !std::holds_alternative<ReductionPayload>(existing.payload)) {
        continue;
      }
      const auto& names = existing.vars();
      if (std::find(names.begin(), names.end(), var) == names.end()) continue;
      if (existing.kind == kind) {
        throw DirectiveError(offset, "variable '" + var + "' already listed in '" +
                                         std::string(to_string(kind)) + "'");
      }
      if (is_data_sharing(kind) && is_data_sharing(existing.kind)) {
        throw DirectiveError(offset, "variable '" + var + "' appears in both '" +
                                         std::string(to_string(existing.kind)) + "' and '" +
                                         std::string(to_string(kind)) + "'");
      }
    }
  }

  std::string directive_text() const {
    std::string out;
    for (auto name : directive_.names) {
      if (!out.empty()) out += ' ';
      out += to_string(name);
    }
    return out;
  }

  Lexer lexer_;
  Directive directive_;
  std::set<ClauseKind> allowed_;
};

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

std::string_view to_string(DirectiveName name) {
  for (auto [n, spelling] : kDirectiveNames) {
    if (n == name) return spelling;
  }
  return "?";
}

std::string_view to_string(ClauseKind kind) {
  if (kind == ClauseKind::name) return "name";
  for (auto [k, spelling] : kClauseNames) {
    if (k == kind) return spelling;
  }
  return "?";
}

std::string_view to_string(ReductionOp op) {
  for (auto [o, spelling] : kReductionOps) {
    if (o == op) return spelling;
  }
  return "?";
}

std::string_view to_string(DefaultKind kind) { return kind == DefaultKind::shared ? "shared" : "none"; }

std::optional<ReductionOp> reduction_op_from_symbol(std::string_view symbol) {
  for (auto [op, spelling] : kReductionOps) {
    if (spelling == symbol) return op;
  }
  return std::nullopt;
}

const std::vector<std::string>& Clause::vars() const {
  static const std::vector<std::string> empty;
  if (auto* list = std::get_if<VarList>(&payload)) return list->names;
  if (auto* red = std::get_if<ReductionPayload>(&payload)) return red->names;
  return empty;
}

bool Directive::is(DirectiveName name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const Clause* Directive::find(ClauseKind kind) const {
  for (const auto& c : clauses) {
    if (c.kind == kind) return &c;
  }
  return nullptr;
}

std::optional<ScheduleSpec> Directive::schedule() const {
  if (auto* c = find(ClauseKind::schedule)) return std::get<ScheduleSpec>(c->payload);
  return std::nullopt;
}

std::int64_t Directive::collapse() const {
  if (auto* c = find(ClauseKind::collapse)) return std::get<CollapseDepth>(c->payload).depth;
  return 1;
}

DefaultKind Directive::default_sharing() const {
  if (auto* c = find(ClauseKind::default_)) return std::get<DefaultKind>(c->payload);
  return DefaultKind::shared;
}

std::optional<std::string> Directive::critical_name() const {
  if (auto* c = find(ClauseKind::name)) return std::get<CriticalName>(c->payload).name;
  return std::nullopt;
}

std::vector<std::string> Directive::vars(ClauseKind kind) const {
  std::vector<std::string> out;
  for (const auto& c : clauses) {
    if (c.kind != kind) continue;
    out.insert(out.end(), c.vars().begin(), c.vars().end());
  }
  return out;
}

DirectiveError::DirectiveError(std::size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message), offset_(offset), message_(message) {}

Directive parse(std::string_view text) { return Parser(text).run(); }

std::string render(const Directive& directive) {
  std::string out;
  for (auto name : directive.names) {
    if (!out.empty()) out += ' ';
    out += to_string(name);
  }
  for (const auto& clause : directive.clauses) {
    if (clause.kind == ClauseKind::name) {
      out += "(" + std::get<CriticalName>(clause.payload).name + ")";
      continue;
    }
    out += ' ';
    out += to_string(clause.kind);
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, VarList>) {
            out += "(" + join(p.names) + ")";
          } else if constexpr (std::is_same_v<P, ReductionPayload>) {
            out += "(" + std::string(to_string(p.op)) + ":" + join(p.names) + ")";
          } else if constexpr (std::is_same_v<P, RawExpr>) {
            out += "(" + p.text + ")";
          } else if constexpr (std::is_same_v<P, ScheduleSpec>) {
            out += "(" + std::string(to_string(p.kind));
            if (p.chunk) out += ", " + std::to_string(*p.chunk);
            out += ")";
          } else if constexpr (std::is_same_v<P, CollapseDepth>) {
            out += "(" + std::to_string(p.depth) + ")";
          } else if constexpr (std::is_same_v<P, DefaultKind>) {
            out += "(" + std::string(to_string(p)) + ")";
          }
        },
        clause.payload);
  }
  return out;
}

const std::map<DirectiveName, std::set<ClauseKind>>& validity_table() {
  using K = ClauseKind;
  static const std::map<DirectiveName, std::set<ClauseKind>> table = {
      {DirectiveName::parallel, {K::num_threads, K::if_, K::private_, K::firstprivate, K::shared, K::default_,
                                 K::reduction}},
      {DirectiveName::for_, {K::private_, K::firstprivate, K::lastprivate, K::reduction, K::schedule, K::collapse,
                             K::nowait}},
      {DirectiveName::sections, {K::private_, K::firstprivate, K::lastprivate, K::reduction, K::nowait}},
      {DirectiveName::single, {K::private_, K::firstprivate, K::copyprivate, K::nowait}},
      {DirectiveName::task, {K::if_, K::default_, K::private_, K::firstprivate, K::shared}},
      {DirectiveName::critical, {K::name}},
      {DirectiveName::taskwait, {}},
      {DirectiveName::barrier, {}},
      {DirectiveName::section, {}},
  };
  return table;
}

std::set<ClauseKind> allowed_clauses(const std::vector<DirectiveName>& names) {
  std::set<ClauseKind> out;
  for (auto name : names) {
    const auto& entry = validity_table().at(name);
    out.insert(entry.begin(), entry.end());
  }
  // A combined construct ends with the region's own barrier.
  if (names.size() > 1) out.erase(ClauseKind::nowait);
  return out;
}

}  // namespace ompcore
