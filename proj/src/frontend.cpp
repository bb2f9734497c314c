#include "mongolog/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace mongolog {

Goal Goal::call(Term t) {
  Goal g;
  g.kind = Kind::Call;
  g.t1 = std::move(t);
  return g;
}

Goal Goal::truth() { return Goal{}; }

Goal Goal::falsity() {
  Goal g;
  g.kind = Kind::False;
  return g;
}

Goal Goal::conj(std::vector<Goal> gs) {
  Goal g;
  g.kind = Kind::Conj;
  g.children = std::move(gs);
  return g;
}

Goal Goal::disj(std::vector<Goal> gs) {
  Goal g;
  g.kind = Kind::Disj;
  g.children = std::move(gs);
  return g;
}

Goal Goal::if_then(Goal cond, Goal then_g) {
  Goal g;
  g.kind = Kind::IfThen;
  g.children.push_back(std::move(cond));
  g.children.push_back(std::move(then_g));
  return g;
}

Goal Goal::if_then_else(Goal cond, Goal then_g, Goal else_g) {
  Goal g;
  g.kind = Kind::IfThenElse;
  g.children.push_back(std::move(cond));
  g.children.push_back(std::move(then_g));
  g.children.push_back(std::move(else_g));
  return g;
}

Goal Goal::neg(Goal inner) {
  Goal g;
  g.kind = Kind::Neg;
  g.children.push_back(std::move(inner));
  return g;
}

Goal Goal::limit(Goal inner, std::int64_t k) {
  Goal g;
  g.kind = Kind::LimitG;
  g.children.push_back(std::move(inner));
  g.k = k;
  return g;
}

Goal Goal::once(Goal inner) {
  Goal g;
  g.kind = Kind::Once;
  g.children.push_back(std::move(inner));
  return g;
}

Goal Goal::ignore(Goal inner) {
  Goal g;
  g.kind = Kind::Ignore;
  g.children.push_back(std::move(inner));
  return g;
}

Goal Goal::unify(Term a, Term b) {
  Goal g;
  g.kind = Kind::Unify;
  g.t1 = std::move(a);
  g.t2 = std::move(b);
  return g;
}

Goal Goal::eq(Term a, Term b) {
  Goal g;
  g.kind = Kind::EqG;
  g.t1 = std::move(a);
  g.t2 = std::move(b);
  return g;
}

Goal Goal::neq(Term a, Term b) {
  Goal g;
  g.kind = Kind::NeqG;
  g.t1 = std::move(a);
  g.t2 = std::move(b);
  return g;
}

Goal Goal::var_check(Term t) {
  Goal g;
  g.kind = Kind::VarG;
  g.t1 = std::move(t);
  return g;
}

Goal Goal::nonvar_check(Term t) {
  Goal g;
  g.kind = Kind::NonvarG;
  g.t1 = std::move(t);
  return g;
}

Goal Goal::ground_check(Term t) {
  Goal g;
  g.kind = Kind::GroundG;
  g.t1 = std::move(t);
  return g;
}

Goal Goal::transitive(std::string pred, Term a, Term b) {
  Goal g;
  g.kind = Kind::Transitive;
  g.pred = std::move(pred);
  g.t1 = std::move(a);
  g.t2 = std::move(b);
  return g;
}

bool operator==(const Goal& a, const Goal& b) {
  return a.kind == b.kind && a.t1 == b.t1 && a.t2 == b.t2 && a.pred == b.pred && a.k == b.k &&
         a.children == b.children;
}

bool Program::has_clauses(const std::string& name, std::size_t arity) const {
  return std::any_of(clauses.begin(), clauses.end(), [&](const Clause& c) {
    return c.head.is_compound() ? (c.head.symbol() == name && c.head.arity() == arity)
                                : (c.head.is_atom() && c.head.symbol() == name && arity == 0);
  });
}

std::vector<const Clause*> Program::clauses_for(const std::string& name, std::size_t arity) const {
  std::vector<const Clause*> out;
  for (const Clause& c : clauses) {
    bool matches = c.head.is_compound() ? (c.head.symbol() == name && c.head.arity() == arity)
                                        : (c.head.is_atom() && c.head.symbol() == name && arity == 0);
    if (matches) out.push_back(&c);
  }
  return out;
}

namespace {

// --- lexer ---

struct Token {
  enum class Kind { Atom, Var, Int, Float, LParen, RParen, Comma, End, Eof };
  Kind kind = Kind::Eof;
  std::string text;
  std::size_t line = 1;
  std::size_t col = 1;
  bool glued = false;  // no whitespace between this token and the previous one
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      bool glued = !skip_layout();
      std::size_t tl = line_, tc = col_;
      if (pos_ >= src_.size()) {
        out.push_back(Token{Token::Kind::Eof, "", tl, tc, glued});
        return out;
      }
      Token t = next_token();
      t.line = tl;
      t.col = tc;
      t.glued = glued && !out.empty();
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw parse_error(line_, col_, msg); }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  // Returns true when any layout (whitespace or comment) was consumed.
  bool skip_layout() {
    bool any = false;
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == '%') {
        while (pos_ < src_.size() && peek() != '\n') advance();
        any = true;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  Token number(bool negative) {
    std::string digits;
    if (negative) digits += '-';
    while (std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    bool is_float = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_float = true;
      digits += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    }
    return Token{is_float ? Token::Kind::Float : Token::Kind::Int, digits, 0, 0, false};
  }

  Token next_token() {
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) return number(false);
    if (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      advance();
      return number(true);
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string name;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') name += advance();
      return Token{Token::Kind::Atom, name, 0, 0, false};
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      std::string name;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') name += advance();
      return Token{Token::Kind::Var, name, 0, 0, false};
    }
    switch (c) {
      case '(': advance(); return Token{Token::Kind::LParen, "(", 0, 0, false};
      case ')': advance(); return Token{Token::Kind::RParen, ")", 0, 0, false};
      case ',': advance(); return Token{Token::Kind::Comma, ",", 0, 0, false};
      case '[': fail("lists are not supported");
      case '\'': fail("quoted atoms are not supported");
      case '"': fail("strings are not supported");
      case '!': fail("cut is not supported");
      case '.': {
        // A clause terminator is '.' followed by layout, a comment, or the end.
        char after = peek(1);
        if (after == '\0' || std::isspace(static_cast<unsigned char>(after)) || after == '%') {
          advance();
          return Token{Token::Kind::End, ".", 0, 0, false};
        }
        fail("unexpected character '.'");
      }
      case ':':
        if (peek(1) == '-') {
          advance();
          advance();
          return Token{Token::Kind::Atom, ":-", 0, 0, false};
        }
        fail("unexpected character ':'");
      case ';': advance(); return Token{Token::Kind::Atom, ";", 0, 0, false};
      case '-':
        if (peek(1) == '>') {
          advance();
          advance();
          return Token{Token::Kind::Atom, "->", 0, 0, false};
        }
        fail("operator '-' is not supported (no arithmetic)");
      case '\\':
        if (peek(1) == '=' && peek(2) == '=') {
          advance();
          advance();
          advance();
          return Token{Token::Kind::Atom, "\\==", 0, 0, false};
        }
        if (peek(1) == '+') {
          advance();
          advance();
          return Token{Token::Kind::Atom, "\\+", 0, 0, false};
        }
        fail("unsupported operator starting with '\\'");
      case '=':
        if (peek(1) == '=') {
          advance();
          advance();
          return Token{Token::Kind::Atom, "==", 0, 0, false};
        }
        advance();
        return Token{Token::Kind::Atom, "=", 0, 0, false};
      case '/': advance(); return Token{Token::Kind::Atom, "/", 0, 0, false};
      default: fail(std::string("unexpected character '") + c + "'");
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

// --- operator table ---

enum class Assoc { XFX, XFY, YFX };

struct InfixOp {
  int prec;
  Assoc assoc;
};

const std::map<std::string, InfixOp>& infix_ops() {
  static const std::map<std::string, InfixOp> table = {
      {":-", {1200, Assoc::XFX}}, {";", {1100, Assoc::XFY}},  {"->", {1050, Assoc::XFY}},
      {",", {1000, Assoc::XFY}},  {"=", {700, Assoc::XFX}},   {"==", {700, Assoc::XFX}},
      {"\\==", {700, Assoc::XFX}}, {"/", {400, Assoc::YFX}},
  };
  return table;
}

struct PrefixOp {
  int prec;
  int operand_max;
};

const std::map<std::string, PrefixOp>& prefix_ops() {
  static const std::map<std::string, PrefixOp> table = {
      {":-", {1200, 1199}},
      {"\\+", {900, 900}},
      {"edb", {1150, 1150}},
  };
  return table;
}

// --- variable scope ---

class VarScope {
 public:
  // prefix is prepended to every variable name; empty keeps user names.
  explicit VarScope(std::string prefix) : prefix_(std::move(prefix)) {}

  std::string rename(const std::string& raw) {
    if (raw == "_") return prefix_ + "_G" + std::to_string(anon_counter_++);
    return prefix_ + raw;
  }

 private:
  std::string prefix_;
  std::size_t anon_counter_ = 0;
};

// --- parser ---

struct Parsed {
  Term term = Term::atom("");
  int prec = 0;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, VarScope* scope)
      : tokens_(std::move(tokens)), scope_(scope) {}

  const Token& peek() const { return tokens_[pos_]; }
  const Token& peek_next() const {
    return pos_ + 1 < tokens_.size() ? tokens_[pos_ + 1] : tokens_.back();
  }
  bool at_eof() const { return peek().kind == Token::Kind::Eof; }

  void set_scope(VarScope* scope) { scope_ = scope; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw parse_error(t.line, t.col, msg);
  }

  const Token& consume() { return tokens_[pos_++]; }

  void expect(Token::Kind kind, const std::string& what) {
    if (peek().kind != kind) fail("expected " + what);
    consume();
  }

  Term parse_clause_term() {
    Parsed p = parse_expr(1200);
    if (peek().kind != Token::Kind::End) {
      if (peek().kind == Token::Kind::Atom && peek().text == "is")
        fail("arithmetic 'is' is not supported");
      fail("expected '.' at end of clause");
    }
    consume();
    return p.term;
  }

  Term parse_full_term() {
    Parsed p = parse_expr(1200);
    if (peek().kind == Token::Kind::End) consume();
    if (!at_eof()) {
      if (peek().kind == Token::Kind::Atom && peek().text == "is")
        fail("arithmetic 'is' is not supported");
      fail("unexpected input after term");
    }
    return p.term;
  }

 private:
  static bool starts_term(const Token& t) {
    switch (t.kind) {
      case Token::Kind::Atom:
      case Token::Kind::Var:
      case Token::Kind::Int:
      case Token::Kind::Float:
      case Token::Kind::LParen: return true;
      default: return false;
    }
  }

  Parsed parse_expr(int max_prec) {
    Parsed left = parse_primary(max_prec);
    while (true) {
      const Token& t = peek();
      std::string op;
      if (t.kind == Token::Kind::Comma)
        op = ",";
      else if (t.kind == Token::Kind::Atom && infix_ops().count(t.text))
        op = t.text;
      else if (t.kind == Token::Kind::Atom && t.text == "is")
        fail("arithmetic 'is' is not supported");
      else
        break;
      const InfixOp& info = infix_ops().at(op);
      if (info.prec > max_prec) break;
      int left_max = info.assoc == Assoc::YFX ? info.prec : info.prec - 1;
      if (left.prec > left_max) break;
      consume();
      int right_max = info.assoc == Assoc::XFY ? info.prec : info.prec - 1;
      Parsed right = parse_expr(right_max);
      left = Parsed{Term::compound(op, {left.term, right.term}), info.prec};
    }
    return left;
  }

  Parsed parse_primary(int max_prec) {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Int: {
        std::string text = consume().text;
        return Parsed{Term::number(Value(static_cast<std::int64_t>(std::stoll(text)))), 0};
      }
      case Token::Kind::Float: {
        std::string text = consume().text;
        return Parsed{Term::number(Value(std::stod(text))), 0};
      }
      case Token::Kind::Var: {
        std::string name = consume().text;
        return Parsed{Term::var(scope_->rename(name)), 0};
      }
      case Token::Kind::LParen: {
        consume();
        Parsed inner = parse_expr(1200);
        expect(Token::Kind::RParen, "')'");
        return Parsed{inner.term, 0};
      }
      case Token::Kind::Atom: {
        std::string name = t.text;
        if (peek_next().kind == Token::Kind::LParen && peek_next().glued) {
          consume();
          consume();
          std::vector<Term> args;
          args.push_back(parse_expr(999).term);
          while (peek().kind == Token::Kind::Comma) {
            consume();
            args.push_back(parse_expr(999).term);
          }
          expect(Token::Kind::RParen, "')'");
          return Parsed{Term::compound(name, std::move(args)), 0};
        }
        auto pit = prefix_ops().find(name);
        if (pit != prefix_ops().end() && pit->second.prec <= max_prec &&
            starts_term(peek_next())) {
          consume();
          Parsed operand = parse_expr(pit->second.operand_max);
          return Parsed{Term::compound(name, {operand.term}), pit->second.prec};
        }
        if (infix_ops().count(name) && name != "/")
          fail("operator '" + name + "' cannot appear here");
        consume();
        return Parsed{Term::atom(name), 0};
      }
      default: fail("expected a term");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  VarScope* scope_;
};

// --- goal conversion ---

[[noreturn]] void goal_fail(const std::string& msg) { throw parse_error(0, 0, msg); }

Goal term_to_goal(const Term& t);

bool is_op(const Term& t, const std::string& name, std::size_t arity) {
  return t.is_compound() && t.symbol() == name && t.arity() == arity;
}

Goal convert_disj(const Term& t) {
  std::vector<Goal> elems;
  const Term* cur = &t;
  while (true) {
    if (is_op(*cur, ";", 2)) {
      const Term& l = cur->args()[0];
      if (is_op(l, "->", 2)) {
        elems.push_back(Goal::if_then_else(term_to_goal(l.args()[0]), term_to_goal(l.args()[1]),
                                           term_to_goal(cur->args()[1])));
        break;
      }
      elems.push_back(term_to_goal(l));
      cur = &cur->args()[1];
      continue;
    }
    elems.push_back(term_to_goal(*cur));
    break;
  }
  if (elems.size() == 1) return elems[0];
  return Goal::disj(std::move(elems));
}

Goal term_to_goal(const Term& t) {
  if (t.is_var()) goal_fail("variable functor in goal position");
  if (t.is_number()) goal_fail("number in goal position");
  if (t.is_atom()) {
    if (t.symbol() == "true") return Goal::truth();
    if (t.symbol() == "false") return Goal::falsity();
    return Goal::call(t);
  }
  const std::string& f = t.symbol();
  if (f == "," && t.arity() == 2) {
    std::vector<Goal> elems;
    const Term* cur = &t;
    while (is_op(*cur, ",", 2)) {
      elems.push_back(term_to_goal(cur->args()[0]));
      cur = &cur->args()[1];
    }
    elems.push_back(term_to_goal(*cur));
    return Goal::conj(std::move(elems));
  }
  if (f == ";" && t.arity() == 2) return convert_disj(t);
  if (f == "->" && t.arity() == 2)
    return Goal::if_then(term_to_goal(t.args()[0]), term_to_goal(t.args()[1]));
  if (f == "\\+" && t.arity() == 1) return Goal::neg(term_to_goal(t.args()[0]));
  if (f == "=" && t.arity() == 2) return Goal::unify(t.args()[0], t.args()[1]);
  if (f == "==" && t.arity() == 2) return Goal::eq(t.args()[0], t.args()[1]);
  if (f == "\\==" && t.arity() == 2) return Goal::neq(t.args()[0], t.args()[1]);
  if (f == "var" && t.arity() == 1) return Goal::var_check(t.args()[0]);
  if (f == "nonvar" && t.arity() == 1) return Goal::nonvar_check(t.args()[0]);
  if (f == "ground" && t.arity() == 1) return Goal::ground_check(t.args()[0]);
  if (f == "limit" && t.arity() == 2) {
    const Term& count = t.args()[1];
    if (!count.is_number() || !count.number_value().is_int() ||
        count.number_value().as_int() < 0)
      goal_fail("limit/2 needs a non-negative integer count");
    return Goal::limit(term_to_goal(t.args()[0]), count.number_value().as_int());
  }
  if (f == "once" && t.arity() == 1) return Goal::once(term_to_goal(t.args()[0]));
  if (f == "ignore" && t.arity() == 1) return Goal::ignore(term_to_goal(t.args()[0]));
  if (f == "transitive" && t.arity() == 1) {
    const Term& inner = t.args()[0];
    if (!inner.is_compound() || inner.arity() != 2)
      goal_fail("transitive/1 needs a binary goal argument");
    return Goal::transitive(inner.symbol(), inner.args()[0], inner.args()[1]);
  }
  return Goal::call(t);
}

// --- directives and program assembly ---

void register_edb(const Term& spec, Program& prog, std::size_t line) {
  if (is_op(spec, ",", 2)) {
    register_edb(spec.args()[0], prog, line);
    register_edb(spec.args()[1], prog, line);
    return;
  }
  if (is_op(spec, "/", 2) && spec.args()[0].is_atom() && spec.args()[1].is_number() &&
      spec.args()[1].number_value().is_int() && spec.args()[1].number_value().as_int() >= 0) {
    prog.edb.insert({spec.args()[0].symbol(),
                     static_cast<std::size_t>(spec.args()[1].number_value().as_int())});
    return;
  }
  throw parse_error(line, 1, "edb declaration needs name/arity entries");
}

void process_directive(const Term& body, Program& prog, std::size_t line) {
  if (body.is_compound() && body.symbol() == "edb" && body.arity() == 1) {
    register_edb(body.args()[0], prog, line);
    return;
  }
  throw parse_error(line, 1, "unknown directive");
}

std::pair<std::string, std::size_t> head_key(const Term& head) {
  if (head.is_atom()) return {head.symbol(), 0};
  if (head.is_compound()) return {head.symbol(), head.arity()};
  throw parse_error(0, 0, "clause head must be an atom or compound term");
}

void collect_calls(const Goal& g, std::vector<std::pair<std::string, std::size_t>>& out) {
  if (g.kind == Goal::Kind::Call) {
    const Term& t = g.t1;
    out.push_back(t.is_compound() ? std::make_pair(t.symbol(), t.arity())
                                  : std::make_pair(t.symbol(), std::size_t(0)));
  }
  for (const Goal& c : g.children) collect_calls(c, out);
}

void check_recursion(const Program& prog, const std::vector<std::size_t>& clause_lines) {
  using Key = std::pair<std::string, std::size_t>;
  std::map<Key, std::vector<Key>> graph;
  std::map<Key, std::size_t> first_line;
  for (std::size_t i = 0; i < prog.clauses.size(); ++i) {
    const Clause& c = prog.clauses[i];
    Key head = head_key(c.head);
    if (!first_line.count(head)) first_line[head] = clause_lines[i];
    std::vector<Key> calls;
    collect_calls(c.body, calls);
    for (const Key& callee : calls)
      if (prog.has_clauses(callee.first, callee.second)) graph[head].push_back(callee);
  }
  std::map<Key, int> state;  // 0 unvisited, 1 in progress, 2 done
  std::vector<Key> stack;
  auto visit = [&](auto&& self, const Key& k) -> void {
    state[k] = 1;
    for (const Key& next : graph[k]) {
      if (state[next] == 1)
        throw parse_error(first_line.count(next) ? first_line[next] : 1, 1,
                          "recursion detected involving predicate " + next.first + "/" +
                              std::to_string(next.second));
      if (state[next] == 0) self(self, next);
    }
    state[k] = 2;
  };
  for (const auto& [k, v] : graph) {
    (void)v;
    if (state[k] == 0) visit(visit, k);
  }
}

}  // namespace

Program parse_program(const std::string& source) {
  std::vector<Token> tokens = Lexer(source).run();
  Program prog;
  std::vector<std::size_t> clause_lines;
  VarScope dummy("");
  Parser parser(std::move(tokens), &dummy);
  std::size_t clause_index = 0;
  while (!parser.at_eof()) {
    std::size_t line = parser.peek().line;
    VarScope scope("_c" + std::to_string(clause_index) + "_");
    parser.set_scope(&scope);
    Term t = parser.parse_clause_term();
    if (t.is_compound() && t.symbol() == ":-" && t.arity() == 1) {
      process_directive(t.args()[0], prog, line);
      continue;
    }
    Clause clause;
    try {
      if (t.is_compound() && t.symbol() == ":-" && t.arity() == 2) {
        clause.head = t.args()[0];
        clause.body = term_to_goal(t.args()[1]);
      } else {
        clause.head = t;
        clause.body = Goal::truth();
      }
    } catch (const parse_error& e) {
      throw parse_error(line, 1, e.what());
    }
    if (!clause.head.is_atom() && !clause.head.is_compound())
      throw parse_error(line, 1, "clause head must be an atom or compound term");
    prog.clauses.push_back(std::move(clause));
    clause_lines.push_back(line);
    ++clause_index;
  }
  for (std::size_t i = 0; i < prog.clauses.size(); ++i) {
    auto [name, arity] = head_key(prog.clauses[i].head);
    if (prog.is_edb(name, arity))
      throw parse_error(clause_lines[i], 1,
                        "predicate " + name + "/" + std::to_string(arity) +
                            " is declared edb and cannot have clauses");
  }
  check_recursion(prog, clause_lines);
  return prog;
}

Goal parse_query(const std::string& source) {
  std::vector<Token> tokens = Lexer(source).run();
  VarScope scope("");
  Parser parser(std::move(tokens), &scope);
  Term t = parser.parse_full_term();
  return term_to_goal(t);
}

Term parse_term(const std::string& source) {
  std::vector<Token> tokens = Lexer(source).run();
  VarScope scope("");
  Parser parser(std::move(tokens), &scope);
  return parser.parse_full_term();
}

// --- printing ---

namespace {

bool plain_atom(const std::string& name) {
  if (name.empty() || !std::islower(static_cast<unsigned char>(name[0]))) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string print_number(const Value& v) {
  if (v.is_int()) return std::to_string(v.as_int());
  return v.to_json();
}

std::string print_prec(const Term& t, int max_prec) {
  switch (t.kind()) {
    case Term::Kind::Atom: return t.symbol();
    case Term::Kind::Number: return print_number(t.number_value());
    case Term::Kind::Var: return t.symbol();
    case Term::Kind::Compound: {
      if (t.arity() == 2) {
        auto it = infix_ops().find(t.symbol());
        if (it != infix_ops().end()) {
          const InfixOp& op = it->second;
          int left_max = op.assoc == Assoc::YFX ? op.prec : op.prec - 1;
          int right_max = op.assoc == Assoc::XFY ? op.prec : op.prec - 1;
          std::string body = print_prec(t.args()[0], left_max) +
                             (t.symbol() == "," ? "" : " ") + t.symbol() + " " +
                             print_prec(t.args()[1], right_max);
          if (op.prec > max_prec) return "(" + body + ")";
          return body;
        }
      }
      if (t.arity() == 1 && prefix_ops().count(t.symbol()) && !plain_atom(t.symbol())) {
        const PrefixOp& op = prefix_ops().at(t.symbol());
        std::string body = t.symbol() + " " + print_prec(t.args()[0], op.operand_max);
        if (op.prec > max_prec) return "(" + body + ")";
        return body;
      }
      std::string out = t.symbol() + "(";
      for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ", ";
        out += print_prec(t.args()[i], 999);
      }
      return out + ")";
    }
  }
  return "";
}

Term fold_right(const std::string& op, const std::vector<Term>& elems) {
  Term acc = elems.back();
  for (std::size_t i = elems.size() - 1; i-- > 0;) acc = Term::compound(op, {elems[i], acc});
  return acc;
}

}  // namespace

std::string print_term(const Term& t) { return print_prec(t, 1200); }

Term goal_to_term(const Goal& g) {
  switch (g.kind) {
    case Goal::Kind::Call: return g.t1;
    case Goal::Kind::True: return Term::atom("true");
    case Goal::Kind::False: return Term::atom("false");
    case Goal::Kind::Conj: {
      if (g.children.empty()) return Term::atom("true");
      std::vector<Term> elems;
      for (const Goal& c : g.children) elems.push_back(goal_to_term(c));
      return fold_right(",", elems);
    }
    case Goal::Kind::Disj: {
      if (g.children.empty()) return Term::atom("false");
      std::vector<Term> elems;
      for (const Goal& c : g.children) elems.push_back(goal_to_term(c));
      return fold_right(";", elems);
    }
    case Goal::Kind::IfThen:
      return Term::compound("->", {goal_to_term(g.children[0]), goal_to_term(g.children[1])});
    case Goal::Kind::IfThenElse:
      return Term::compound(
          ";", {Term::compound("->", {goal_to_term(g.children[0]), goal_to_term(g.children[1])}),
                goal_to_term(g.children[2])});
    case Goal::Kind::Neg: return Term::compound("\\+", {goal_to_term(g.children[0])});
    case Goal::Kind::LimitG:
      return Term::compound("limit", {goal_to_term(g.children[0]), Term::number(Value(g.k))});
    case Goal::Kind::Once: return Term::compound("once", {goal_to_term(g.children[0])});
    case Goal::Kind::Ignore: return Term::compound("ignore", {goal_to_term(g.children[0])});
    case Goal::Kind::Unify: return Term::compound("=", {g.t1, g.t2});
    case Goal::Kind::EqG: return Term::compound("==", {g.t1, g.t2});
    case Goal::Kind::NeqG: return Term::compound("\\==", {g.t1, g.t2});
    case Goal::Kind::VarG: return Term::compound("var", {g.t1});
    case Goal::Kind::NonvarG: return Term::compound("nonvar", {g.t1});
    case Goal::Kind::GroundG: return Term::compound("ground", {g.t1});
    case Goal::Kind::Transitive:
      return Term::compound("transitive", {Term::compound(g.pred, {g.t1, g.t2})});
  }
  return Term::atom("true");
}

std::string print_goal(const Goal& g) { return print_prec(goal_to_term(g), 1200); }

std::vector<std::pair<std::string, std::string>> goal_vars(const Goal& g) {
  return vars_of(goal_to_term(g));
}

}  // namespace mongolog
