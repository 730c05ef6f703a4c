#include "nabla/parser.hpp"

#include <cctype>
#include <set>

namespace nabla {

namespace {

enum class Tok {
  Ident,
  String,
  Directive,
  LParen,
  RParen,
  Dot,
  Lambda,  // backslash
  Eq,
  And,
  Or,
  Imp,
  Define,  // :=
  Cons,    // ::
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourceLoc loc;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

bool is_variable_name(const std::string& s) {
  return !s.empty() && (std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_');
}

bool is_reserved(const std::string& s) { return s == "forall" || s == "exists" || s == "nabla"; }

std::vector<Token> lex(std::string_view src, const std::string& file) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{file, line, col};
    auto two = src.substr(i, 2);
    auto emit = [&](Tok k, std::size_t n) {
      out.push_back({k, std::string(src.substr(i, n)), loc});
      advance(n);
    };
    if (two == "/\\") {
      emit(Tok::And, 2);
    } else if (two == "\\/") {
      emit(Tok::Or, 2);
    } else if (two == "=>") {
      emit(Tok::Imp, 2);
    } else if (two == ":=") {
      emit(Tok::Define, 2);
    } else if (two == "::") {
      emit(Tok::Cons, 2);
    } else if (c == '\\') {
      emit(Tok::Lambda, 1);
    } else if (c == '=') {
      emit(Tok::Eq, 1);
    } else if (c == '(') {
      emit(Tok::LParen, 1);
    } else if (c == ')') {
      emit(Tok::RParen, 1);
    } else if (c == '.') {
      emit(Tok::Dot, 1);
    } else if (c == '#') {
      std::size_t j = i + 1;
      while (j < src.size() && ident_char(src[j])) ++j;
      if (j == i + 1) throw SyntaxError("expected directive name after '#'", loc);
      out.push_back({Tok::Directive, std::string(src.substr(i + 1, j - i - 1)), loc});
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') throw SyntaxError("unterminated string", loc);
      out.push_back({Tok::String, std::string(src.substr(i + 1, j - i - 1)), loc});
      advance(j - i + 1);
    } else if (ident_char(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      emit(Tok::Ident, j - i);
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", loc);
    }
  }
  out.push_back({Tok::End, "", SourceLoc{file, line, col}});
  return out;
}

/// Placeholder constants stand for implicit variables until the enclosing
/// declaration is complete and the final de Bruijn indices are known.
Symbol placeholder(const std::string& name) { return intern("?" + name); }

Term abstract_placeholders(const Term& t, const std::map<Symbol, std::uint32_t>& slots, std::uint32_t n,
                           std::uint32_t depth) {
  switch (t.kind()) {
    case Term::Kind::Const: {
      auto it = slots.find(t.symbol());
      if (it == slots.end()) return t;
      return Term::bound(depth + (n - 1 - it->second));
    }
    case Term::Kind::Lam:
      return Term::lam(abstract_placeholders(t.body(), slots, n, depth + 1), t.lam_hint());
    case Term::Kind::App: {
      Term head = abstract_placeholders(t.head(), slots, n, depth);
      std::vector<Term> args;
      for (const auto& a : t.args()) args.push_back(abstract_placeholders(a, slots, n, depth));
      return Term::app(std::move(head), std::move(args));
    }
    default:
      return t;
  }
}

Formula abstract_placeholders(const Formula& f, const std::map<Symbol, std::uint32_t>& slots, std::uint32_t n,
                              std::uint32_t depth) {
  auto term = [&](const Term& t) { return abstract_placeholders(t, slots, n, depth); };
  auto sub = [&](const Formula& g) { return abstract_placeholders(g, slots, n, depth); };
  switch (f.kind()) {
    case Formula::Kind::Top:
      return f;
    case Formula::Kind::Atom: {
      std::vector<Term> args;
      for (const auto& a : f.args()) args.push_back(term(a));
      return Formula::atom(f.pred(), std::move(args));
    }
    case Formula::Kind::Eq:
      return Formula::eq(term(f.lhs()), term(f.rhs()));
    case Formula::Kind::And:
      return Formula::conj(sub(f.left()), sub(f.right()));
    case Formula::Kind::Or:
      return Formula::disj(sub(f.left()), sub(f.right()));
    case Formula::Kind::Imp:
      return Formula::imp(sub(f.left()), sub(f.right()));
    default:
      return Formula::quantifier(f.kind(), f.binder(), abstract_placeholders(f.body(), slots, n, depth + 1));
  }
}

class Parser {
 public:
  Parser(std::string_view text, std::string file) : file_(std::move(file)), toks_(lex(text, file_)) {}

  SourceFile file() {
    SourceFile out;
    out.name = file_;
    std::set<std::pair<int, Symbol>> seen;  // (directive kind, predicate)
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Directive) {
        Directive d = directive();
        if (d.kind == Directive::Kind::Level || d.kind == Directive::Kind::Table) {
          if (!seen.insert({static_cast<int>(d.kind), d.pred}).second)
            throw SyntaxError("duplicate #" + std::string(d.kind == Directive::Kind::Level ? "level" : "table") +
                                  " directive for " + symbol_name(d.pred),
                              d.loc);
        }
        out.declarations.emplace_back(std::move(d));
      } else {
        out.declarations.emplace_back(clause());
      }
    }
    return out;
  }

  Query query() {
    begin_implicit(/*clause=*/false);
    Formula body = formula();
    if (peek().kind == Tok::Dot) next();
    expect_end();
    return finish_query(std::move(body));
  }

  Term closed_term(const std::map<std::string, Term>& env) {
    env_ = &env;
    Term t = term();
    expect_end();
    return t;
  }

 private:
  // -- token helpers --------------------------------------------------------
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  Token expect(Tok k, const char* what) {
    if (peek().kind != k) error(std::string("expected ") + what);
    return next();
  }
  void expect_end() {
    if (peek().kind != Tok::End) error("unexpected '" + peek().text + "'");
  }
  [[noreturn]] void error(const std::string& msg) const { throw SyntaxError(msg, peek().loc); }

  // -- implicit variables ---------------------------------------------------
  void begin_implicit(bool clause) {
    implicit_.clear();
    implicit_slots_.clear();
    anon_ = 0;
    allow_implicit_ = true;
    (void)clause;
  }

  Term implicit_var(const std::string& name) {
    std::string key = name;
    if (name == "_") key = "_#" + std::to_string(++anon_);
    Symbol sym = placeholder(key);
    if (!implicit_slots_.count(sym)) {
      implicit_slots_.emplace(sym, static_cast<std::uint32_t>(implicit_.size()));
      implicit_.push_back(name);
    }
    return Term::constant(sym);
  }

  Query finish_query(Formula body) {
    Query q;
    q.vars = implicit_;
    q.body = abstract_placeholders(body, implicit_slots_, static_cast<std::uint32_t>(implicit_.size()), 0);
    allow_implicit_ = false;
    return q;
  }

  // -- declarations ---------------------------------------------------------
  Clause clause() {
    begin_implicit(true);
    SourceLoc loc = peek().loc;
    Formula head = atom_from(term(), loc);
    Formula body = Formula::top();
    if (accept(Tok::Define)) body = formula();
    expect(Tok::Dot, "'.' at end of clause");
    const auto n = static_cast<std::uint32_t>(implicit_.size());
    Clause c;
    c.pred = head.pred();
    c.vars = implicit_;
    for (const auto& a : head.args()) c.head_args.push_back(abstract_placeholders(a, implicit_slots_, n, 0));
    c.body = abstract_placeholders(body, implicit_slots_, n, 0);
    c.loc = loc;
    allow_implicit_ = false;
    return c;
  }

  Directive directive() {
    Token tok = next();
    Directive d;
    d.loc = tok.loc;
    const std::string& name = tok.text;
    if (name == "level") {
      d.kind = Directive::Kind::Level;
      d.pred = predicate_name();
      Token lvl = expect(Tok::Ident, "level 0 or 1");
      if (lvl.text != "0" && lvl.text != "1") throw SyntaxError("level must be 0 or 1", lvl.loc);
      d.level = lvl.text == "1" ? 1 : 0;
    } else if (name == "table") {
      d.kind = Directive::Kind::Table;
      Token mode = expect(Tok::Ident, "'inductive' or 'coinductive'");
      if (mode.text == "inductive") {
        d.mode = TableMode::Inductive;
      } else if (mode.text == "coinductive") {
        d.mode = TableMode::Coinductive;
      } else {
        throw SyntaxError("expected 'inductive' or 'coinductive'", mode.loc);
      }
      d.pred = predicate_name();
    } else if (name == "assert" || name == "assert_not") {
      d.kind = name == "assert" ? Directive::Kind::Assert : Directive::Kind::AssertNot;
      begin_implicit(false);
      Formula body = formula();
      d.query = finish_query(std::move(body));
    } else if (name == "include") {
      d.kind = Directive::Kind::Include;
      d.path = expect(Tok::String, "quoted file name").text;
    } else if (name == "clear_tables") {
      d.kind = Directive::Kind::ClearTables;
    } else if (name == "show_table") {
      d.kind = Directive::Kind::ShowTable;
      d.pred = predicate_name();
    } else {
      throw SyntaxError("unknown directive #" + name, tok.loc);
    }
    expect(Tok::Dot, "'.' at end of directive");
    return d;
  }

  Symbol predicate_name() {
    Token t = expect(Tok::Ident, "predicate name");
    if (is_variable_name(t.text) || is_reserved(t.text)) throw SyntaxError("invalid predicate name " + t.text, t.loc);
    return intern(t.text);
  }

  // -- formulas -------------------------------------------------------------
  Formula formula() {
    Formula lhs = disjunction();
    if (accept(Tok::Imp)) return Formula::imp(std::move(lhs), formula());
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept(Tok::Or)) f = Formula::disj(std::move(f), conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (accept(Tok::And)) f = Formula::conj(std::move(f), unary());
    return f;
  }

  Formula unary() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && is_reserved(t.text)) {
      Formula::Kind k = t.text == "forall"   ? Formula::Kind::Forall
                        : t.text == "exists" ? Formula::Kind::Exists
                                             : Formula::Kind::Nabla;
      next();
      std::vector<std::string> binders;
      while (peek().kind == Tok::Ident) {
        if (is_reserved(peek().text)) error("reserved word used as a binder");
        binders.push_back(next().text);
      }
      if (binders.empty()) error("expected a bound variable");
      expect(Tok::Dot, "'.' after quantified variables");
      for (const auto& b : binders) scope_.push_back(b);
      Formula body = formula();
      scope_.resize(scope_.size() - binders.size());
      for (auto it = binders.rbegin(); it != binders.rend(); ++it) body = Formula::quantifier(k, *it, std::move(body));
      return body;
    }
    return primary();
  }

  Formula primary() {
    SourceLoc loc = peek().loc;
    std::size_t save = pos_;
    auto saved_implicit = implicit_;
    auto saved_slots = implicit_slots_;
    auto saved_anon = anon_;
    bool parenthesized = peek().kind == Tok::LParen;
    try {
      Term lhs = term();
      if (accept(Tok::Eq)) return Formula::eq(std::move(lhs), term());
      if (parenthesized && peek().kind != Tok::And && peek().kind != Tok::Or && peek().kind != Tok::Imp &&
          peek().kind != Tok::Dot && peek().kind != Tok::RParen && peek().kind != Tok::End)
        error("unexpected '" + peek().text + "'");
      return atom_from(lhs, loc);
    } catch (const SyntaxError&) {
      if (!parenthesized) throw;
      pos_ = save;
      implicit_ = std::move(saved_implicit);
      implicit_slots_ = std::move(saved_slots);
      anon_ = saved_anon;
    }
    expect(Tok::LParen, "'('");
    Formula f = formula();
    expect(Tok::RParen, "')'");
    return f;
  }

  Formula atom_from(const Term& t, const SourceLoc& loc) {
    const Term& head = t.is(Term::Kind::App) ? t.head() : t;
    if (!head.is(Term::Kind::Const) || symbol_name(head.symbol()).starts_with("?"))
      throw SyntaxError("expected an atomic formula", loc);
    const std::string& name = symbol_name(head.symbol());
    if (name == "true" && !t.is(Term::Kind::App)) return Formula::top();
    if (name == "::") throw SyntaxError("expected an atomic formula", loc);
    std::vector<Term> args;
    if (t.is(Term::Kind::App)) args.assign(t.args().begin(), t.args().end());
    return Formula::atom(head.symbol(), std::move(args));
  }

  // -- terms ----------------------------------------------------------------
  bool at_lambda() const { return peek().kind == Tok::Ident && peek(1).kind == Tok::Lambda; }

  Term term() {
    if (at_lambda()) return lambda();
    Term t = application();
    if (accept(Tok::Cons)) return Term::app(Term::constant("::"), {std::move(t), term()});
    return t;
  }

  Term lambda() {
    Token name = next();
    next();  // backslash
    if (is_reserved(name.text)) throw SyntaxError("reserved word used as a binder", name.loc);
    scope_.push_back(name.text);
    Term body = term();
    scope_.pop_back();
    return Term::lam(std::move(body), intern(name.text));
  }

  bool starts_argument() const {
    return (peek().kind == Tok::Ident && !is_reserved(peek().text)) || peek().kind == Tok::LParen;
  }

  Term application() {
    Term head = argument();
    std::vector<Term> args;
    while (starts_argument()) {
      if (at_lambda()) {
        args.push_back(lambda());
        break;
      }
      args.push_back(argument());
    }
    return Term::app(std::move(head), std::move(args));
  }

  Term argument() {
    if (accept(Tok::LParen)) {
      Term t = term();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (peek().kind != Tok::Ident || is_reserved(peek().text)) error("expected a term");
    Token tok = next();
    return identifier(tok);
  }

  Term identifier(const Token& tok) {
    for (std::size_t k = scope_.size(); k-- > 0;)
      if (scope_[k] == tok.text) return Term::bound(static_cast<std::uint32_t>(scope_.size() - 1 - k));
    if (env_) {
      auto it = env_->find(tok.text);
      if (it != env_->end()) return shift_free(it->second);
    }
    if (is_variable_name(tok.text)) {
      if (!allow_implicit_) throw SyntaxError("unbound variable " + tok.text, tok.loc);
      return implicit_var(tok.text);
    }
    return Term::constant(tok.text);
  }

  // Environment terms are closed, so no shifting is needed under binders.
  static Term shift_free(const Term& t) { return t; }

  std::string file_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
  std::vector<std::string> implicit_;
  std::map<Symbol, std::uint32_t> implicit_slots_;
  int anon_ = 0;
  bool allow_implicit_ = false;
  const std::map<std::string, Term>* env_ = nullptr;
};

}  // namespace

Term parse_term(std::string_view text, const std::map<std::string, Term>& env) {
  Parser p(text, "<term>");
  return p.closed_term(env);
}

Query parse_query(std::string_view text, const std::string& origin) {
  Parser p(text, origin);
  return p.query();
}

Formula parse_formula(std::string_view text) { return close_query(parse_query(text, "<formula>")); }

SourceFile parse_file(std::string_view text, const std::string& name) {
  Parser p(text, name);
  return p.file();
}

Formula close_query(const Query& q) {
  Formula f = q.body;
  for (auto it = q.vars.rbegin(); it != q.vars.rend(); ++it) f = Formula::exists(*it, std::move(f));
  return f;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void collect_names(const Term& x, std::set<std::string>& out) {
  Term t = deref(x);
  switch (t.kind()) {
    case Term::Kind::Const:
      out.insert(symbol_name(t.symbol()));
      return;
    case Term::Kind::Lam:
      collect_names(t.body(), out);
      return;
    case Term::Kind::App:
      collect_names(t.head(), out);
      for (const auto& a : t.args()) collect_names(a, out);
      return;
    default:
      return;
  }
}

void collect_names(const Formula& f, std::set<std::string>& out) {
  for_each_term(f, [&](const Term& t, std::uint32_t) { collect_names(t, out); });
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* g = stack.back();
    stack.pop_back();
    switch (g->kind()) {
      case Formula::Kind::Atom:
        out.insert(symbol_name(g->pred()));
        break;
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp:
        stack.push_back(&g->left());
        stack.push_back(&g->right());
        break;
      case Formula::Kind::Exists:
      case Formula::Kind::Forall:
      case Formula::Kind::Nabla:
        stack.push_back(&g->body());
        break;
      default:
        break;
    }
  }
}

class Printer {
 public:
  Printer(std::vector<std::string> context, std::set<std::string> taken)
      : ctx_(std::move(context)), taken_(std::move(taken)) {}

  std::string term(const Term& x, int prec) {
    Term t = deref(x);
    switch (t.kind()) {
      case Term::Kind::Const:
        return symbol_name(t.symbol());
      case Term::Kind::Bound: {
        if (t.index() < ctx_.size()) return ctx_[ctx_.size() - 1 - t.index()];
        return "^" + std::to_string(t.index() - ctx_.size());
      }
      case Term::Kind::Nabla:
        return "#" + std::to_string(t.index());
      case Term::Kind::Var: {
        const VarCell& v = t.cell();
        std::string base = v.name.empty() ? (v.kind == VarKind::Logic ? "L" : "e") : v.name;
        return (v.kind == VarKind::Logic ? "_" : "@") + base + std::to_string(v.id);
      }
      case Term::Kind::Lam: {
        std::string name = fresh(t.lam_hint() ? symbol_name(t.lam_hint()) : "x");
        ctx_.push_back(name);
        std::string s = name + "\\ " + term(t.body(), 0);
        ctx_.pop_back();
        return prec > 0 ? "(" + s + ")" : s;
      }
      case Term::Kind::App: {
        Term head = deref(t.head());
        auto args = t.args();
        if (head.is(Term::Kind::Const) && symbol_name(head.symbol()) == "::" && args.size() == 2) {
          std::string s = term(args[0], 1) + " :: " + term(args[1], 0);
          return prec > 0 ? "(" + s + ")" : s;
        }
        std::string s = term(head, 2);
        for (const auto& a : args) s += " " + term(a, 2);
        return prec >= 2 ? "(" + s + ")" : s;
      }
    }
    return "?";
  }

  // prec: 0 implication, 1 disjunction, 2 conjunction, 3 primary.
  std::string formula(const Formula& f, int prec, bool tail) {
    switch (f.kind()) {
      case Formula::Kind::Top:
        return "true";
      case Formula::Kind::Atom: {
        std::string s = symbol_name(f.pred());
        for (const auto& a : f.args()) s += " " + term(a, 2);
        return s;
      }
      case Formula::Kind::Eq:
        return term(f.lhs(), 1) + " = " + term(f.rhs(), 1);
      case Formula::Kind::And:
        return binary(f, " /\\ ", 2, prec, tail, 2, 3);
      case Formula::Kind::Or:
        return binary(f, " \\/ ", 1, prec, tail, 1, 2);
      case Formula::Kind::Imp:
        return binary(f, " => ", 0, prec, tail, 1, 0);
      default: {
        const char* kw = f.is(Formula::Kind::Forall) ? "forall" : f.is(Formula::Kind::Exists) ? "exists" : "nabla";
        std::vector<std::string> names;
        const Formula* g = &f;
        while (g->kind() == f.kind()) {
          names.push_back(fresh(g->binder().empty() ? "x" : g->binder()));
          ctx_.push_back(names.back());
          g = &g->body();
        }
        std::string s = kw;
        for (const auto& n : names) s += " " + n;
        s += ". " + formula(*g, 0, true);
        ctx_.resize(ctx_.size() - names.size());
        return tail ? s : "(" + s + ")";
      }
    }
    return "?";
  }

 private:
  std::string binary(const Formula& f, const char* op, int own, int prec, bool tail, int lprec, int rprec) {
    bool parens = prec > own;
    bool inner_tail = parens ? true : tail;
    std::string s = formula(f.left(), lprec, false) + op + formula(f.right(), rprec, inner_tail);
    return parens ? "(" + s + ")" : s;
  }

  std::string fresh(const std::string& hint) {
    auto clashes = [&](const std::string& n) {
      if (taken_.count(n) || is_reserved(n) || n == "true") return true;
      for (const auto& c : ctx_)
        if (c == n) return true;
      return false;
    };
    if (!clashes(hint)) return hint;
    for (int i = 1;; ++i) {
      std::string n = hint + std::to_string(i);
      if (!clashes(n)) return n;
    }
  }

  std::vector<std::string> ctx_;
  std::set<std::string> taken_;
};

}  // namespace

std::string print_term(const Term& t, const std::vector<std::string>& context) {
  std::set<std::string> taken;
  collect_names(t, taken);
  Printer p(context, std::move(taken));
  return p.term(t, 0);
}

std::string print_formula(const Formula& f, const std::vector<std::string>& context) {
  std::set<std::string> taken;
  collect_names(f, taken);
  Printer p(context, std::move(taken));
  return p.formula(f, 0, true);
}

std::string print_query(const Query& q) { return print_formula(q.body, q.vars); }

std::string print_clause(const Clause& c) {
  std::set<std::string> taken;
  for (const auto& a : c.head_args) collect_names(a, taken);
  collect_names(c.body, taken);
  Printer p(c.vars, std::move(taken));
  std::string s = symbol_name(c.pred);
  for (const auto& a : c.head_args) s += " " + p.term(a, 2);
  if (!c.body.is(Formula::Kind::Top)) s += " := " + p.formula(c.body, 0, true);
  return s + ".";
}

std::string print_directive(const Directive& d) {
  switch (d.kind) {
    case Directive::Kind::Level:
      return "#level " + symbol_name(d.pred) + " " + std::to_string(d.level) + ".";
    case Directive::Kind::Table:
      return std::string("#table ") + (d.mode == TableMode::Coinductive ? "coinductive " : "inductive ") +
             symbol_name(d.pred) + ".";
    case Directive::Kind::Assert:
      return "#assert " + print_query(d.query) + ".";
    case Directive::Kind::AssertNot:
      return "#assert_not " + print_query(d.query) + ".";
    case Directive::Kind::Include:
      return "#include \"" + d.path + "\".";
    case Directive::Kind::ClearTables:
      return "#clear_tables.";
    case Directive::Kind::ShowTable:
      return "#show_table " + symbol_name(d.pred) + ".";
  }
  return "";
}

std::string print_source(const SourceFile& file) {
  std::string out;
  for (const auto& decl : file.declarations) {
    if (const auto* c = std::get_if<Clause>(&decl)) {
      out += print_clause(*c);
    } else {
      out += print_directive(std::get<Directive>(decl));
    }
    out += "\n";
  }
  return out;
}

}  // namespace nabla
