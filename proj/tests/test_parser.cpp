#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nabla/parser.hpp"

using namespace nabla;

namespace {

Term c(const char* n) { return Term::constant(n); }

// Random closed terms; `scope` counts enclosing binders (formula and λ).
Term random_term(std::mt19937& rng, int depth, std::uint32_t scope) {
  static const char* consts[] = {"a", "b", "nil", "f", "g"};
  int choice = static_cast<int>(rng() % (depth <= 0 ? 2 : 5));
  switch (choice) {
    case 0:
      return c(consts[rng() % 3]);
    case 1:
      if (scope > 0) return Term::bound(static_cast<std::uint32_t>(rng() % scope));
      return c("a");
    case 2:
      return Term::lam(random_term(rng, depth - 1, scope + 1), intern(rng() % 2 ? "x" : "y"));
    case 3:
      return Term::app(Term::constant("::"), {random_term(rng, depth - 1, scope), random_term(rng, depth - 1, scope)});
    default: {
      std::vector<Term> args;
      int n = 1 + static_cast<int>(rng() % 2);
      for (int i = 0; i < n; ++i) args.push_back(random_term(rng, depth - 1, scope));
      // heads may be bound variables too
      Term head = (scope > 0 && rng() % 3 == 0) ? Term::bound(static_cast<std::uint32_t>(rng() % scope))
                                                  : c(consts[3 + rng() % 2]);
      return Term::app(head, std::move(args));
    }
  }
}

Formula random_formula(std::mt19937& rng, int depth, std::uint32_t scope) {
  static const char* names[] = {"x", "y", "X", "Z"};
  int choice = static_cast<int>(rng() % (depth <= 0 ? 3 : 10));
  switch (choice) {
    case 0:
      return Formula::top();
    case 1: {
      std::vector<Term> args;
      int n = static_cast<int>(rng() % 3);
      for (int i = 0; i < n; ++i) args.push_back(random_term(rng, std::max(depth - 1, 0), scope));
      return Formula::atom(intern(rng() % 2 ? "p" : "q"), std::move(args));
    }
    case 2:
      return Formula::eq(random_term(rng, std::max(depth - 1, 0), scope),
                         random_term(rng, std::max(depth - 1, 0), scope));
    case 3:
      return Formula::conj(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
    case 4:
      return Formula::disj(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
    case 5:
      return Formula::imp(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
    case 6:
      return Formula::exists(names[rng() % 4], random_formula(rng, depth - 1, scope + 1));
    case 7:
      return Formula::forall(names[rng() % 4], random_formula(rng, depth - 1, scope + 1));
    case 8:
      return Formula::nabla(names[rng() % 4], random_formula(rng, depth - 1, scope + 1));
    default:
      return Formula::conj(random_formula(rng, depth - 1, scope),
                           Formula::disj(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope)));
  }
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("parse examples") {
  Term id = parse_term("x\\ x");
  CHECK(structurally_equal(id, Term::lam(Term::bound(0))));
  Formula win = parse_formula("forall P. win P");
  CHECK(win.is(Formula::Kind::Forall));

  SourceFile f = parse_file(
      "win P := forall P'. step P P' => exists P''. step P' P'' /\\ win P''.\n"
      "pv L (A imparrow B) := pv (A :: L) B.\n");
  REQUIRE(f.declarations.size() == 2);
  const auto& w = std::get<Clause>(f.declarations[0]);
  CHECK(symbol_name(w.pred) == "win");
  CHECK(w.vars == std::vector<std::string>{"P"});
  CHECK(w.body.is(Formula::Kind::Forall));
  CHECK(w.body.body().is(Formula::Kind::Imp));
  CHECK(w.body.body().right().is(Formula::Kind::Exists));
  const auto& pv = std::get<Clause>(f.declarations[1]);
  CHECK(pv.vars == std::vector<std::string>{"L", "A", "B"});
  CHECK(print_term(pv.head_args[1], {"L", "A", "B"}) == "A imparrow B");
  CHECK(pv.head_args[1].head().is(Term::Kind::Bound));
}

TEST_CASE("precedence and associativity") {
  Formula f = parse_formula("a = b /\\ p \\/ q => r => s");
  REQUIRE(f.is(Formula::Kind::Imp));
  CHECK(f.left().is(Formula::Kind::Or));
  CHECK(f.left().left().is(Formula::Kind::And));
  CHECK(f.left().left().left().is(Formula::Kind::Eq));
  CHECK(f.right().is(Formula::Kind::Imp));
  Formula q = parse_formula("forall x. p x /\\ q x");
  REQUIRE(q.is(Formula::Kind::Forall));
  CHECK(q.body().is(Formula::Kind::And));
  Term l = parse_term("a :: b :: nil");
  CHECK(print_term(l) == "a :: b :: nil");
  CHECK(structurally_equal(l.args()[1], parse_term("b :: nil")));
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_file("p X :=\n  q (X.\n");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.loc().line == 2);
  }
  CHECK_THROWS_AS(parse_file("#level p 1.\n#level p 0.\n"), SyntaxError);
  CHECK_THROWS_AS(parse_file("#table inductive p.\n#table coinductive p.\n"), SyntaxError);
  CHECK_THROWS_AS(parse_term("f X"), SyntaxError);
  CHECK_THROWS_AS(parse_formula("forall . p"), SyntaxError);
}

TEST_CASE("comments and directives") {
  SourceFile f = parse_file(
      "% a comment\n#level p 1. % trailing\n#table coinductive sim.\n#assert_not exists X. p X.\n"
      "#include \"other.def\".\n#clear_tables.\n#show_table sim.\n");
  REQUIRE(f.declarations.size() == 6);
  CHECK(std::get<Directive>(f.declarations[0]).kind == Directive::Kind::Level);
  CHECK(std::get<Directive>(f.declarations[1]).mode == TableMode::Coinductive);
  const auto& a = std::get<Directive>(f.declarations[2]);
  CHECK(a.kind == Directive::Kind::AssertNot);
  CHECK(a.loc.line == 4);
  CHECK(std::get<Directive>(f.declarations[3]).path == "other.def");
  CHECK(print_source(f) ==
        "#level p 1.\n#table coinductive sim.\n#assert_not exists X. p X.\n#include \"other.def\".\n"
        "#clear_tables.\n#show_table sim.\n");
}

TEST_CASE("query variables and printing of loose variables") {
  Query q = parse_query("memb X (a :: Y)");
  CHECK(q.vars == std::vector<std::string>{"X", "Y"});
  CHECK(print_query(q) == "memb X (a :: Y)");
  Formula closed = close_query(q);
  CHECK(print_formula(closed) == "exists X Y. memb X (a :: Y)");
  CHECK(print_term(Term::app(c("f"), {Term::bound(0), Term::nabla(1)})) == "f ^0 #1");
}

TEST_CASE("printer picks fresh names for shadowed binders") {
  Formula f = Formula::forall("x", Formula::forall("x", Formula::atom(intern("p"), {Term::bound(1), Term::bound(0)})));
  std::string s = print_formula(f);
  Formula g = parse_formula(s);
  CHECK(structurally_equal(f, g));
  Term t = Term::lam(Term::lam(Term::app(Term::bound(1), {Term::bound(0)}), intern("x")), intern("x"));
  CHECK(structurally_equal(parse_term(print_term(t)), t));
}

TEST_CASE("parse . print is the identity on random formulas of depth <= 6") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 3000; ++i) {
    Formula f = random_formula(rng, 1 + static_cast<int>(rng() % 6), 0);
    std::string text = print_formula(f);
    Formula g;
    try {
      g = parse_formula(text);
    } catch (const SyntaxError& e) {
      FAIL_CHECK(text << " : " << e.what());
      continue;
    }
    if (!structurally_equal(f, g)) FAIL_CHECK(text << "  reparsed as  " << print_formula(g));
  }
}

TEST_CASE("parse . print is the identity on random terms") {
  std::mt19937 rng(99);
  for (int i = 0; i < 3000; ++i) {
    Term t = random_term(rng, 1 + static_cast<int>(rng() % 6), 0);
    std::string text = print_term(t);
    Term u = parse_term(text);
    if (!structurally_equal(t, u)) FAIL_CHECK(text << "  reparsed as  " << print_term(u));
  }
}

TEST_CASE("print . parse is stable on the corpus") {
  namespace fs = std::filesystem;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(NABLA_SOURCE_DIR) / "corpus")) {
    if (entry.path().extension() != ".def") continue;
    ++files;
    SourceFile f = parse_file(read(entry.path()), entry.path().filename().string());
    std::string once = print_source(f);
    SourceFile g = parse_file(once, "reprinted");
    CHECK(print_source(g) == once);
    REQUIRE(f.declarations.size() == g.declarations.size());
    for (std::size_t i = 0; i < f.declarations.size(); ++i) {
      if (const auto* c1 = std::get_if<Clause>(&f.declarations[i])) {
        const auto& c2 = std::get<Clause>(g.declarations[i]);
        CHECK(c1->vars == c2.vars);
        CHECK(structurally_equal(c1->body, c2.body));
        for (std::size_t k = 0; k < c1->head_args.size(); ++k)
          CHECK(structurally_equal(c1->head_args[k], c2.head_args[k]));
      }
    }
  }
  CHECK(files >= 6);
}
