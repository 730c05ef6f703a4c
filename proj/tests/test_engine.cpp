#include <doctest.h>

#include <random>

#include "nabla/engine.hpp"
#include "nabla/parser.hpp"
#include "nabla_suite.hpp"
#include "util.hpp"

using namespace nabla;

namespace {

const char* kProgram = R"(
memb X (X :: L).
memb X (Y :: L) := memb X L.
step a b.
step a c.
move p0 p1.
move p1 p2.
win P := forall P'. move P P' => exists P''. move P' P'' /\ win P''.
nat z.
nat (s N) := nat N.
loop := loop.
pv L B := memb B L.
pv L (all B) := nabla x. pv L (B x).
pv L (imp A B) := pv (A :: L) B.
)";

struct Env {
  Program program;
  ProverState st;
  explicit Env(const char* text = kProgram) : st(program) { testutil::load(program, text); }
  SolveResult run(const std::string& goal, std::size_t n = 1) { return solve(st, parse_formula(goal), n); }
  std::vector<std::string> answers(const std::string& goal) {
    std::vector<std::string> out;
    for (const auto& a : run(goal, 0).answers) {
      std::string s;
      for (const auto& [k, v] : a) s += (s.empty() ? "" : ", ") + k + " = " + v;
      out.push_back(s);
    }
    return out;
  }
};

}  // namespace

TEST_CASE("prove0: answer order follows clause order") {
  Env e;
  CHECK(e.answers("exists X. memb X (a :: b :: nil)") == std::vector<std::string>{"X = a", "X = b"});
  auto top = e.run("true");
  CHECK(top.outcome == Outcome::Proved);
  REQUIRE(top.answers.size() == 1);
  CHECK(top.answers[0].empty());
  CHECK(e.run("false").outcome == Outcome::Disproved);
  CHECK(e.run("nabla x. x = c").outcome == Outcome::Disproved);
}

TEST_CASE("AnswerStream is pull-based and restores the trail") {
  Env e;
  auto mark = e.st.trail.mark();
  {
    AnswerStream s = prove0(e.st, parse_formula("exists X. memb X (a :: b :: nil)"));
    auto first = s.next();
    REQUIRE(first);
    CHECK(print_term((*first)[0].second) == "a");
    auto second = s.next();
    REQUIRE(second);
    CHECK(print_term((*second)[0].second) == "b");
    // earlier snapshots are not mutated by resumption
    CHECK(print_term((*first)[0].second) == "a");
    CHECK_FALSE(s.next());
  }
  CHECK(e.st.trail.mark() == mark);
  CHECK_THROWS_AS(prove0(e.st, parse_formula("forall x. memb x nil")), IllFormedFormula);
}

TEST_CASE("prove1: identity abstraction, object-logic theorem, simple level-1 goals") {
  Env e;
  CHECK(e.run("forall y. (x\\ x) = (x\\ y) => false").outcome == Outcome::Proved);
  CHECK(e.run("forall r s t. pv nil (all x\\ imp (p x r) (all y\\ imp (p y s) (p x t))) => r = t").outcome ==
        Outcome::Proved);
  CHECK(e.run("true => true").outcome == Outcome::Proved);
  auto r = e.run("exists X. step a X /\\ X = b");
  CHECK(r.outcome == Outcome::Proved);
  REQUIRE(r.answers.size() == 1);
  CHECK(r.answers[0][0].second == "b");
  CHECK(e.answers("exists X. forall y. step a X") == std::vector<std::string>{"X = b", "X = c"});
}

TEST_CASE("win on a tiny game") {
  Env e;
  // p2 has no moves; from p1 the opponent's only move leads to p2, where we
  // have no reply: backward induction gives win p2, not win p1, win p0.
  CHECK(e.run("win p2").outcome == Outcome::Proved);
  CHECK(e.run("win p1").outcome == Outcome::Disproved);
  CHECK(e.run("win p0").outcome == Outcome::Proved);
}

TEST_CASE("eigenvariables are never instantiated on the right") {
  Env e;
  CHECK(e.run("forall x. x = a").outcome == Outcome::Disproved);
  CHECK(e.run("exists Y. forall x. Y = x").outcome == Outcome::Disproved);
  CHECK(e.run("forall x. exists Y. Y = x").outcome == Outcome::Proved);
  CHECK(e.answers("exists F. forall x. F x = x") == std::vector<std::string>{"F = x\\ x"});
  // F may depend on x, so x is not a pattern argument of F
  CHECK(e.run("forall x. exists F. F x = x").outcome == Outcome::Inconclusive);
}

TEST_CASE("nabla") {
  Env e;
  CHECK(e.run("nabla x. nabla y. x = y").outcome == Outcome::Disproved);
  CHECK(e.run("nabla x. x = x").outcome == Outcome::Proved);
  CHECK(e.run("exists Y. nabla x. Y = x").outcome == Outcome::Disproved);
  CHECK(e.run("nabla x. exists Y. Y = x").outcome == Outcome::Proved);
  CHECK(e.answers("exists F. nabla x. F x = f x a") == std::vector<std::string>{"F = x\\ f x a"});
  CHECK(e.run("forall y. nabla x. x = y").outcome == Outcome::Disproved);
  // y is raised over x, so the antecedent can identify them
  CHECK(e.run("nabla x. forall y. x = y => false").outcome == Outcome::Disproved);
  CHECK(e.run("forall y. nabla x. x = y => false").outcome == Outcome::Proved);
  CHECK(e.run("nabla x. memb x (a :: nil)").outcome == Outcome::Disproved);
  CHECK(e.run("nabla x. memb x (a :: x :: nil)").outcome == Outcome::Proved);
}

TEST_CASE("implication: enumerate and check") {
  Env e;
  CHECK(e.run("forall x. step a x => memb x (b :: c :: nil)").outcome == Outcome::Proved);
  CHECK(e.run("forall x. step a x => memb x (b :: nil)").outcome == Outcome::Disproved);
  CHECK(e.run("forall x. memb x nil => false").outcome == Outcome::Proved);
  // left unification may instantiate eigenvariables
  CHECK(e.run("forall x. x = a => memb x (a :: nil)").outcome == Outcome::Proved);
  CHECK(e.run("forall x y. x = y => y = x").outcome == Outcome::Proved);
}

TEST_CASE("vacuous antecedent law") {
  Env e;
  for (const char* b : {"false", "loop", "nabla x. x = a", "exists X. X = a", "step c c"})
    CHECK(e.run(std::string("memb a nil => ") + b).outcome == Outcome::Proved);
}

TEST_CASE("engine errors are inconclusive, never a verdict") {
  Env e;
  auto ng = e.run("exists X. step a X => true");
  CHECK(ng.outcome == Outcome::Inconclusive);
  CHECK(ng.error.find("antecedent") != std::string::npos);
  auto np = e.run("exists F. nabla x. F x x = a");
  CHECK(np.outcome == Outcome::Inconclusive);
  CHECK(np.error.find("non-pattern") != std::string::npos);
  auto outer = e.run("exists X. (step a b => X = a)");
  CHECK(outer.outcome == Outcome::Inconclusive);
  CHECK(e.run("exists X. (step a a => X = a)").outcome == Outcome::Proved);
  auto div = e.run("(x\\ x x) (x\\ x x) = a");
  CHECK(div.outcome == Outcome::Inconclusive);
  CHECK(div.error.find("normalization") != std::string::npos);
  e.st.limits.max_steps = 1000;
  auto loop = e.run("loop");
  CHECK(loop.outcome == Outcome::Inconclusive);
  CHECK(loop.error.find("budget") != std::string::npos);
}

TEST_CASE("first answers survive a later error") {
  Env e;
  e.st.limits.max_steps = 2000;
  auto r = e.run("exists N. nat N", 0);
  CHECK(r.outcome == Outcome::Proved);
  CHECK(r.answers.size() > 10);
  CHECK_FALSE(r.error.empty());
}

TEST_CASE("determinism") {
  Env a;
  Env b;
  for (const char* g : {"exists X Y. memb X (a :: b :: nil) /\\ memb Y (X :: c :: nil)", "exists N. nat N"}) {
    a.st.limits.max_steps = 5000;
    b.st.limits.max_steps = 5000;
    CHECK(a.answers(g) == b.answers(g));
  }
}

TEST_CASE("nabla equivalences on random instances") {
  Program p;
  testutil::load(p, nablasuite::kProgram);
  nablasuite::Generator gen(17);
  std::vector<nablasuite::Instance> all = nablasuite::corner_cases();
  for (int law = 1; law <= 6; ++law)
    for (int i = 0; i < 40; ++i) all.push_back(gen.make(law));
  for (const auto& inst : all) {
    auto v = nablasuite::check(p, inst);
    INFO(inst.lhs << "  <=>  " << inst.rhs);
    CHECK(v.error.empty());
    CHECK(v.lhs == v.rhs);
  }
}
