#include <doctest.h>

#include "nabla/unify.hpp"
#include "oracle.hpp"
#include "unify_oracle.hpp"

using namespace nabla;

namespace {

Term c(const char* n) { return Term::constant(n); }
Term app(Term h, std::vector<Term> a) { return Term::app(std::move(h), std::move(a)); }

struct Fixture {
  Signature sig;
  Trail trail;
  Term var(VarKind k, std::uint32_t g, std::uint32_t l, const char* name) {
    sig.next_global = std::max(sig.next_global, g + 1);
    return fresh_var_at(sig, k, g, l, name);
  }
  UnifyResult u(const Term& a, const Term& b) {
    UnifyResult r = unify(a, b, trail, sig);
    if (r == UnifyResult::Success) CHECK(equal_modulo(a, b));
    return r;
  }
};

}  // namespace

TEST_CASE("unify: level conditions") {
  Fixture f;
  f.sig.nabla_depth = 1;
  Term x = f.var(VarKind::Eigen, 0, 0, "x");
  Term y = f.var(VarKind::Logic, 1, 0, "Y");
  Term z = f.var(VarKind::Eigen, 2, 1, "z");
  CHECK(f.u(y, z) == UnifyResult::Failure);
  CHECK(f.trail.size() == 0);
  CHECK(f.u(y, x) == UnifyResult::Success);
  CHECK(structurally_equal(deref(y), x));
  f.trail.undo_to(0);
  Term g = f.var(VarKind::Logic, 3, 0, "F");
  CHECK(f.u(g, Term::nabla(0)) == UnifyResult::Failure);
}

TEST_CASE("unify: identity abstraction differs from a constant abstraction") {
  Fixture f;
  Term y = f.var(VarKind::Eigen, 0, 0, "y");
  CHECK(f.u(Term::lam(Term::bound(0)), Term::lam(c("c"))) == UnifyResult::Failure);
  CHECK(f.u(Term::lam(Term::bound(0)), Term::lam(y)) == UnifyResult::Failure);
}

TEST_CASE("unify: pattern solved by abstraction") {
  Fixture f;
  f.sig.nabla_depth = 1;
  Term F = f.var(VarKind::Logic, 0, 0, "F");
  Term x = f.var(VarKind::Eigen, 1, 0, "x");
  Term lhs = app(F, {x, Term::nabla(0)});
  Term rhs = app(c("g"), {x, x, Term::nabla(0)});
  REQUIRE(f.u(lhs, rhs) == UnifyResult::Success);
  // oracle: σ(lhs) ≡βη σ(rhs) and F's value is closed
  oracle::OT sl = oracle::from_term(lhs);
  oracle::OT sr = oracle::from_term(rhs);
  CHECK(oracle::equiv(sl, sr));
  std::set<std::string> vs;
  oracle::vars_of(oracle::from_term(F), vs);
  CHECK(vs.empty());
  CHECK(oracle::show(oracle::normal(oracle::from_term(F))) == "(\\(g $0 $0))");
}

TEST_CASE("unify: pruning and lowering") {
  Fixture f;
  f.sig.nabla_depth = 2;
  Term X = f.var(VarKind::Logic, 0, 2, "X");
  Term Y = f.var(VarKind::Logic, 1, 1, "Y");
  // Y cannot see #1; X applied to #1 is pruned down to what Y can see
  REQUIRE(f.u(app(c("f"), {Y}), app(c("f"), {X})) == UnifyResult::Success);
  CHECK(deref(X).is(Term::Kind::Var));
  CHECK(deref(X).cell().local <= 1);
  f.trail.undo_to(0);
  Term G = f.var(VarKind::Logic, 2, 0, "G");
  // G #0 #1 = G #1 #0 prunes both arguments
  REQUIRE(f.u(app(G, {Term::nabla(0), Term::nabla(1)}), app(G, {Term::nabla(1), Term::nabla(0)})) ==
          UnifyResult::Success);
  CHECK(oracle::show(oracle::normal(oracle::from_term(G))).find("$") == std::string::npos);
}

TEST_CASE("unify: occurs check and non-pattern detection") {
  Fixture f;
  f.sig.nabla_depth = 1;
  Term X = f.var(VarKind::Logic, 0, 0, "X");
  CHECK(f.u(X, app(c("f"), {X})) == UnifyResult::Failure);
  Term F = f.var(VarKind::Logic, 1, 1, "F");
  Trail& t = f.trail;
  Unifier u(t, f.sig);
  CHECK(u.unify(app(F, {c("c")}), c("a")) == UnifyResult::NonPattern);
  REQUIRE(u.nonpattern().has_value());
  CHECK(t.size() == 0);
  Term G = f.var(VarKind::Logic, 2, 0, "G");
  Unifier u2(t, f.sig);
  CHECK(u2.unify(app(c("h"), {c("b"), app(G, {Term::nabla(0), Term::nabla(0)})}), app(c("h"), {c("b"), c("a")})) ==
        UnifyResult::NonPattern);
  CHECK(t.size() == 0);
}

TEST_CASE("is_pattern") {
  Fixture f;
  f.sig.nabla_depth = 1;
  Term F = f.var(VarKind::Logic, 0, 0, "F");
  Term x = f.var(VarKind::Eigen, 1, 0, "x");
  CHECK(is_pattern(app(F, {x, Term::nabla(0)})));
  CHECK_FALSE(is_pattern(app(F, {x, x})));
  CHECK_FALSE(is_pattern(app(F, {c("c")})));
  CHECK(is_pattern(Term::lam(app(F, {Term::bound(0)}))));
  CHECK(is_pattern(app(c("g"), {F})));
}

TEST_CASE("trail: checkpoints unwind LIFO") {
  Signature sig;
  Trail t;
  t.undo_to(t.mark());
  CHECK(t.size() == 0);
  Term a = fresh_logic_var(sig);
  Term b = fresh_logic_var(sig);
  auto m0 = t.mark();
  t.bind(a.cell(), c("a"));
  auto m1 = t.mark();
  t.bind(b.cell(), c("b"));
  t.undo_to(m1);
  CHECK(a.cell().bound());
  CHECK_FALSE(b.cell().bound());
  t.undo_to(m0);
  CHECK_FALSE(a.cell().bound());
}

TEST_CASE("eigen mode instantiates eigenvariables and leaves logic variables rigid") {
  Signature sig;
  Trail t;
  Term e = fresh_eigen_var(sig, "e");
  CHECK(unify(e, c("a"), t, sig, Flex::Eigen) == UnifyResult::Success);
  CHECK(structurally_equal(deref(e), c("a")));
  t.undo_to(0);
  CHECK(unify(e, c("a"), t, sig, Flex::Logic) == UnifyResult::Failure);
}

TEST_CASE("enumeration against ground instantiation (height 2)") {
  auto st = oracle::unify_enumeration(2);
  for (const auto& d : st.discrepancies) MESSAGE(d);
  CHECK(st.discrepancies.empty());
  CHECK(st.success > 0);
  CHECK(st.failure > 0);
  CHECK(st.nonpattern > 0);
}
