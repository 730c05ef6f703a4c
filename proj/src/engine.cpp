#include "nabla/engine.hpp"

#include <pthread.h>

#include <algorithm>
#include <exception>

#include "nabla/parser.hpp"

namespace nabla {

void ProverState::tick() {
  if (++steps - query_base > limits.max_steps)
    throw BudgetExceeded("engine step budget of " + std::to_string(limits.max_steps) + " exceeded");
}

namespace {

struct NestingGuard {
  explicit NestingGuard(ProverState& st) : st(st) {
    if (++st.nesting > st.limits.max_nesting) {
      --st.nesting;
      throw BudgetExceeded("nesting limit of " + std::to_string(st.limits.max_nesting) + " sub-proofs exceeded");
    }
  }
  ~NestingGuard() { --st.nesting; }
  ProverState& st;
};

bool has_unbound_logic(const Formula& f) {
  bool found = false;
  for_each_term(f, [&](const Term& t, std::uint32_t) { found = found || has_unbound_var(t, VarKind::Logic); });
  return found;
}

}  // namespace

Machine::Machine(ProverState& st, Goal goal)
    : st_(st), base_mark_(st.trail.mark()), base_global_(st.sig.next_global) {
  push(std::move(goal));
}

Machine::~Machine() {
  st_.trail.undo_to(base_mark_);
  st_.sig.next_global = base_global_;
}

bool Machine::next() {
  if (exhausted_) return false;
  if (started_ && !backtrack()) {
    exhausted_ = true;
    return false;
  }
  started_ = true;
  if (!run()) {
    exhausted_ = true;
    return false;
  }
  return true;
}

bool Machine::run() {
  while (goals_) {
    Goal g = goals_->goal;
    goals_ = goals_->rest;
    if (!step(g) && !backtrack()) return false;
  }
  return true;
}

bool Machine::backtrack() {
  while (!choices_.empty()) {
    Choice& c = choices_.back();
    st_.trail.undo_to(c.mark);
    st_.sig.next_global = c.next_global;
    if (!c.def) {
      goals_ = std::move(c.cont);
      choices_.pop_back();
      return true;
    }
    if (resume_clauses(c)) {
      if (c.next_clause >= c.def->clauses.size()) choices_.pop_back();
      return true;
    }
    choices_.pop_back();
  }
  return false;
}

// Tries the remaining clauses of `c`; on success installs the body and
// leaves `next_clause` at the next clause that may match.
bool Machine::resume_clauses(Choice& c) {
  const auto& clauses = c.def->clauses;
  while (c.next_clause < clauses.size()) {
    const Clause& cl = clauses[c.next_clause++];
    if (!may_match(cl, c.args)) continue;
    // Skip ahead now: the filter must see the bindings of the choicepoint,
    // not those made by this clause's head.
    while (c.next_clause < clauses.size() && !may_match(clauses[c.next_clause], c.args)) ++c.next_clause;
    st_.tick();
    st_.sig.next_global = c.next_global;
    auto body = try_clause(cl, c.args, st_.trail, st_.sig, c.mode, c.depth, st_.limits.reduction_budget);
    if (!body) continue;
    ++st_.unfoldings;
    goals_ = std::make_shared<const Cell>(Cell{Goal{std::move(*body), c.mode, c.depth}, c.cont});
    return true;
  }
  return false;
}

bool Machine::step(const Goal& g) {
  st_.tick();
  if (st_.trace) st_.trace(g);
  st_.sig.nabla_depth = g.depth;
  const Formula& f = g.formula;
  switch (f.kind()) {
    case Formula::Kind::Top:
      return true;
    case Formula::Kind::Eq: {
      Unifier u(st_.trail, st_.sig, g.mode, st_.limits.reduction_budget);
      auto r = u.unify(f.lhs(), f.rhs());
      if (r == UnifyResult::NonPattern) throw NonPatternError(*u.nonpattern());
      return r == UnifyResult::Success;
    }
    case Formula::Kind::And:
      push(Goal{f.right(), g.mode, g.depth});
      push(Goal{f.left(), g.mode, g.depth});
      return true;
    case Formula::Kind::Or: {
      auto alt = std::make_shared<const Cell>(Cell{Goal{f.right(), g.mode, g.depth}, goals_});
      Choice c;
      c.cont = std::move(alt);
      c.mark = st_.trail.mark();
      c.next_global = st_.sig.next_global;
      choices_.push_back(std::move(c));
      push(Goal{f.left(), g.mode, g.depth});
      return true;
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      if (f.is(Formula::Kind::Forall) && g.mode == Flex::Eigen)
        throw IllFormedFormula("universal quantifier in an implication antecedent");
      // ∃ on the right is a logic variable; ∀ on the right and ∃ on the left
      // introduce eigenvariables.
      VarKind kind = f.is(Formula::Kind::Exists) && g.mode == Flex::Logic ? VarKind::Logic : VarKind::Eigen;
      Term v = fresh_var_at(st_.sig, kind, st_.sig.next_global++, g.depth, f.binder());
      push(Goal{instantiate(f.body(), v), g.mode, g.depth});
      return true;
    }
    case Formula::Kind::Nabla:
      push(Goal{instantiate(f.body(), Term::nabla(g.depth)), g.mode, g.depth + 1});
      return true;
    case Formula::Kind::Imp:
      if (g.mode == Flex::Eigen) throw IllFormedFormula("implication in an implication antecedent");
      return prove_implication(g);
    case Formula::Kind::Atom:
      return prove_atom(g);
  }
  return false;
}

// Every answer θ of the antecedent (eigenvariables instantiable) must admit
// a proof of the consequent under θ.
bool Machine::prove_implication(const Goal& g) {
  const Formula& a = g.formula.left();
  const Formula& b = g.formula.right();
  if (has_unbound_logic(a))
    throw NonGroundAntecedent("implication antecedent contains an unbound existential variable: " +
                              print_formula(a));
  NestingGuard guard(st_);
  const std::uint64_t watermark = st_.sig.fresh_counter;
  Machine left(st_, Goal{a, Flex::Eigen, g.depth});
  while (left.next()) {
    const Trail::Mark m = st_.trail.mark();
    Machine right(st_, Goal{b, Flex::Logic, g.depth});
    if (!right.next()) return false;
    for (std::size_t i = m; i < st_.trail.size(); ++i) {
      const VarCell& c = st_.trail.at(i);
      if (c.kind == VarKind::Logic && c.id <= watermark)
        throw ConsequentBindsOuterVariable(
            "proving the consequent of an implication would instantiate an outer existential variable: " +
            print_formula(g.formula));
    }
  }
  return true;
}

bool Machine::prove_atom(const Goal& g) {
  const Definition& d = st_.program->get(g.formula.pred());
  if (d.table_mode != TableMode::None && !g.skip_table &&
      eligible(g.formula, d.level, st_.limits.reduction_budget))
    return tabled_prove(st_, g);
  choices_.push_back(Choice{goals_, st_.trail.mark(), st_.sig.next_global, &d, g.formula.args(), 0, g.mode,
                            g.depth});
  if (resume_clauses(choices_.back())) {
    if (choices_.back().next_clause >= d.clauses.size()) choices_.pop_back();
    return true;
  }
  choices_.pop_back();
  return false;
}

bool provable(ProverState& st, const Goal& goal) {
  NestingGuard guard(st);
  Machine m(st, goal);
  return m.next();
}

// ---------------------------------------------------------------------------

AnswerStream::AnswerStream(ProverState& st, const Formula& goal) : st_(st) {
  if (st.nesting == 0) st.query_base = st.steps;
  Formula body = goal;
  while (body.is(Formula::Kind::Exists)) {
    Term v = fresh_var_at(st.sig, VarKind::Logic, st.sig.next_global++, 0, body.binder());
    vars_.emplace_back(body.binder(), v);
    body = instantiate(body.body(), v);
  }
  machine_ = std::make_unique<Machine>(st, Goal{std::move(body), Flex::Logic, 0});
}

std::optional<Snapshot> AnswerStream::next() {
  if (!machine_->next()) return std::nullopt;
  Snapshot s;
  for (const auto& [name, v] : vars_) s.emplace_back(name, eta_contract(normalize(v, st_.limits.reduction_budget)));
  return s;
}

AnswerStream prove0(ProverState& st, const Formula& goal) {
  if (classify(goal, *st.program) != 0) throw IllFormedFormula("goal is not a level-0 formula");
  return AnswerStream(st, goal);
}

AnswerStream prove1(ProverState& st, const Formula& goal) {
  classify(goal, *st.program);
  return AnswerStream(st, goal);
}

namespace {

std::string clip(std::string s) {
  constexpr std::size_t kMax = 2000;
  if (s.size() > kMax) s = s.substr(0, kMax) + " ...";
  return s;
}

}  // namespace

std::optional<std::string> describe_error(const std::exception& e) {
  if (const auto* np = dynamic_cast<const NonPatternError*>(&e))
    return "non-pattern unification problem: " + clip(print_term(np->problem().lhs)) + " = " +
           clip(print_term(np->problem().rhs));
  if (const auto* nd = dynamic_cast<const NormalizationDepthExceeded*>(&e))
    return "normalization exceeded " + std::to_string(nd->budget()) + " reduction steps on: " +
           clip(print_term(nd->offending()));
  if (dynamic_cast<const BudgetExceeded*>(&e)) return std::string("budget exceeded: ") + e.what();
  if (dynamic_cast<const EngineError*>(&e) || dynamic_cast<const LogicError*>(&e)) return std::string(e.what());
  return std::nullopt;
}

SolveResult solve(ProverState& st, const Formula& goal, std::size_t max_answers) {
  SolveResult r;
  const std::size_t start = st.steps;
  run_with_large_stack([&] {
    st.table_stack.clear();
    st.provisional.clear();
    st.min_dependency = SIZE_MAX;
    st.nesting = 0;
    try {
      AnswerStream s = classify(goal, *st.program) == 0 ? prove0(st, goal) : prove1(st, goal);
      while (max_answers == 0 || r.answers.size() < max_answers) {
        auto snap = s.next();
        if (!snap) break;
        std::vector<std::pair<std::string, std::string>> printed;
        for (const auto& [name, value] : *snap) printed.emplace_back(name, print_term(value));
        r.answers.push_back(std::move(printed));
      }
      r.outcome = r.answers.empty() ? Outcome::Disproved : Outcome::Proved;
    } catch (const std::exception& e) {
      auto d = describe_error(e);
      if (!d) throw;
      r.error = *d;
      r.outcome = r.answers.empty() ? Outcome::Inconclusive : Outcome::Proved;
    }
  });
  r.steps = st.steps - start;
  return r;
}

namespace {

struct ThreadCall {
  const std::function<void()>* fn;
  std::exception_ptr error;
};

void* thread_main(void* p) {
  auto* call = static_cast<ThreadCall*>(p);
  try {
    (*call->fn)();
  } catch (...) {
    call->error = std::current_exception();
  }
  return nullptr;
}

}  // namespace

void run_with_large_stack(const std::function<void()>& fn) {
  constexpr std::size_t kStack = std::size_t{1} << 30;
  ThreadCall call{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_t thread;
  bool ok = pthread_attr_setstacksize(&attr, kStack) == 0 && pthread_create(&thread, &attr, thread_main, &call) == 0;
  pthread_attr_destroy(&attr);
  if (!ok) {
    fn();
    return;
  }
  pthread_join(thread, nullptr);
  if (call.error) std::rethrow_exception(call.error);
}

}  // namespace nabla
