#include "nabla/logic.hpp"

#include <algorithm>
#include <functional>

namespace nabla {

Formula Formula::top() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Top;
  return Formula(std::move(n));
}

Formula Formula::atom(Symbol pred, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->pred = pred;
  n->terms = std::move(args);
  return Formula(std::move(n));
}

Formula Formula::eq(Term lhs, Term rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Eq;
  n->terms = {std::move(lhs), std::move(rhs)};
  return Formula(std::move(n));
}

namespace {

template <typename Node, typename Kind>
std::shared_ptr<Node> binary(Kind k, auto a, auto b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->subs = {std::move(a), std::move(b)};
  return n;
}

}  // namespace

Formula Formula::conj(Formula a, Formula b) { return Formula(binary<Node>(Kind::And, std::move(a), std::move(b))); }
Formula Formula::disj(Formula a, Formula b) { return Formula(binary<Node>(Kind::Or, std::move(a), std::move(b))); }
Formula Formula::imp(Formula a, Formula b) { return Formula(binary<Node>(Kind::Imp, std::move(a), std::move(b))); }

Formula Formula::quantifier(Kind k, std::string binder, Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->binder = std::move(binder);
  n->subs = {std::move(body)};
  return Formula(std::move(n));
}

Formula Formula::exists(std::string binder, Formula body) {
  return quantifier(Kind::Exists, std::move(binder), std::move(body));
}
Formula Formula::forall(std::string binder, Formula body) {
  return quantifier(Kind::Forall, std::move(binder), std::move(body));
}
Formula Formula::nabla(std::string binder, Formula body) {
  return quantifier(Kind::Nabla, std::move(binder), std::move(body));
}

Formula instantiate(const Formula& f, std::span<const Term> values, std::uint32_t start) {
  switch (f.kind()) {
    case Formula::Kind::Top:
      return f;
    case Formula::Kind::Atom: {
      std::vector<Term> args;
      args.reserve(f.args().size());
      for (const auto& a : f.args()) args.push_back(instantiate(a, values, start));
      return Formula::atom(f.pred(), std::move(args));
    }
    case Formula::Kind::Eq:
      return Formula::eq(instantiate(f.lhs(), values, start), instantiate(f.rhs(), values, start));
    case Formula::Kind::And:
      return Formula::conj(instantiate(f.left(), values, start), instantiate(f.right(), values, start));
    case Formula::Kind::Or:
      return Formula::disj(instantiate(f.left(), values, start), instantiate(f.right(), values, start));
    case Formula::Kind::Imp:
      return Formula::imp(instantiate(f.left(), values, start), instantiate(f.right(), values, start));
    default:
      return Formula::quantifier(f.kind(), f.binder(), instantiate(f.body(), values, start + 1));
  }
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Formula::Kind::Top:
      return true;
    case Formula::Kind::Atom:
      if (a.pred() != b.pred() || a.args().size() != b.args().size()) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!structurally_equal(a.args()[i], b.args()[i])) return false;
      return true;
    case Formula::Kind::Eq:
      return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
      return structurally_equal(a.left(), b.left()) && structurally_equal(a.right(), b.right());
    default:
      return structurally_equal(a.body(), b.body());
  }
}

// ---------------------------------------------------------------------------
// Program

Program::Program() {
  Definition f;
  f.pred = intern("false");
  defs_.emplace(f.pred, f);
}

void Program::add_clause(Clause c) {
  auto& d = defs_[c.pred];
  d.pred = c.pred;
  d.clauses.push_back(std::move(c));
}

void Program::declare_level(Symbol pred, int level) {
  if (level != 0 && level != 1) throw LogicError("level of " + symbol_name(pred) + " must be 0 or 1");
  auto& d = defs_[pred];
  d.pred = pred;
  if (d.level_declared) throw LogicError("duplicate #level directive for " + symbol_name(pred));
  d.level_declared = true;
  d.level = level;
}

void Program::declare_table(Symbol pred, TableMode mode) {
  auto& d = defs_[pred];
  d.pred = pred;
  if (table_declared_[pred]) throw LogicError("duplicate #table directive for " + symbol_name(pred));
  table_declared_[pred] = true;
  d.table_mode = mode;
}

const Definition* Program::find(Symbol pred) const {
  auto it = defs_.find(pred);
  return it == defs_.end() ? nullptr : &it->second;
}

const Definition& Program::get(Symbol pred) const {
  if (const auto* d = find(pred)) return *d;
  throw UndefinedPredicate(pred);
}

int Program::level_of(Symbol pred) const {
  const auto* d = find(pred);
  return d ? d->level : 0;
}

namespace {

void collect_antecedent_preds(const Formula& f, bool in_antecedent, std::vector<Symbol>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      if (in_antecedent) out.push_back(f.pred());
      return;
    case Formula::Kind::Imp:
      collect_antecedent_preds(f.left(), true, out);
      collect_antecedent_preds(f.right(), in_antecedent, out);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      collect_antecedent_preds(f.left(), in_antecedent, out);
      collect_antecedent_preds(f.right(), in_antecedent, out);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
    case Formula::Kind::Nabla:
      collect_antecedent_preds(f.body(), in_antecedent, out);
      return;
    default:
      return;
  }
}

}  // namespace

void Program::finalize() {
  for (auto& [pred, d] : defs_)
    if (!d.level_declared) d.level = 0;

  for (bool changed = true; changed;) {
    changed = false;
    for (auto& [pred, d] : defs_) {
      for (const auto& c : d.clauses) {
        int lvl = classify(c.body, *this);
        if (lvl <= d.level) continue;
        if (d.level_declared) check_definition(d, *this);
        d.level = lvl;
        changed = true;
      }
    }
  }

  warnings_.clear();
  for (const auto& [pred, d] : defs_) {
    for (const auto& c : d.clauses) {
      std::vector<Symbol> preds;
      collect_antecedent_preds(c.body, false, preds);
      if (std::find(preds.begin(), preds.end(), pred) != preds.end()) {
        warnings_.push_back(c.loc.file + ":" + std::to_string(c.loc.line) + ": " + symbol_name(pred) +
                            " occurs in an implication antecedent of its own definition"
                            " (stratification is not checked)");
        break;
      }
    }
  }
}

int classify(const Formula& f, const Program& program) {
  switch (f.kind()) {
    case Formula::Kind::Top:
    case Formula::Kind::Eq:
      return 0;
    case Formula::Kind::Atom:
      return program.level_of(f.pred());
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return std::max(classify(f.left(), program), classify(f.right(), program));
    case Formula::Kind::Exists:
    case Formula::Kind::Nabla:
      return classify(f.body(), program);
    case Formula::Kind::Forall:
      classify(f.body(), program);
      return 1;
    case Formula::Kind::Imp:
      if (classify(f.left(), program) > 0) throw IllFormedFormula("implication antecedent is not a level-0 formula");
      classify(f.right(), program);
      return 1;
  }
  return 1;
}

void check_definition(const Definition& d, const Program& program) {
  for (const auto& c : d.clauses) {
    if (classify(c.body, program) > d.level) {
      std::string where = c.loc.file.empty() ? std::string() : c.loc.file + ":" + std::to_string(c.loc.line) + ": ";
      throw LevelError(where + "clause for " + symbol_name(d.pred) + " has a level-1 body but " +
                       symbol_name(d.pred) + " is declared level 0");
    }
  }
}

// ---------------------------------------------------------------------------
// Unfolding

namespace {

/// Constant heading `t` (after dereferencing), with its argument count.
std::optional<std::pair<Symbol, std::size_t>> rigid_const(const Term& x) {
  Term t = deref(x);
  if (t.is(Term::Kind::Const)) return std::pair{t.symbol(), std::size_t{0}};
  if (t.is(Term::Kind::App) && t.head().is(Term::Kind::Const)) return std::pair{t.head().symbol(), t.args().size()};
  return std::nullopt;
}

}  // namespace

bool may_match(const Clause& c, std::span<const Term> args) {
  if (c.head_args.size() != args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto h = rigid_const(c.head_args[i]);
    if (!h) continue;
    auto a = rigid_const(args[i]);
    if (a && *a != *h) return false;
  }
  return true;
}

std::optional<Formula> try_clause(const Clause& c, std::span<const Term> args, Trail& trail, Signature& sig,
                                  Flex flex, std::uint32_t depth, std::size_t reduction_budget) {
  if (c.head_args.size() != args.size()) return std::nullopt;
  const std::size_t n = c.vars.size();
  std::vector<Term> values(n);
  for (std::size_t i = 0; i < n; ++i)
    values[n - 1 - i] = fresh_var_at(sig, instantiable_kind(flex), sig.next_global++, depth, c.vars[i]);

  auto mark = trail.mark();
  Unifier u(trail, sig, flex, reduction_budget);
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto r = u.unify(instantiate(c.head_args[i], values), args[i]);
    if (r == UnifyResult::Success) continue;
    trail.undo_to(mark);
    if (r == UnifyResult::NonPattern) throw NonPatternError(*u.nonpattern());
    return std::nullopt;
  }
  return instantiate(c.body, values);
}

Unfolder::Unfolder(const Program& program, const Formula& atom, Trail& trail, Signature& sig, Flex flex,
                   std::uint32_t depth, std::size_t reduction_budget)
    : def_(program.get(atom.pred())),
      args_(atom.args()),
      trail_(trail),
      sig_(sig),
      flex_(flex),
      depth_(depth),
      budget_(reduction_budget),
      mark_(trail.mark()),
      global_mark_(sig.next_global) {}

Unfolder::~Unfolder() {
  trail_.undo_to(mark_);
  sig_.next_global = global_mark_;
}

std::optional<Formula> Unfolder::next() {
  trail_.undo_to(mark_);
  sig_.next_global = global_mark_;
  while (next_clause_ < def_.clauses.size()) {
    const Clause& c = def_.clauses[next_clause_++];
    if (!may_match(c, args_)) continue;
    if (auto body = try_clause(c, args_, trail_, sig_, flex_, depth_, budget_)) return body;
  }
  return std::nullopt;
}

}  // namespace nabla
