#pragma once

// Formulas of the two-level fragment, definition clauses, and level checks.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nabla/term.hpp"
#include "nabla/unify.hpp"

namespace nabla {

/// Formula binders are de Bruijn binders for the terms below them: a term at
/// formula-binder depth d refers to the innermost quantifier as Bound(d') with
/// d' counting its own enclosing λs first.
class Formula {
 public:
  enum class Kind : std::uint8_t { Top, Atom, Eq, And, Or, Exists, Forall, Nabla, Imp };

  Formula() = default;

  static Formula top();
  static Formula atom(Symbol pred, std::vector<Term> args);
  static Formula eq(Term lhs, Term rhs);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula imp(Formula antecedent, Formula consequent);
  static Formula exists(std::string binder, Formula body);
  static Formula forall(std::string binder, Formula body);
  static Formula nabla(std::string binder, Formula body);
  static Formula quantifier(Kind k, std::string binder, Formula body);

  bool is_null() const { return node_ == nullptr; }
  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return node_->kind == k; }
  bool is_quantifier() const { return is(Kind::Exists) || is(Kind::Forall) || is(Kind::Nabla); }

  Symbol pred() const { return node_->pred; }
  const std::vector<Term>& args() const { return node_->terms; }  // Atom
  const Term& lhs() const { return node_->terms[0]; }             // Eq
  const Term& rhs() const { return node_->terms[1]; }             // Eq
  const Formula& left() const { return node_->subs[0]; }          // And, Or, Imp
  const Formula& right() const { return node_->subs[1]; }         // And, Or, Imp
  const Formula& body() const { return node_->subs[0]; }          // quantifiers
  const std::string& binder() const { return node_->binder; }

 private:
  struct Node {
    Kind kind;
    Symbol pred = 0;
    std::string binder;
    std::vector<Term> terms;
    std::vector<Formula> subs;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

/// Substitutes `values[i]` for the formula-level loose index `i` (0 is the
/// innermost enclosing binder).
Formula instantiate(const Formula& f, std::span<const Term> values, std::uint32_t start = 0);
inline Formula instantiate(const Formula& f, const Term& value) { return instantiate(f, std::span(&value, 1)); }

/// α-equality of formulas; binder names are ignored.
bool structurally_equal(const Formula& a, const Formula& b);

/// Applies `fn` to every term of the formula together with its binder depth.
template <typename F>
void for_each_term(const Formula& f, F&& fn, std::uint32_t depth = 0) {
  switch (f.kind()) {
    case Formula::Kind::Top:
      return;
    case Formula::Kind::Atom:
      for (const auto& t : f.args()) fn(t, depth);
      return;
    case Formula::Kind::Eq:
      fn(f.lhs(), depth);
      fn(f.rhs(), depth);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
      for_each_term(f.left(), fn, depth);
      for_each_term(f.right(), fn, depth);
      return;
    default:
      for_each_term(f.body(), fn, depth + 1);
  }
}

enum class TableMode : std::uint8_t { None, Inductive, Coinductive };

struct SourceLoc {
  std::string file;
  int line = 0;
  int column = 0;
};

/// A clause `pred head_args := body`. Clause variables are the outermost
/// binders: variable i is loose index (vars.size() - 1 - i) at the top.
struct Clause {
  Symbol pred = 0;
  std::vector<std::string> vars;
  std::vector<Term> head_args;
  Formula body;
  SourceLoc loc;
};

struct Definition {
  Symbol pred = 0;
  int level = 0;
  bool level_declared = false;
  std::vector<Clause> clauses;
  TableMode table_mode = TableMode::None;
};

class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllFormedFormula : public LogicError {
 public:
  using LogicError::LogicError;
};

class LevelError : public LogicError {
 public:
  using LogicError::LogicError;
};

class UndefinedPredicate : public LogicError {
 public:
  explicit UndefinedPredicate(Symbol pred)
      : LogicError("undefined predicate: " + symbol_name(pred)), pred_(pred) {}
  Symbol pred() const { return pred_; }

 private:
  Symbol pred_;
};

class Program {
 public:
  Program();

  void add_clause(Clause c);
  /// Throws LogicError on a second declaration for the same predicate.
  void declare_level(Symbol pred, int level);
  void declare_table(Symbol pred, TableMode mode);

  /// Infers undeclared levels (least fixpoint from 0) and checks every
  /// clause. Throws IllFormedFormula or LevelError.
  void finalize();

  const Definition* find(Symbol pred) const;
  const Definition& get(Symbol pred) const;
  /// Level of an atom's predicate; undefined predicates count as level 0.
  int level_of(Symbol pred) const;
  const std::map<Symbol, Definition>& definitions() const { return defs_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::map<Symbol, Definition> defs_;
  std::map<Symbol, bool> table_declared_;
  std::vector<std::string> warnings_;
};

/// Minimal level of `f`: 0 if it is in the level-0 grammar, 1 otherwise.
int classify(const Formula& f, const Program& program);

/// Throws LevelError naming the first clause whose body outranks the
/// declared level.
void check_definition(const Definition& d, const Program& program);

class NonPatternError : public std::runtime_error {
 public:
  explicit NonPatternError(NonPatternProblem p)
      : std::runtime_error("unification problem outside the pattern fragment"), problem_(std::move(p)) {}
  const NonPatternProblem& problem() const { return problem_; }

 private:
  NonPatternProblem problem_;
};

/// Renames clause `c` apart with fresh variables of the instantiable kind at
/// the given ∇ depth and unifies its head with `args`. Returns the instance
/// body on success; on failure the trail is restored.
std::optional<Formula> try_clause(const Clause& c, std::span<const Term> args, Trail& trail, Signature& sig,
                                  Flex flex, std::uint32_t depth, std::size_t reduction_budget);

/// Cheap pre-filter: false only if the clause head certainly cannot unify.
bool may_match(const Clause& c, std::span<const Term> args);

/// Lazily enumerates the bodies of the clauses whose heads unify with an
/// atom, in source order. Bindings of the current instance stay in place
/// until the next call; destruction restores the trail.
class Unfolder {
 public:
  Unfolder(const Program& program, const Formula& atom, Trail& trail, Signature& sig, Flex flex = Flex::Logic,
           std::uint32_t depth = 0, std::size_t reduction_budget = kDefaultReductionBudget);
  ~Unfolder();
  Unfolder(const Unfolder&) = delete;
  Unfolder& operator=(const Unfolder&) = delete;

  std::optional<Formula> next();

 private:
  const Definition& def_;
  std::vector<Term> args_;
  Trail& trail_;
  Signature& sig_;
  Flex flex_;
  std::uint32_t depth_;
  std::size_t budget_;
  Trail::Mark mark_;
  std::uint32_t global_mark_;
  std::size_t next_clause_ = 0;
};

}  // namespace nabla
