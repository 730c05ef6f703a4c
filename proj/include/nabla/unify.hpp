#pragma once

// Higher-order pattern unification over level-annotated variables.
//
// A variable F with levels (g, l) may be instantiated by a term that mentions
// rigid eigenvariables of global level < g and ∇-indices < l only, apart from
// the λ-abstracted pattern arguments F is applied to. Flex subterms that see
// too much are pruned (dropping arguments) or lowered (fresh variable with
// smaller levels, raised over what the original could still see).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nabla/term.hpp"

namespace nabla {

/// Undo log of variable bindings.
class Trail {
 public:
  using Mark = std::size_t;

  Mark mark() const { return log_.size(); }
  void bind(VarCell& cell, Term value);
  void undo_to(Mark m);
  std::size_t size() const { return log_.size(); }
  VarCell& at(std::size_t i) const { return *log_[i]; }

 private:
  std::vector<std::shared_ptr<VarCell>> log_;  // keeps bound cells alive until undone
};

/// Which variable kind is instantiable. On the right of the sequent logic
/// variables are; inside an implication antecedent eigenvariables are.
enum class Flex : std::uint8_t { Logic, Eigen };

inline VarKind instantiable_kind(Flex f) { return f == Flex::Logic ? VarKind::Logic : VarKind::Eigen; }

enum class UnifyResult : std::uint8_t { Success, Failure, NonPattern };

/// The subproblem that left the pattern fragment.
struct NonPatternProblem {
  Term lhs;
  Term rhs;
};

class Unifier {
 public:
  Unifier(Trail& trail, Signature& sig, Flex flex = Flex::Logic,
          std::size_t reduction_budget = kDefaultReductionBudget)
      : trail_(trail), sig_(sig), flex_(flex), reducer_(reduction_budget) {}

  /// On Success the bindings stay on the trail; otherwise the trail is
  /// restored to its state on entry.
  UnifyResult unify(const Term& a, const Term& b);

  const std::optional<NonPatternProblem>& nonpattern() const { return nonpattern_; }

  bool flexible(const VarCell& v) const { return !v.bound() && v.kind == instantiable_kind(flex_); }

 private:
  struct Abort {
    UnifyResult result;
  };

  void solve(Term a, Term b);
  void flex_rigid(const Term& flex, const Term& rigid);
  void flex_flex(const Term& a, const Term& b);
  std::optional<std::vector<Term>> pattern_args(const VarCell& v, std::span<const Term> args);
  Term invert(const Term& t, const VarCell& target, const std::vector<Term>& pargs, std::uint32_t depth);
  std::optional<Term> try_invert(const Term& t, const VarCell& target, const std::vector<Term>& pargs,
                                 std::uint32_t depth);
  Term invert_flex(const Term& t, const VarCell& target, const std::vector<Term>& pargs,
                   std::uint32_t depth);
  void bind(VarCell& v, Term value);
  [[noreturn]] void fail() { throw Abort{UnifyResult::Failure}; }
  [[noreturn]] void not_pattern(const Term& a, const Term& b);

  Trail& trail_;
  Signature& sig_;
  Flex flex_;
  Reducer reducer_;
  std::optional<NonPatternProblem> nonpattern_;
  Term problem_lhs_;
  Term problem_rhs_;
};

UnifyResult unify(const Term& a, const Term& b, Trail& trail, Signature& sig, Flex flex = Flex::Logic,
                  std::size_t reduction_budget = kDefaultReductionBudget);

/// True iff every unbound instantiable variable in `t` is applied to
/// distinct arguments, each a λ-bound index, a ∇-index the variable cannot
/// see, or a rigid eigenvariable of higher global level.
bool is_pattern(const Term& t, Flex flex = Flex::Logic);

}  // namespace nabla
