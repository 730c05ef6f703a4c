#pragma once

// λ-tree syntax terms in de Bruijn form with (global, local) level
// annotations on eigen- and logic variables.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nabla {

using Symbol = std::uint32_t;

Symbol intern(std::string_view name);
const std::string& symbol_name(Symbol sym);

enum class VarKind : std::uint8_t { Logic, Eigen };

class Term;
struct VarCell;

class Term {
 public:
  enum class Kind : std::uint8_t { Const, Bound, Nabla, Var, Lam, App };

  Term() = default;

  static Term constant(Symbol sym);
  static Term constant(std::string_view name) { return constant(intern(name)); }
  static Term bound(std::uint32_t index);
  static Term nabla(std::uint32_t index);
  static Term var(std::shared_ptr<VarCell> cell);
  /// `hint` names the binder for printing only; it never affects equality.
  static Term lam(Term body, Symbol hint = 0);
  /// Builds an application in spine form. An App head is flattened and an
  /// empty argument list returns the head itself.
  static Term app(Term head, std::vector<Term> args);

  bool is_null() const { return node_ == nullptr; }
  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return node_->kind == k; }

  Symbol symbol() const { return node_->sym; }      // Const
  Symbol lam_hint() const { return node_->sym; }    // Lam
  std::uint32_t index() const { return node_->index; }  // Bound, Nabla
  VarCell& cell() const { return *node_->cell; }    // Var
  const std::shared_ptr<VarCell>& cell_ptr() const { return node_->cell; }
  const Term& body() const { return node_->children[0]; }  // Lam
  const Term& head() const { return node_->children[0]; }  // App
  std::span<const Term> args() const {               // App
    return std::span<const Term>(node_->children).subspan(1);
  }

  /// One past the largest loose de Bruijn index; 0 for closed terms.
  std::uint32_t loose() const { return node_->loose; }

  /// Pointer identity of the underlying node.
  const void* identity() const { return node_.get(); }

 private:
  struct Node {
    Kind kind;
    std::uint32_t index = 0;
    std::uint32_t loose = 0;
    Symbol sym = 0;
    std::shared_ptr<VarCell> cell;
    std::vector<Term> children;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

struct VarCell : std::enable_shared_from_this<VarCell> {
  std::uint64_t id = 0;
  VarKind kind = VarKind::Logic;
  std::uint32_t global = 0;
  std::uint32_t local = 0;
  std::string name;
  Term binding;  // empty when unbound; mutated only through a Trail

  bool bound() const { return !binding.is_null(); }
};

/// Σ: source of fresh variables and the current ∇ depth.
struct Signature {
  std::uint32_t next_global = 0;
  std::uint32_t nabla_depth = 0;
  std::uint64_t fresh_counter = 0;
};

/// Allocates a variable at (next_global, nabla_depth) and bumps next_global.
Term fresh_var(Signature& sig, VarKind kind, std::string name = {});
inline Term fresh_logic_var(Signature& sig, std::string name = {}) {
  return fresh_var(sig, VarKind::Logic, std::move(name));
}
inline Term fresh_eigen_var(Signature& sig, std::string name = {}) {
  return fresh_var(sig, VarKind::Eigen, std::move(name));
}
/// Allocates a variable with explicit levels; next_global is untouched.
Term fresh_var_at(Signature& sig, VarKind kind, std::uint32_t global, std::uint32_t local,
                  std::string name = {});

inline constexpr std::size_t kDefaultReductionBudget = 100000;

class NormalizationDepthExceeded : public std::runtime_error {
 public:
  NormalizationDepthExceeded(Term offending, std::size_t budget)
      : std::runtime_error("normalization budget exceeded"),
        offending_(std::move(offending)),
        budget_(budget) {}
  const Term& offending() const { return offending_; }
  std::size_t budget() const { return budget_; }

 private:
  Term offending_;
  std::size_t budget_;
};

/// Follows variable bindings until reaching a non-variable or unbound var.
Term deref(Term t);

/// Shifts loose de Bruijn indices >= `cutoff` by `amount`.
Term shift(const Term& t, std::int32_t amount, std::uint32_t cutoff = 0);

/// Substitutes `values[i]` for loose index `start + i` and lowers the loose
/// indices above the substituted block by values.size().
Term instantiate(const Term& t, std::span<const Term> values, std::uint32_t start = 0);

/// β-reduction with a step budget shared across all calls on one instance.
class Reducer {
 public:
  explicit Reducer(std::size_t budget = kDefaultReductionBudget) : budget_(budget) {}

  /// Dereferences bound variables and contracts head redexes until the head
  /// is a constant, index, unbound variable or λ.
  Term head_normalize(Term t);
  Term normalize(const Term& t);

  std::size_t steps() const { return steps_; }
  std::size_t budget() const { return budget_; }

 private:
  void tick(const Term& offending);

  std::size_t budget_;
  std::size_t steps_ = 0;
};

Term normalize(const Term& t, std::size_t budget = kDefaultReductionBudget);

/// Maximal η-contraction; on a β-normal term yields the βη-normal form.
Term eta_contract(const Term& t);

/// Structural identity (α-equality via de Bruijn); variables compare by cell.
bool structurally_equal(const Term& a, const Term& b);

bool equal_modulo(const Term& t, const Term& s, std::size_t budget = kDefaultReductionBudget);

/// λ-abstracts every occurrence of NablaIndex(k).
Term abstract_over_nabla(const Term& t, std::uint32_t k);

bool occurs_nabla(const Term& t, std::uint32_t k);

/// True iff an unbound variable of the given kind occurs (through bindings).
bool has_unbound_var(const Term& t, VarKind kind);

}  // namespace nabla
