#pragma once

// The two provers. Goals are closed formulas (quantifiers are instantiated
// eagerly) kept on an explicit goal list with a choicepoint stack, so search
// depth does not consume C stack. Implications and tabled atoms are
// deterministic sub-proofs run by nested machines.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nabla/logic.hpp"
#include "nabla/unify.hpp"

namespace nabla {

struct Limits {
  std::size_t max_steps = 1000000;
  std::size_t reduction_budget = kDefaultReductionBudget;
  std::size_t max_nesting = 100000;  // nested implication / tabled sub-proofs
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public EngineError {
 public:
  using EngineError::EngineError;
};

/// An implication antecedent still contains unbound existential variables.
class NonGroundAntecedent : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Proving an implication's consequent would instantiate an existential
/// variable introduced outside the implication.
class ConsequentBindsOuterVariable : public EngineError {
 public:
  using EngineError::EngineError;
};

// ---------------------------------------------------------------------------
// Tables

enum class EntryStatus : std::uint8_t { InProgress, Proved, Disproved };

struct TableEntry {
  EntryStatus status = EntryStatus::InProgress;
  bool provisional = false;  // result rests on a loop assumption not yet discharged
  bool assumed = false;      // looked up while in progress
  std::size_t stack_index = 0;
  std::size_t dependency = 0;  // lowest in-progress stack index the result depends on
};

struct Table {
  TableMode mode = TableMode::Inductive;
  std::map<std::string, TableEntry> entries;
};

class TableSet {
 public:
  Table& table(Symbol pred, TableMode mode);
  const Table* find(Symbol pred) const;
  void clear() { tables_.clear(); }
  const std::map<Symbol, Table>& tables() const { return tables_; }

 private:
  std::map<Symbol, Table> tables_;
};

// ---------------------------------------------------------------------------

struct Goal {
  Formula formula;
  Flex mode = Flex::Logic;
  std::uint32_t depth = 0;  // ∇ depth
  bool skip_table = false;
};

struct ProverState {
  explicit ProverState(const Program& p) : program(&p) {}

  const Program* program;
  Signature sig;
  Trail trail;
  TableSet tables;
  Limits limits;

  std::size_t steps = 0;        // engine steps, cumulative
  std::size_t unfoldings = 0;   // clause bodies entered, cumulative
  std::size_t nesting = 0;
  std::size_t query_base = 0;   // steps at the start of the current query

  // Tabling bookkeeping for the current search.
  struct Pending {
    Symbol pred;
    std::string key;
  };
  std::vector<Pending> table_stack;
  std::vector<Pending> provisional;
  std::size_t min_dependency = SIZE_MAX;

  /// Called with a description of every goal the machine selects.
  std::function<void(const Goal&)> trace;

  void tick();
};

/// Resumable depth-first search over a goal list.
class Machine {
 public:
  Machine(ProverState& st, Goal goal);
  ~Machine();
  Machine(const Machine&) = delete;
  Machine& operator=(const Machine&) = delete;

  /// Advances to the next solution; its bindings stay on the trail until the
  /// following call or destruction.
  bool next();

 private:
  struct Cell;
  using GoalList = std::shared_ptr<const Cell>;
  struct Cell {
    Goal goal;
    GoalList rest;
  };
  struct Choice {
    GoalList cont;
    Trail::Mark mark;
    std::uint32_t next_global;
    // clause alternatives; def == nullptr means `cont` is an Or branch
    const Definition* def = nullptr;
    std::vector<Term> args;
    std::size_t next_clause = 0;
    Flex mode = Flex::Logic;
    std::uint32_t depth = 0;
  };

  bool run();
  bool backtrack();
  bool resume_clauses(Choice& c);
  void push(Goal g) { goals_ = std::make_shared<const Cell>(Cell{std::move(g), goals_}); }
  bool step(const Goal& g);
  bool prove_implication(const Goal& g);
  bool prove_atom(const Goal& g);

  ProverState& st_;
  GoalList goals_;
  std::vector<Choice> choices_;
  Trail::Mark base_mark_;
  std::uint32_t base_global_;
  bool started_ = false;
  bool exhausted_ = false;
};

/// Runs `goal` to its first solution and undoes everything.
bool provable(ProverState& st, const Goal& goal);

/// A yielded answer: each named query variable with its normalized value.
using Snapshot = std::vector<std::pair<std::string, Term>>;

/// Answer substitutions for a closed goal; leading existentials are the
/// reported variables.
class AnswerStream {
 public:
  AnswerStream(ProverState& st, const Formula& goal);
  std::optional<Snapshot> next();

 private:
  ProverState& st_;
  std::vector<std::pair<std::string, Term>> vars_;
  std::unique_ptr<Machine> machine_;
};

/// Level-0 and level-1 entry points; throw IllFormedFormula when the goal is
/// outside the prover's fragment.
AnswerStream prove0(ProverState& st, const Formula& goal);
AnswerStream prove1(ProverState& st, const Formula& goal);

enum class Outcome { Proved, Disproved, Inconclusive };

struct SolveResult {
  Outcome outcome = Outcome::Disproved;
  std::vector<std::vector<std::pair<std::string, std::string>>> answers;  // printed
  std::string error;    // for Inconclusive: kind and pretty-printed details
  std::size_t steps = 0;
};

/// Collects up to `max_answers` answers (0 = unlimited) and classifies the
/// run. Runs on a thread with a large stack.
SolveResult solve(ProverState& st, const Formula& goal, std::size_t max_answers = 1);

/// Invokes `fn` on a thread with a large stack and rethrows its exception.
void run_with_large_stack(const std::function<void()>& fn);

/// Describes an engine exception for the user; nullopt if `e` is not one.
std::optional<std::string> describe_error(const std::exception& e);

// Tabling (tabling.cpp)

bool eligible(const Formula& atom, int level, std::size_t reduction_budget = kDefaultReductionBudget);
std::string canonical_key(const Formula& atom, std::size_t reduction_budget = kDefaultReductionBudget);
/// Decides a tabled atom (predicate with a table mode), consulting and
/// updating the table. The caller checked eligibility.
bool tabled_prove(ProverState& st, const Goal& goal);
/// `proved <goal>.` / `disproved <goal>.` lines, sorted.
std::vector<std::string> export_table(const ProverState& st, Symbol pred, bool include_disproved = true);

}  // namespace nabla
