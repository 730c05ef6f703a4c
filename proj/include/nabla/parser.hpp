#pragma once

// Concrete syntax for definition files, queries and terms.
//
//   x\ body            λ-abstraction (extends as far right as possible)
//   f a (g b)          application by juxtaposition
//   a :: l             list cons (right associative)
//   t = s   A /\ B   A \/ B   A => B     (tightest to loosest, => right assoc)
//   forall x y. F   exists X. F   nabla x. F
//   head := body.      head.
//   #level p 1.  #table inductive p.  #table coinductive p.
//   #assert F.  #assert_not F.  #include "file".  #clear_tables.  #show_table p.
//
// Identifiers starting with an uppercase letter or `_` that are not bound by
// a quantifier or λ are clause variables (in clauses) or existentially
// quantified query variables (in queries and assertions).

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nabla/logic.hpp"

namespace nabla {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& msg, SourceLoc loc)
      : std::runtime_error(loc.file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " +
                           msg),
        loc_(std::move(loc)) {}
  const SourceLoc& loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

/// A goal with implicitly existential variables: `body` has `vars.size()`
/// loose formula-level binders, variable i being index (vars.size() - 1 - i).
struct Query {
  std::vector<std::string> vars;
  Formula body;
};

struct Directive {
  enum class Kind { Level, Table, Assert, AssertNot, Include, ClearTables, ShowTable };
  Kind kind = Kind::Assert;
  Symbol pred = 0;
  int level = 0;
  TableMode mode = TableMode::None;
  Query query;
  std::string path;
  SourceLoc loc;
};

using Declaration = std::variant<Clause, Directive>;

struct SourceFile {
  std::string name;
  std::vector<Declaration> declarations;
};

/// Free identifiers are looked up in `env` first; other lowercase names are
/// constants and other uppercase names are an error.
Term parse_term(std::string_view text, const std::map<std::string, Term>& env = {});

/// Parses a closed formula; free uppercase variables are existentially
/// quantified at the top, in order of first occurrence.
Formula parse_formula(std::string_view text);

Query parse_query(std::string_view text, const std::string& origin = "<query>");

/// Parses a whole file, or a single REPL statement.
SourceFile parse_file(std::string_view text, const std::string& name = "<input>");

// ---------------------------------------------------------------------------
// Printing

/// `context` names the loose indices: context.back() is index 0.
std::string print_term(const Term& t, const std::vector<std::string>& context = {});
std::string print_formula(const Formula& f, const std::vector<std::string>& context = {});
std::string print_query(const Query& q);
std::string print_clause(const Clause& c);
std::string print_directive(const Directive& d);
std::string print_source(const SourceFile& file);

/// Formula with free query variables wrapped into outermost existentials.
Formula close_query(const Query& q);

}  // namespace nabla
