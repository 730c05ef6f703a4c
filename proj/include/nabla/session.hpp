#pragma once

// Batch and interactive drivers shared by the nabla-check tool and tests.

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "nabla/engine.hpp"
#include "nabla/parser.hpp"

namespace nabla {

/// Exit codes: 0 all expectations met, 1 an assertion failed or a query was
/// disproved, 2 something was inconclusive (syntax, non-pattern, budget...).
/// When both 1 and 2 occur the result is 2.
enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitInconclusive = 2 };

struct SessionConfig {
  std::vector<std::string> files;
  std::vector<std::string> queries;
  std::size_t max_answers = 1;  // 0 = all
  Limits limits;
  std::vector<std::string> show_tables;
  bool trace = false;
};

class Session {
 public:
  Session(std::ostream& out, std::ostream& err, Limits limits = {});

  /// Parses a file (following #include) and adds its clauses and
  /// declarations. Runnable directives are queued, not executed.
  /// Returns false after reporting an error.
  bool load_file(const std::string& path);
  bool load_text(const std::string& text, const std::string& name, const std::string& base_dir = ".");

  /// Finalizes the program (levels, checks); reports errors and warnings.
  bool finalize();

  /// Executes queued directives in source order; returns the worst exit code.
  int run_pending();

  int run_directive(const Directive& d);
  int run_query(const Query& q, std::size_t max_answers);
  int run_query_text(const std::string& text, std::size_t max_answers);
  void show_table(Symbol pred);

  void set_trace(bool on);
  ProverState& state() { return state_; }
  const Program& program() const { return program_; }
  bool has_pending() const { return !pending_.empty(); }

  /// Interactive loop: statements end with '.', `;` asks for another answer.
  void repl(std::istream& in, bool prompt);

 private:
  bool load_source(const SourceFile& file, const std::string& base_dir);
  std::string where(const SourceLoc& loc) const;

  std::ostream& out_;
  std::ostream& err_;
  Program program_;
  ProverState state_;
  std::vector<Directive> pending_;
  std::set<std::string> loaded_;
  bool dirty_ = false;
};

int run_batch(const SessionConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace nabla
