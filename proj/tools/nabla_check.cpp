// nabla-check: batch checker and REPL for definition files.

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "nabla/session.hpp"

namespace {

std::optional<std::size_t> env_size(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring non-numeric " << name << "=" << v << "\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  nabla::SessionConfig cfg;
  if (auto b = env_size("NABLA_BUDGET")) cfg.limits.max_steps = *b;
  if (auto b = env_size("NABLA_REDUCTION_BUDGET")) cfg.limits.reduction_budget = *b;

  CLI::App app{"Proof search for fixed-point definitions with nabla and lambda-tree syntax"};
  app.add_option("files", cfg.files, "Definition files, loaded in order")->check(CLI::ExistingFile);
  app.add_option("-q,--query", cfg.queries, "Query to run after loading (repeatable)");
  app.add_option("-n,--max-answers", cfg.max_answers, "Answers to print per query (0 = all)")
      ->capture_default_str();
  app.add_option("-b,--budget", cfg.limits.max_steps, "Engine step budget per query (env NABLA_BUDGET)")
      ->capture_default_str();
  app.add_option("--reduction-budget", cfg.limits.reduction_budget,
                 "Beta-reduction steps per normalization (env NABLA_REDUCTION_BUDGET)")
      ->capture_default_str();
  app.add_option("--max-nesting", cfg.limits.max_nesting, "Nested implication/table sub-proofs")
      ->capture_default_str();
  app.add_option("--show-table", cfg.show_tables, "Print the table of a predicate at the end (repeatable)");
  app.add_flag("--trace", cfg.trace, "Print every selected goal to stderr");
  bool force_repl = false;
  app.add_flag("-i,--interactive", force_repl, "Start the REPL after loading, even if there are assertions");
  CLI11_PARSE(app, argc, argv);

  nabla::Session session(std::cout, std::cerr, cfg.limits);
  session.set_trace(cfg.trace);
  for (const auto& f : cfg.files)
    if (!session.load_file(f)) return nabla::kExitInconclusive;
  if (!session.finalize()) return nabla::kExitInconclusive;

  if (force_repl || (cfg.queries.empty() && cfg.show_tables.empty() && !session.has_pending())) {
    session.run_pending();
    session.repl(std::cin, isatty(STDIN_FILENO) != 0);
    return nabla::kExitOk;
  }
  int code = session.run_pending();
  for (const auto& q : cfg.queries) {
    int c = session.run_query_text(q, cfg.max_answers);
    if (c == nabla::kExitInconclusive || code == nabla::kExitInconclusive)
      code = nabla::kExitInconclusive;
    else
      code = std::max(code, c);
  }
  for (const auto& p : cfg.show_tables) session.show_table(nabla::intern(p));
  return code;
}
