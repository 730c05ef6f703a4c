#include "nabla/session.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nabla {

namespace fs = std::filesystem;

namespace {

int worst(int a, int b) {
  if (a == kExitInconclusive || b == kExitInconclusive) return kExitInconclusive;
  return std::max(a, b);
}

std::string answer_line(const std::vector<std::pair<std::string, std::string>>& bindings) {
  std::string s;
  for (const auto& [name, value] : bindings) {
    if (!s.empty()) s += ", ";
    s += name + " = " + value;
  }
  return s;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Strips `%` comments so that statement ends can be detected line by line.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '%' && !in_string) return line.substr(0, i);
  }
  return line;
}

}  // namespace

Session::Session(std::ostream& out, std::ostream& err, Limits limits) : out_(out), err_(err), state_(program_) {
  state_.limits = limits;
}

void Session::set_trace(bool on) {
  if (!on) {
    state_.trace = nullptr;
    return;
  }
  state_.trace = [this](const Goal& g) {
    err_ << "trace: " << std::string(g.depth, '#') << (g.mode == Flex::Eigen ? "left " : "")
         << print_formula(g.formula) << "\n";
  };
}

std::string Session::where(const SourceLoc& loc) const {
  return fs::path(loc.file).filename().string() + ":" + std::to_string(loc.line) + ": ";
}

bool Session::load_file(const std::string& path) {
  std::error_code ec;
  fs::path canonical = fs::weakly_canonical(path, ec);
  std::string id = ec ? path : canonical.string();
  if (loaded_.count(id)) return true;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err_ << "error: cannot open " << path << "\n";
    return false;
  }
  loaded_.insert(id);
  std::stringstream buf;
  buf << in.rdbuf();
  fs::path dir = fs::path(path).parent_path();
  return load_text(buf.str(), path, dir.empty() ? "." : dir.string());
}

bool Session::load_text(const std::string& text, const std::string& name, const std::string& base_dir) {
  try {
    return load_source(parse_file(text, name), base_dir);
  } catch (const SyntaxError& e) {
    err_ << "error: " << e.what() << "\n";
    return false;
  }
}

bool Session::load_source(const SourceFile& file, const std::string& base_dir) {
  for (const auto& decl : file.declarations) {
    if (const auto* c = std::get_if<Clause>(&decl)) {
      program_.add_clause(*c);
      dirty_ = true;
      continue;
    }
    const auto& d = std::get<Directive>(decl);
    try {
      switch (d.kind) {
        case Directive::Kind::Level:
          program_.declare_level(d.pred, d.level);
          dirty_ = true;
          break;
        case Directive::Kind::Table:
          program_.declare_table(d.pred, d.mode);
          dirty_ = true;
          break;
        case Directive::Kind::Include: {
          fs::path p = fs::path(d.path).is_absolute() ? fs::path(d.path) : fs::path(base_dir) / d.path;
          if (!load_file(p.string())) return false;
          break;
        }
        default:
          pending_.push_back(d);
      }
    } catch (const LogicError& e) {
      err_ << "error: " << where(d.loc) << e.what() << "\n";
      return false;
    }
  }
  return true;
}

bool Session::finalize() {
  if (!dirty_) return true;
  try {
    program_.finalize();
  } catch (const LogicError& e) {
    err_ << "error: " << e.what() << "\n";
    return false;
  }
  for (const auto& w : program_.warnings()) err_ << "warning: " << w << "\n";
  state_.tables.clear();
  dirty_ = false;
  return true;
}

int Session::run_pending() {
  int code = kExitOk;
  std::vector<Directive> todo;
  todo.swap(pending_);
  for (const auto& d : todo) code = worst(code, run_directive(d));
  return code;
}

int Session::run_directive(const Directive& d) {
  switch (d.kind) {
    case Directive::Kind::Assert:
    case Directive::Kind::AssertNot: {
      const bool positive = d.kind == Directive::Kind::Assert;
      SolveResult r = solve(state_, close_query(d.query), 1);
      out_ << where(d.loc) << (positive ? "assert " : "assert_not ") << print_query(d.query) << " ... ";
      if (r.outcome == Outcome::Inconclusive) {
        out_ << "INCONCLUSIVE: " << r.error << "\n";
        return kExitInconclusive;
      }
      const bool proved = r.outcome == Outcome::Proved;
      if (proved == positive) {
        out_ << "ok\n";
        return kExitOk;
      }
      out_ << "FAILED (" << (proved ? "proved" : "disproved") << ")\n";
      return kExitFailed;
    }
    case Directive::Kind::ClearTables:
      state_.tables.clear();
      return kExitOk;
    case Directive::Kind::ShowTable:
      show_table(d.pred);
      return kExitOk;
    case Directive::Kind::Include:
      if (!load_file(d.path) || !finalize()) return kExitInconclusive;
      return run_pending();
    case Directive::Kind::Level:
    case Directive::Kind::Table:
      try {
        if (d.kind == Directive::Kind::Level)
          program_.declare_level(d.pred, d.level);
        else
          program_.declare_table(d.pred, d.mode);
      } catch (const LogicError& e) {
        err_ << "error: " << e.what() << "\n";
        return kExitInconclusive;
      }
      dirty_ = true;
      return finalize() ? kExitOk : kExitInconclusive;
  }
  return kExitOk;
}

void Session::show_table(Symbol pred) {
  const Table* t = state_.tables.find(pred);
  auto lines = export_table(state_, pred);
  if (!t || lines.empty()) {
    out_ << "table " << symbol_name(pred) << ": empty\n";
    return;
  }
  out_ << "table " << symbol_name(pred) << " (" << (t->mode == TableMode::Coinductive ? "coinductive" : "inductive")
       << "):\n";
  for (const auto& l : lines) out_ << "  " << l << "\n";
}

int Session::run_query(const Query& q, std::size_t max_answers) {
  out_ << "?- " << print_query(q) << ".\n";
  SolveResult r = solve(state_, close_query(q), max_answers);
  for (const auto& a : r.answers)
    if (!a.empty()) out_ << "   " << answer_line(a) << "\n";
  switch (r.outcome) {
    case Outcome::Proved:
      if (!r.error.empty()) err_ << "note: search for further answers stopped: " << r.error << "\n";
      out_ << "proved.\n";
      return kExitOk;
    case Outcome::Disproved:
      out_ << "disproved.\n";
      return kExitFailed;
    case Outcome::Inconclusive:
      out_ << "inconclusive: " << r.error << "\n";
      return kExitInconclusive;
  }
  return kExitOk;
}

int Session::run_query_text(const std::string& text, std::size_t max_answers) {
  Query q;
  try {
    q = parse_query(text, "<query>");
  } catch (const SyntaxError& e) {
    out_ << "?- " << trim(text) << "\n";
    out_ << "inconclusive: syntax error: " << e.what() << "\n";
    return kExitInconclusive;
  }
  return run_query(q, max_answers);
}

void Session::repl(std::istream& in, bool prompt) {
  std::string buffer;
  std::string line;
  auto show_prompt = [&] {
    if (prompt) out_ << (buffer.empty() ? "?- " : "|  ") << std::flush;
  };
  show_prompt();
  while (std::getline(in, line)) {
    buffer += strip_comment(line) + "\n";
    std::string stmt = trim(buffer);
    if (stmt.empty()) {
      buffer.clear();
      show_prompt();
      continue;
    }
    if (stmt.back() != '.') {
      show_prompt();
      continue;
    }
    buffer.clear();
    if (stmt[0] == '#') {
      try {
        SourceFile f = parse_file(stmt, "<input>");
        for (const auto& decl : f.declarations) {
          if (const auto* d = std::get_if<Directive>(&decl)) {
            if (d->kind == Directive::Kind::Include) {
              if (load_file(d->path) && finalize()) run_pending();
            } else {
              run_directive(*d);
            }
          }
        }
      } catch (const SyntaxError& e) {
        err_ << "error: " << e.what() << "\n";
      }
      show_prompt();
      continue;
    }

    try {
      Query q = parse_query(stmt, "<input>");
      Formula goal = close_query(q);
      classify(goal, program_);
      state_.table_stack.clear();
      state_.provisional.clear();
      state_.min_dependency = SIZE_MAX;
      state_.nesting = 0;
      AnswerStream stream(state_, goal);
      bool any = false;
      while (true) {
        std::optional<Snapshot> snap;
        run_with_large_stack([&] { snap = stream.next(); });
        if (!snap) {
          out_ << (any ? "no more answers.\n" : "no.\n");
          break;
        }
        any = true;
        std::vector<std::pair<std::string, std::string>> printed;
        for (const auto& [name, value] : *snap) printed.emplace_back(name, print_term(value));
        if (printed.empty()) {
          out_ << "yes.\n";
          break;
        }
        out_ << answer_line(printed) << (prompt ? " ? " : "\n") << std::flush;
        std::string reply;
        if (!std::getline(in, reply) || trim(reply) != ";") {
          if (prompt) out_ << "\n";
          out_ << "yes.\n";
          break;
        }
      }
    } catch (const SyntaxError& e) {
      err_ << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
      auto d = describe_error(e);
      err_ << "error: " << (d ? *d : std::string(e.what())) << "\n";
    }
    show_prompt();
  }
  if (prompt) out_ << "\n";
}

int run_batch(const SessionConfig& cfg, std::ostream& out, std::ostream& err) {
  Session s(out, err, cfg.limits);
  s.set_trace(cfg.trace);
  for (const auto& f : cfg.files)
    if (!s.load_file(f)) return kExitInconclusive;
  if (!s.finalize()) return kExitInconclusive;
  int code = s.run_pending();
  for (const auto& q : cfg.queries) code = worst(code, s.run_query_text(q, cfg.max_answers));
  for (const auto& p : cfg.show_tables) s.show_table(intern(p));
  return code;
}

}  // namespace nabla
