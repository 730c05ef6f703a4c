#include "nabla/term.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace nabla {

namespace {

struct SymbolTable {
  std::deque<std::string> names;
  std::unordered_map<std::string_view, Symbol> index;

  SymbolTable() {
    names.emplace_back();
    index.emplace(names.back(), 0);
  }
};

SymbolTable& symbols() {
  static SymbolTable table;
  return table;
}

}  // namespace

Symbol intern(std::string_view name) {
  auto& table = symbols();
  if (auto it = table.index.find(name); it != table.index.end()) return it->second;
  table.names.emplace_back(name);
  auto sym = static_cast<Symbol>(table.names.size() - 1);
  table.index.emplace(table.names.back(), sym);
  return sym;
}

const std::string& symbol_name(Symbol sym) { return symbols().names.at(sym); }

// ---------------------------------------------------------------------------
// Construction

Term Term::constant(Symbol sym) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->sym = sym;
  return Term(std::move(n));
}

Term Term::bound(std::uint32_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Bound;
  n->index = index;
  n->loose = index + 1;
  return Term(std::move(n));
}

Term Term::nabla(std::uint32_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Nabla;
  n->index = index;
  return Term(std::move(n));
}

Term Term::var(std::shared_ptr<VarCell> cell) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->cell = std::move(cell);
  return Term(std::move(n));
}

Term Term::lam(Term body, Symbol hint) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Lam;
  n->sym = hint;
  n->loose = body.loose() > 0 ? body.loose() - 1 : 0;
  n->children.push_back(std::move(body));
  return Term(std::move(n));
}

Term Term::app(Term head, std::vector<Term> args) {
  if (args.empty()) return head;
  auto n = std::make_shared<Node>();
  n->kind = Kind::App;
  if (head.is(Kind::App)) {
    n->children.assign(head.node_->children.begin(), head.node_->children.end());
  } else {
    n->children.push_back(std::move(head));
  }
  for (auto& a : args) n->children.push_back(std::move(a));
  for (const auto& c : n->children) n->loose = std::max(n->loose, c.loose());
  return Term(std::move(n));
}

Term fresh_var(Signature& sig, VarKind kind, std::string name) {
  auto t = fresh_var_at(sig, kind, sig.next_global, sig.nabla_depth, std::move(name));
  ++sig.next_global;
  return t;
}

Term fresh_var_at(Signature& sig, VarKind kind, std::uint32_t global, std::uint32_t local,
                  std::string name) {
  auto cell = std::make_shared<VarCell>();
  cell->id = ++sig.fresh_counter;
  cell->kind = kind;
  cell->global = global;
  cell->local = local;
  cell->name = std::move(name);
  return Term::var(std::move(cell));
}

// ---------------------------------------------------------------------------
// Index manipulation

Term deref(Term t) {
  while (t.is(Term::Kind::Var) && t.cell().bound()) t = t.cell().binding;
  return t;
}

namespace {

template <typename F>
Term rebuild_app(const Term& t, F&& f) {
  Term head = f(t.head());
  bool changed = head.identity() != t.head().identity();
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) {
    args.push_back(f(a));
    changed = changed || args.back().identity() != a.identity();
  }
  if (!changed) return t;
  return Term::app(std::move(head), std::move(args));
}

}  // namespace

Term shift(const Term& t, std::int32_t amount, std::uint32_t cutoff) {
  if (amount == 0 || t.loose() <= cutoff) return t;
  switch (t.kind()) {
    case Term::Kind::Bound:
      return Term::bound(static_cast<std::uint32_t>(static_cast<std::int64_t>(t.index()) + amount));
    case Term::Kind::Lam:
      return Term::lam(shift(t.body(), amount, cutoff + 1), t.lam_hint());
    case Term::Kind::App:
      return rebuild_app(t, [&](const Term& c) { return shift(c, amount, cutoff); });
    default:
      return t;
  }
}

Term instantiate(const Term& t, std::span<const Term> values, std::uint32_t start) {
  if (values.empty() || t.loose() <= start) return t;
  switch (t.kind()) {
    case Term::Kind::Bound: {
      std::uint32_t i = t.index();
      if (i < start) return t;
      if (i - start < values.size()) return shift(values[i - start], static_cast<std::int32_t>(start));
      return Term::bound(i - static_cast<std::uint32_t>(values.size()));
    }
    case Term::Kind::Lam:
      return Term::lam(instantiate(t.body(), values, start + 1), t.lam_hint());
    case Term::Kind::App:
      return rebuild_app(t, [&](const Term& c) { return instantiate(c, values, start); });
    default:
      return t;
  }
}

// ---------------------------------------------------------------------------
// Reduction

void Reducer::tick(const Term& offending) {
  if (++steps_ > budget_) throw NormalizationDepthExceeded(offending, budget_);
}

Term Reducer::head_normalize(Term t) {
  for (;;) {
    switch (t.kind()) {
      case Term::Kind::Var:
        if (!t.cell().bound()) return t;
        t = t.cell().binding;
        continue;
      case Term::Kind::App: {
        Term h = deref(t.head());
        if (h.is(Term::Kind::App)) {
          std::vector<Term> args(h.args().begin(), h.args().end());
          args.insert(args.end(), t.args().begin(), t.args().end());
          t = Term::app(h.head(), std::move(args));
          continue;
        }
        if (h.is(Term::Kind::Lam)) {
          tick(t);
          auto args = t.args();
          Term reduced = instantiate(h.body(), args.subspan(0, 1));
          t = Term::app(std::move(reduced), std::vector<Term>(args.begin() + 1, args.end()));
          continue;
        }
        if (h.identity() != t.head().identity()) {
          return Term::app(std::move(h), std::vector<Term>(t.args().begin(), t.args().end()));
        }
        return t;
      }
      default:
        return t;
    }
  }
}

Term Reducer::normalize(const Term& t) {
  Term h = head_normalize(t);
  switch (h.kind()) {
    case Term::Kind::Lam: {
      Term body = normalize(h.body());
      if (body.identity() == h.body().identity()) return h;
      return Term::lam(std::move(body), h.lam_hint());
    }
    case Term::Kind::App: {
      std::vector<Term> args;
      args.reserve(h.args().size());
      bool changed = false;
      for (const auto& a : h.args()) {
        args.push_back(normalize(a));
        changed = changed || args.back().identity() != a.identity();
      }
      if (!changed) return h;
      return Term::app(h.head(), std::move(args));
    }
    default:
      return h;
  }
}

Term normalize(const Term& t, std::size_t budget) {
  Reducer r(budget);
  return r.normalize(t);
}

namespace {

bool has_index(const Term& t, std::uint32_t k) {
  if (t.loose() <= k) return false;
  switch (t.kind()) {
    case Term::Kind::Bound:
      return t.index() == k;
    case Term::Kind::Lam:
      return has_index(t.body(), k + 1);
    case Term::Kind::App:
      if (has_index(t.head(), k)) return true;
      for (const auto& a : t.args())
        if (has_index(a, k)) return true;
      return false;
    default:
      return false;
  }
}

}  // namespace

Term eta_contract(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Lam: {
      Term body = eta_contract(t.body());
      if (body.is(Term::Kind::App)) {
        auto args = body.args();
        const Term& last = args.back();
        if (last.is(Term::Kind::Bound) && last.index() == 0) {
          Term rest = Term::app(body.head(), std::vector<Term>(args.begin(), args.end() - 1));
          if (!has_index(rest, 0)) return shift(rest, -1);
        }
      }
      if (body.identity() == t.body().identity()) return t;
      return Term::lam(std::move(body), t.lam_hint());
    }
    case Term::Kind::App:
      return rebuild_app(t, [](const Term& c) { return eta_contract(c); });
    default:
      return t;
  }
}

bool structurally_equal(const Term& x, const Term& y) {
  Term a = deref(x);
  Term b = deref(y);
  if (a.identity() == b.identity()) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Const:
      return a.symbol() == b.symbol();
    case Term::Kind::Bound:
    case Term::Kind::Nabla:
      return a.index() == b.index();
    case Term::Kind::Var:
      return a.cell_ptr() == b.cell_ptr();
    case Term::Kind::Lam:
      return structurally_equal(a.body(), b.body());
    case Term::Kind::App: {
      if (a.args().size() != b.args().size()) return false;
      if (!structurally_equal(a.head(), b.head())) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!structurally_equal(a.args()[i], b.args()[i])) return false;
      return true;
    }
  }
  return false;
}

namespace {

Term eta_expand(const Term& t) { return Term::app(shift(t, 1), {Term::bound(0)}); }

bool equal_normal(const Term& a, const Term& b) {
  bool la = a.is(Term::Kind::Lam);
  bool lb = b.is(Term::Kind::Lam);
  if (la && lb) return equal_normal(a.body(), b.body());
  if (la) return equal_normal(a.body(), eta_expand(b));
  if (lb) return equal_normal(eta_expand(a), b.body());
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Const:
      return a.symbol() == b.symbol();
    case Term::Kind::Bound:
    case Term::Kind::Nabla:
      return a.index() == b.index();
    case Term::Kind::Var:
      return a.cell_ptr() == b.cell_ptr();
    case Term::Kind::App: {
      if (a.args().size() != b.args().size()) return false;
      if (!equal_normal(a.head(), b.head())) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!equal_normal(a.args()[i], b.args()[i])) return false;
      return true;
    }
    default:
      return false;
  }
}

}  // namespace

bool equal_modulo(const Term& t, const Term& s, std::size_t budget) {
  Reducer r(budget);
  return equal_normal(r.normalize(t), r.normalize(s));
}

namespace {

Term abstract_nabla_at(const Term& x, std::uint32_t k, std::uint32_t depth) {
  Term t = deref(x);
  switch (t.kind()) {
    case Term::Kind::Nabla:
      return t.index() == k ? Term::bound(depth) : t;
    case Term::Kind::Bound:
      return t.index() >= depth ? Term::bound(t.index() + 1) : t;
    case Term::Kind::Lam:
      return Term::lam(abstract_nabla_at(t.body(), k, depth + 1), t.lam_hint());
    case Term::Kind::App:
      return rebuild_app(t, [&](const Term& c) { return abstract_nabla_at(c, k, depth); });
    default:
      return t;
  }
}

}  // namespace

Term abstract_over_nabla(const Term& t, std::uint32_t k) {
  return Term::lam(abstract_nabla_at(t, k, 0));
}

bool occurs_nabla(const Term& x, std::uint32_t k) {
  Term t = deref(x);
  switch (t.kind()) {
    case Term::Kind::Nabla:
      return t.index() == k;
    case Term::Kind::Lam:
      return occurs_nabla(t.body(), k);
    case Term::Kind::App:
      if (occurs_nabla(t.head(), k)) return true;
      for (const auto& a : t.args())
        if (occurs_nabla(a, k)) return true;
      return false;
    default:
      return false;
  }
}

bool has_unbound_var(const Term& x, VarKind kind) {
  Term t = deref(x);
  switch (t.kind()) {
    case Term::Kind::Var:
      return t.cell().kind == kind;
    case Term::Kind::Lam:
      return has_unbound_var(t.body(), kind);
    case Term::Kind::App:
      if (has_unbound_var(t.head(), kind)) return true;
      for (const auto& a : t.args())
        if (has_unbound_var(a, kind)) return true;
      return false;
    default:
      return false;
  }
}

}  // namespace nabla
