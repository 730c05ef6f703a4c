#include "nabla/unify.hpp"

#include <algorithm>

namespace nabla {

void Trail::bind(VarCell& cell, Term value) {
  cell.binding = std::move(value);
  log_.push_back(cell.shared_from_this());
}

void Trail::undo_to(Mark m) {
  while (log_.size() > m) {
    log_.back()->binding = Term();
    log_.pop_back();
  }
}

namespace {

bool is_flexible(const VarCell& v, Flex flex) { return !v.bound() && v.kind == instantiable_kind(flex); }

/// The unbound instantiable variable heading `t`, if any. `t` must be in
/// head-normal form.
VarCell* flex_head(const Term& t, Flex flex) {
  const Term& h = t.is(Term::Kind::App) ? t.head() : t;
  if (h.is(Term::Kind::Var) && is_flexible(h.cell(), flex)) return &h.cell();
  return nullptr;
}

std::span<const Term> spine_args(const Term& t) {
  return t.is(Term::Kind::App) ? t.args() : std::span<const Term>();
}

bool same_atom(const Term& a, const Term& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Bound:
    case Term::Kind::Nabla:
      return a.index() == b.index();
    case Term::Kind::Var:
      return a.cell_ptr() == b.cell_ptr();
    default:
      return false;
  }
}

std::optional<std::vector<Term>> pattern_atoms(const VarCell& v, std::span<const Term> args, Flex flex,
                                               Reducer& reducer) {
  std::vector<Term> atoms;
  atoms.reserve(args.size());
  for (const auto& a : args) {
    Term n = eta_contract(reducer.normalize(a));
    switch (n.kind()) {
      case Term::Kind::Bound:
        break;
      case Term::Kind::Nabla:
        if (n.index() < v.local) return std::nullopt;
        break;
      case Term::Kind::Var:
        if (is_flexible(n.cell(), flex) || n.cell().global <= v.global) return std::nullopt;
        break;
      default:
        return std::nullopt;
    }
    for (const auto& prev : atoms)
      if (same_atom(prev, n)) return std::nullopt;
    atoms.push_back(std::move(n));
  }
  return atoms;
}

Term wrap_lams(Term body, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) body = Term::lam(std::move(body));
  return body;
}

Term eta_expand(const Term& t) { return Term::app(shift(t, 1), {Term::bound(0)}); }

}  // namespace

void Unifier::bind(VarCell& v, Term value) { trail_.bind(v, std::move(value)); }

void Unifier::not_pattern(const Term& a, const Term& b) {
  nonpattern_ = NonPatternProblem{a, b};
  throw Abort{UnifyResult::NonPattern};
}

UnifyResult Unifier::unify(const Term& a, const Term& b) {
  nonpattern_.reset();
  auto mark = trail_.mark();
  try {
    solve(a, b);
    return UnifyResult::Success;
  } catch (const Abort& e) {
    trail_.undo_to(mark);
    return e.result;
  } catch (...) {
    trail_.undo_to(mark);
    throw;
  }
}

std::optional<std::vector<Term>> Unifier::pattern_args(const VarCell& v, std::span<const Term> args) {
  return pattern_atoms(v, args, flex_, reducer_);
}

void Unifier::solve(Term a, Term b) {
  a = reducer_.head_normalize(std::move(a));
  b = reducer_.head_normalize(std::move(b));
  bool la = a.is(Term::Kind::Lam);
  bool lb = b.is(Term::Kind::Lam);
  if (la && lb) return solve(a.body(), b.body());
  if (la) return solve(a.body(), eta_expand(b));
  if (lb) return solve(eta_expand(a), b.body());

  VarCell* fa = flex_head(a, flex_);
  VarCell* fb = flex_head(b, flex_);
  if (fa && fb) return flex_flex(a, b);
  if (fa) return flex_rigid(a, b);
  if (fb) return flex_rigid(b, a);

  const Term& ha = a.is(Term::Kind::App) ? a.head() : a;
  const Term& hb = b.is(Term::Kind::App) ? b.head() : b;
  if (ha.kind() != hb.kind()) fail();
  switch (ha.kind()) {
    case Term::Kind::Const:
      if (ha.symbol() != hb.symbol()) fail();
      break;
    case Term::Kind::Bound:
    case Term::Kind::Nabla:
      if (ha.index() != hb.index()) fail();
      break;
    case Term::Kind::Var:
      if (ha.cell_ptr() != hb.cell_ptr()) fail();
      break;
    default:
      fail();
  }
  auto xs = spine_args(a);
  auto ys = spine_args(b);
  if (xs.size() != ys.size()) fail();
  for (std::size_t i = 0; i < xs.size(); ++i) solve(xs[i], ys[i]);
}

void Unifier::flex_rigid(const Term& flex, const Term& rigid) {
  problem_lhs_ = flex;
  problem_rhs_ = rigid;
  VarCell& f = *flex_head(flex, flex_);
  auto pargs = pattern_args(f, spine_args(flex));
  if (!pargs) not_pattern(flex, rigid);
  Term body = invert(rigid, f, *pargs, 0);
  bind(f, wrap_lams(std::move(body), pargs->size()));
}

void Unifier::flex_flex(const Term& a, const Term& b) {
  problem_lhs_ = a;
  problem_rhs_ = b;
  VarCell& f = *flex_head(a, flex_);
  VarCell& g = *flex_head(b, flex_);
  auto xs = spine_args(a);
  auto ys = spine_args(b);

  if (&f == &g) {
    if (xs.size() != ys.size()) fail();
    auto pa = pattern_args(f, xs);
    auto pb = pattern_args(f, ys);
    if (!pa || !pb) {
      bool identical = true;
      for (std::size_t i = 0; i < xs.size() && identical; ++i)
        identical = structurally_equal(reducer_.normalize(xs[i]), reducer_.normalize(ys[i]));
      if (identical) return;
      not_pattern(a, b);
    }
    const std::size_t n = xs.size();
    std::vector<Term> kept;
    for (std::size_t i = 0; i < n; ++i)
      if (same_atom((*pa)[i], (*pb)[i])) kept.push_back(Term::bound(static_cast<std::uint32_t>(n - 1 - i)));
    if (kept.size() == n) return;
    Term pruned = fresh_var_at(sig_, f.kind, f.global, f.local, f.name);
    bind(f, wrap_lams(Term::app(pruned, std::move(kept)), n));
    return;
  }

  if (xs.empty() && ys.empty()) {
    if (g.global >= f.global && g.local >= f.local) return bind(g, a);
    if (f.global >= g.global && f.local >= g.local) return bind(f, b);
  }
  if (auto pa = pattern_args(f, xs)) {
    Term body = invert(b, f, *pa, 0);
    return bind(f, wrap_lams(std::move(body), pa->size()));
  }
  if (auto pb = pattern_args(g, ys)) {
    Term body = invert(a, g, *pb, 0);
    return bind(g, wrap_lams(std::move(body), pb->size()));
  }
  not_pattern(a, b);
}

// Maps an atomic term (index, ∇-index or rigid variable) occurring at λ-depth
// `depth` inside the inverted term into the scope of the target's solution.
std::optional<Term> Unifier::try_invert(const Term& t, const VarCell& target, const std::vector<Term>& pargs,
                                        std::uint32_t depth) {
  const auto n = static_cast<std::uint32_t>(pargs.size());
  auto position = [&](auto&& match) -> std::optional<Term> {
    for (std::uint32_t p = 0; p < n; ++p)
      if (match(pargs[p])) return Term::bound(n - 1 - p + depth);
    return std::nullopt;
  };
  switch (t.kind()) {
    case Term::Kind::Const:
      return t;
    case Term::Kind::Bound: {
      if (t.index() < depth) return t;
      std::uint32_t j = t.index() - depth;
      return position([&](const Term& p) { return p.is(Term::Kind::Bound) && p.index() == j; });
    }
    case Term::Kind::Nabla: {
      if (auto m = position([&](const Term& p) { return p.is(Term::Kind::Nabla) && p.index() == t.index(); }))
        return m;
      if (t.index() < target.local) return t;
      return std::nullopt;
    }
    case Term::Kind::Var: {
      if (auto m = position([&](const Term& p) { return p.is(Term::Kind::Var) && p.cell_ptr() == t.cell_ptr(); }))
        return m;
      if (t.cell().global < target.global) return t;
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

Term Unifier::invert(const Term& x, const VarCell& target, const std::vector<Term>& pargs, std::uint32_t depth) {
  Term t = reducer_.head_normalize(x);
  switch (t.kind()) {
    case Term::Kind::Lam:
      return Term::lam(invert(t.body(), target, pargs, depth + 1), t.lam_hint());
    case Term::Kind::Var:
      if (is_flexible(t.cell(), flex_)) return invert_flex(t, target, pargs, depth);
      [[fallthrough]];
    case Term::Kind::Const:
    case Term::Kind::Bound:
    case Term::Kind::Nabla: {
      auto m = try_invert(t, target, pargs, depth);
      if (!m) fail();
      return *m;
    }
    case Term::Kind::App: {
      const Term& h = t.head();
      if (h.is(Term::Kind::Var) && is_flexible(h.cell(), flex_)) return invert_flex(t, target, pargs, depth);
      auto head = try_invert(h, target, pargs, depth);
      if (!head) fail();
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(invert(a, target, pargs, depth));
      return Term::app(std::move(*head), std::move(args));
    }
  }
  fail();
}

Term Unifier::invert_flex(const Term& t, const VarCell& target, const std::vector<Term>& pargs,
                          std::uint32_t depth) {
  const Term& head = t.is(Term::Kind::App) ? t.head() : t;
  VarCell& h = head.cell();
  if (&h == &target) fail();  // occurs check

  auto args = spine_args(t);
  const auto m = static_cast<std::uint32_t>(args.size());
  const std::uint32_t low_global = std::min(h.global, target.global);
  const std::uint32_t low_local = std::min(h.local, target.local);
  const bool lower = low_global < h.global || low_local < h.local;

  std::vector<Term> inner;  // arguments of the replacement, under h's λs
  std::vector<Term> outer;  // the same arguments, in the target's scope
  if (auto atoms = pattern_args(h, args)) {
    for (std::uint32_t p = 0; p < m; ++p) {
      if (auto mapped = try_invert((*atoms)[p], target, pargs, depth)) {
        inner.push_back(Term::bound(m - 1 - p));
        outer.push_back(std::move(*mapped));
      }
    }
  } else {
    for (std::uint32_t p = 0; p < m; ++p) {
      try {
        outer.push_back(invert(args[p], target, pargs, depth));
      } catch (const Abort&) {
        not_pattern(problem_lhs_, problem_rhs_);
      }
      inner.push_back(Term::bound(m - 1 - p));
    }
  }
  if (!lower && inner.size() == m) return Term::app(head, std::move(outer));

  // Raise the replacement over what h could see and the lowered one cannot.
  const auto n = static_cast<std::uint32_t>(pargs.size());
  for (std::uint32_t q = 0; q < n; ++q) {
    const Term& p = pargs[q];
    bool extra = false;
    if (p.is(Term::Kind::Nabla)) {
      extra = p.index() < h.local && p.index() >= low_local;
    } else if (p.is(Term::Kind::Var)) {
      extra = p.cell().global < h.global && p.cell().global >= low_global;
    }
    if (extra) {
      inner.push_back(p);
      outer.push_back(Term::bound(n - 1 - q + depth));
    }
  }
  Term replacement = fresh_var_at(sig_, h.kind, low_global, low_local, h.name);
  bind(h, wrap_lams(Term::app(replacement, std::move(inner)), m));
  return Term::app(replacement, std::move(outer));
}

UnifyResult unify(const Term& a, const Term& b, Trail& trail, Signature& sig, Flex flex,
                  std::size_t reduction_budget) {
  Unifier u(trail, sig, flex, reduction_budget);
  return u.unify(a, b);
}

namespace {

bool pattern_walk(const Term& t, Flex flex, Reducer& reducer) {
  switch (t.kind()) {
    case Term::Kind::Lam:
      return pattern_walk(t.body(), flex, reducer);
    case Term::Kind::App: {
      const Term& h = t.head();
      if (h.is(Term::Kind::Var) && is_flexible(h.cell(), flex))
        if (!pattern_atoms(h.cell(), t.args(), flex, reducer)) return false;
      for (const auto& a : t.args())
        if (!pattern_walk(a, flex, reducer)) return false;
      return true;
    }
    default:
      return true;
  }
}

}  // namespace

bool is_pattern(const Term& t, Flex flex) {
  Reducer reducer;
  return pattern_walk(reducer.normalize(t), flex, reducer);
}

}  // namespace nabla
