#include <algorithm>

#include "nabla/engine.hpp"
#include "nabla/parser.hpp"

namespace nabla {

Table& TableSet::table(Symbol pred, TableMode mode) {
  auto [it, inserted] = tables_.try_emplace(pred);
  if (inserted) it->second.mode = mode;
  return it->second;
}

const Table* TableSet::find(Symbol pred) const {
  auto it = tables_.find(pred);
  return it == tables_.end() ? nullptr : &it->second;
}

namespace {

// Binder names only matter for printing; drop them so α-variants print alike.
Term erase_hints(const Term& x) {
  Term t = deref(x);
  switch (t.kind()) {
    case Term::Kind::Lam:
      return Term::lam(erase_hints(t.body()));
    case Term::Kind::App: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(erase_hints(a));
      return Term::app(erase_hints(t.head()), std::move(args));
    }
    default:
      return t;
  }
}

bool loop_consistent(const TableEntry& e, TableMode mode) {
  return !e.assumed || (e.status == EntryStatus::Proved) == (mode == TableMode::Coinductive);
}

}  // namespace

bool eligible(const Formula& atom, int level, std::size_t reduction_budget) {
  for (const auto& a : atom.args()) {
    Term t = normalize(a, reduction_budget);
    if (has_unbound_var(t, VarKind::Logic)) return false;
    if (level == 0 && has_unbound_var(t, VarKind::Eigen)) return false;
  }
  return true;
}

std::string canonical_key(const Formula& atom, std::size_t reduction_budget) {
  std::string key = symbol_name(atom.pred());
  for (const auto& a : atom.args()) {
    Term t = erase_hints(eta_contract(normalize(a, reduction_budget)));
    std::string s = print_term(t);
    bool simple = std::all_of(s.begin(), s.end(), [](char c) { return c != ' '; });
    key += simple ? " " + s : " (" + s + ")";
  }
  return key;
}

// Loops: an in-progress goal met again fails (inductive) or succeeds
// (coinductive). Results that rest on such an assumption stay provisional
// until the goal that was assumed completes; if its outcome contradicts the
// assumption, the provisional results are discarded.
bool tabled_prove(ProverState& st, const Goal& goal) {
  const Symbol pred = goal.formula.pred();
  const Definition& d = st.program->get(pred);
  Table& tab = st.tables.table(pred, d.table_mode);
  const std::string key = canonical_key(goal.formula, st.limits.reduction_budget);

  if (auto it = tab.entries.find(key); it != tab.entries.end()) {
    TableEntry& e = it->second;
    if (e.status == EntryStatus::InProgress) {
      e.assumed = true;
      st.min_dependency = std::min(st.min_dependency, e.stack_index);
      return tab.mode == TableMode::Coinductive;
    }
    if (e.provisional) st.min_dependency = std::min(st.min_dependency, e.dependency);
    return e.status == EntryStatus::Proved;
  }

  const std::size_t index = st.table_stack.size();
  tab.entries[key] = TableEntry{EntryStatus::InProgress, false, false, index, index};
  st.table_stack.push_back({pred, key});
  const std::size_t saved_dependency = st.min_dependency;
  const std::size_t provisional_base = st.provisional.size();
  st.min_dependency = SIZE_MAX;

  auto discard_provisional = [&] {
    for (std::size_t i = provisional_base; i < st.provisional.size(); ++i) {
      const auto& p = st.provisional[i];
      st.tables.table(p.pred, TableMode::None).entries.erase(p.key);
    }
    st.provisional.resize(provisional_base);
  };

  bool result;
  try {
    Goal sub = goal;
    sub.skip_table = true;
    result = provable(st, sub);
  } catch (...) {
    discard_provisional();
    tab.entries.erase(key);
    st.table_stack.pop_back();
    st.min_dependency = saved_dependency;
    throw;
  }
  st.table_stack.pop_back();

  const std::size_t dependency = st.min_dependency;
  TableEntry& e = tab.entries[key];
  e.status = result ? EntryStatus::Proved : EntryStatus::Disproved;
  if (dependency < index) {
    e.provisional = true;
    e.dependency = dependency;
    st.provisional.push_back({pred, key});
    st.min_dependency = std::min(saved_dependency, dependency);
    return result;
  }

  bool consistent = loop_consistent(e, tab.mode);
  for (std::size_t i = provisional_base; consistent && i < st.provisional.size(); ++i) {
    const auto& p = st.provisional[i];
    const Table& t = st.tables.table(p.pred, TableMode::None);
    consistent = loop_consistent(t.entries.at(p.key), t.mode);
  }
  if (consistent) {
    for (std::size_t i = provisional_base; i < st.provisional.size(); ++i) {
      const auto& p = st.provisional[i];
      st.tables.table(p.pred, TableMode::None).entries.at(p.key).provisional = false;
    }
    st.provisional.resize(provisional_base);
  } else {
    discard_provisional();
  }
  e.provisional = false;
  st.min_dependency = saved_dependency;
  return result;
}

std::vector<std::string> export_table(const ProverState& st, Symbol pred, bool include_disproved) {
  std::vector<std::string> lines;
  const Table* t = st.tables.find(pred);
  if (!t) return lines;
  for (const auto& [key, e] : t->entries) {
    if (e.provisional) continue;
    if (e.status == EntryStatus::Proved) lines.push_back("proved " + key + ".");
    if (e.status == EntryStatus::Disproved && include_disproved) lines.push_back("disproved " + key + ".");
  }
  std::sort(lines.begin(), lines.end());
  return lines;
}

}  // namespace nabla
