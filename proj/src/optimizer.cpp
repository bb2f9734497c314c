#include "mongolog/optimizer.hpp"

#include <algorithm>

namespace mongolog {

namespace {

bool both_ground(const Term& a, const Term& b) { return a.is_ground() && b.is_ground(); }

Goal fold_unify(const Term& a, const Term& b) {
  if (both_ground(a, b))
    return unify_simplified(a, b, Tree{}) ? Goal::truth() : Goal::falsity();
  if (!unifiable(a, b)) return Goal::falsity();
  return Goal::unify(a, b);
}

Goal fold_eq(const Term& a, const Term& b) {
  if (a == b) return Goal::truth();
  if (both_ground(a, b)) return Goal::falsity();
  return Goal::eq(a, b);
}

Goal fold_neq(const Term& a, const Term& b) {
  if (a == b) return Goal::falsity();
  if (both_ground(a, b)) return Goal::truth();
  return Goal::neq(a, b);
}

bool is_true(const Goal& g) { return g.kind == Goal::Kind::True; }
bool is_false(const Goal& g) { return g.kind == Goal::Kind::False; }

}  // namespace

Goal eliminate_predicates(const Goal& goal) {
  switch (goal.kind) {
    case Goal::Kind::Conj: {
      std::vector<Goal> kept;
      for (const Goal& c : goal.children) {
        Goal folded = eliminate_predicates(c);
        if (is_false(folded)) return Goal::falsity();
        if (is_true(folded)) continue;
        kept.push_back(std::move(folded));
      }
      if (kept.empty()) return Goal::truth();
      if (kept.size() == 1) return kept[0];
      return Goal::conj(std::move(kept));
    }
    case Goal::Kind::Disj: {
      std::vector<Goal> kept;
      for (const Goal& c : goal.children) {
        Goal folded = eliminate_predicates(c);
        if (is_false(folded)) continue;
        kept.push_back(std::move(folded));
      }
      if (kept.empty()) return Goal::falsity();
      if (kept.size() == 1) return kept[0];
      return Goal::disj(std::move(kept));
    }
    case Goal::Kind::IfThen: {
      Goal cond = eliminate_predicates(goal.children[0]);
      Goal then_g = eliminate_predicates(goal.children[1]);
      if (is_true(cond)) return then_g;
      if (is_false(cond)) return Goal::falsity();
      return Goal::if_then(std::move(cond), std::move(then_g));
    }
    case Goal::Kind::IfThenElse: {
      Goal cond = eliminate_predicates(goal.children[0]);
      Goal then_g = eliminate_predicates(goal.children[1]);
      Goal else_g = eliminate_predicates(goal.children[2]);
      if (is_true(cond)) return then_g;
      if (is_false(cond)) return else_g;
      return Goal::if_then_else(std::move(cond), std::move(then_g), std::move(else_g));
    }
    case Goal::Kind::Neg: {
      Goal inner = eliminate_predicates(goal.children[0]);
      if (is_true(inner)) return Goal::falsity();
      if (is_false(inner)) return Goal::truth();
      return Goal::neg(std::move(inner));
    }
    case Goal::Kind::LimitG: {
      if (goal.k == 0) return Goal::falsity();
      Goal inner = eliminate_predicates(goal.children[0]);
      if (is_true(inner) || is_false(inner)) return inner;
      return Goal::limit(std::move(inner), goal.k);
    }
    case Goal::Kind::Once: {
      Goal inner = eliminate_predicates(goal.children[0]);
      if (is_true(inner) || is_false(inner)) return inner;
      return Goal::once(std::move(inner));
    }
    case Goal::Kind::Ignore: {
      Goal inner = eliminate_predicates(goal.children[0]);
      if (is_true(inner) || is_false(inner)) return Goal::truth();
      return Goal::ignore(std::move(inner));
    }
    case Goal::Kind::Unify: return fold_unify(goal.t1, goal.t2);
    case Goal::Kind::EqG: return fold_eq(goal.t1, goal.t2);
    case Goal::Kind::NeqG: return fold_neq(goal.t1, goal.t2);
    case Goal::Kind::VarG: return goal.t1.is_var() ? goal : Goal::falsity();
    case Goal::Kind::NonvarG: return goal.t1.is_var() ? goal : Goal::truth();
    case Goal::Kind::GroundG: return goal.t1.is_ground() ? Goal::truth() : goal;
    default: return goal;
  }
}

namespace {

Stage live_projection(const LiveVarSet& live) {
  std::vector<ProjectItem> items;
  for (const std::string& name : live) {
    Path p = CompileContext::vars_root() / name;
    items.push_back(ProjectItem::set(p, ValueDef::path_ref(p)));
  }
  return Stage::project(std::move(items));
}

}  // namespace

Pipeline reduce_pv(const Goal& goal, const LiveVarSet& live, CompileContext& ctx) {
  std::vector<const Goal*> conjuncts;
  if (goal.kind == Goal::Kind::Conj)
    for (const Goal& g : goal.children) conjuncts.push_back(&g);
  else
    conjuncts.push_back(&goal);

  Pipeline out;
  LiveVarSet seen = live;
  for (const Goal* g : conjuncts) {
    for (const auto& [name, key] : goal_vars(*g)) {
      (void)key;
      seen.insert(name);
    }
    Pipeline stages = translate(*g, ctx);
    for (Stage& s : stages) out.push_back(std::move(s));
    out.push_back(live_projection(seen));
  }
  out.push_back(live_projection(live));
  return out;
}

namespace {

bool is_vars_spec(const std::vector<LookupVar>& vars) {
  return vars.size() == 1 && vars[0].name == "vars" &&
         vars[0].def == ValueDef::path_ref(CompileContext::vars_root());
}

bool is_rebind_project(const Stage& s, const Path& from) {
  if (s.kind() != Stage::Kind::Project) return false;
  const auto& items = s.items();
  return items.size() == 1 && items[0].kind == ProjectItem::Kind::Set &&
         items[0].target == CompileContext::vars_root() &&
         *items[0].def == ValueDef::path_ref(from / "vars");
}

// A stage that leaves every field of the input document in place.
bool preserves_fields(const Stage& s) {
  if (s.kind() == Stage::Kind::Match) return true;
  if (s.kind() != Stage::Kind::Project) return false;
  return !s.items().empty() && s.items()[0].kind == ProjectItem::Kind::Keep &&
         s.items()[0].target.empty();
}

bool splice_front(SourcedPipeline& sp) {
  if (!sp.source.is_one) return false;
  std::size_t i = 0;
  while (i < sp.stages.size() && preserves_fields(sp.stages[i])) ++i;
  if (i + 2 >= sp.stages.size()) return false;
  const Stage& l = sp.stages[i];
  if (l.kind() != Stage::Kind::Lookup || !is_vars_spec(l.lookup_vars())) return false;
  const Stage& u = sp.stages[i + 1];
  if (u.kind() != Stage::Kind::Unwind || u.path() != l.path()) return false;
  if (!is_rebind_project(sp.stages[i + 2], l.path())) return false;

  Pipeline next(sp.stages.begin(), sp.stages.begin() + i);
  for (const Stage& s : l.inner()) next.push_back(s);
  next.insert(next.end(), sp.stages.begin() + i + 3, sp.stages.end());
  sp.source = l.source();
  sp.stages = std::move(next);
  return true;
}

}  // namespace

SourcedPipeline eliminate_lookup(const SourcedPipeline& p) {
  SourcedPipeline sp = p;
  while (splice_front(sp)) {
  }
  for (Stage& s : sp.stages) {
    if (s.kind() != Stage::Kind::Lookup) continue;
    SourcedPipeline inner = eliminate_lookup(SourcedPipeline{s.source(), s.inner()});
    s = Stage::lookup(s.path(), s.lookup_vars(), inner.source, std::move(inner.stages));
  }
  return sp;
}

namespace {

bool refers_to(const ValueDef& d, const std::string& head);

bool refers_to(const BoolExpr& b, const std::string& head) {
  switch (b.kind()) {
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or:
    case BoolExpr::Kind::Not:
      return std::any_of(b.args().begin(), b.args().end(),
                         [&](const BoolExpr& a) { return refers_to(a, head); });
    case BoolExpr::Kind::Eq:
    case BoolExpr::Kind::SubsetEq: return refers_to(b.lhs(), head) || refers_to(b.rhs(), head);
    case BoolExpr::Kind::Exists: return !b.path().empty() && b.path().segments()[0] == head;
  }
  return false;
}

bool refers_to(const ValueDef& d, const std::string& head) {
  switch (d.kind()) {
    case ValueDef::Kind::PathRef:
    case ValueDef::Kind::Fact:
    case ValueDef::Kind::Subterm:
    case ValueDef::Kind::Binding:
    case ValueDef::Kind::SortKeyOf:
    case ValueDef::Kind::Filter:
      if (!d.path().empty() && d.path().segments()[0] == head) return true;
      break;
    case ValueDef::Kind::Instantiate:
      if (!d.path().empty() && d.path().segments()[0] == head) return true;
      if (!d.second_path().empty() && d.second_path().segments()[0] == head) return true;
      break;
    default: break;
  }
  if (d.kind() == ValueDef::Kind::Filter || d.kind() == ValueDef::Kind::Bool)
    return refers_to(d.bool_expr(), head);
  if (d.kind() == ValueDef::Kind::Cond)
    return refers_to(d.bool_expr(), head) || refers_to(d.then_def(), head) ||
           refers_to(d.else_def(), head);
  if (d.kind() == ValueDef::Kind::Array)
    return std::any_of(d.elements().begin(), d.elements().end(),
                       [&](const ValueDef& e) { return refers_to(e, head); });
  return false;
}

bool single_match_inner(const Stage& lookup) {
  return lookup.inner().size() == 1 && lookup.inner()[0].kind() == Stage::Kind::Match;
}

Pipeline merge_lookups_impl(const Pipeline& p, std::size_t& counter) {
  Pipeline out;
  std::size_t i = 0;
  while (i < p.size()) {
    bool merged = false;
    if (i + 1 < p.size() && p[i].kind() == Stage::Kind::Lookup &&
        p[i + 1].kind() == Stage::Kind::Lookup) {
      const Stage& a = p[i];
      const Stage& b = p[i + 1];
      std::string a_head = a.path().segments()[0];
      bool b_uses_a = std::any_of(b.lookup_vars().begin(), b.lookup_vars().end(),
                                  [&](const LookupVar& v) { return refers_to(v.def, a_head); });
      if (a.source() == b.source() && a.lookup_vars() == b.lookup_vars() &&
          single_match_inner(a) && single_match_inner(b) && a.path() != b.path() && !b_uses_a) {
        const BoolExpr& c1 = a.inner()[0].criterion();
        const BoolExpr& c2 = b.inner()[0].criterion();
        Path tmp = Path::parse("m" + std::to_string(++counter));
        Pipeline inner;
        inner.push_back(Stage::match(BoolExpr::or_({c1, c2})));
        out.push_back(Stage::lookup(tmp, a.lookup_vars(), a.source(), std::move(inner)));
        out.push_back(Stage::project({ProjectItem::keep(Path::root()),
                                      ProjectItem::set(a.path(), ValueDef::filter(tmp, c1)),
                                      ProjectItem::set(b.path(), ValueDef::filter(tmp, c2))}));
        i += 2;
        merged = true;
      }
    }
    if (!merged) {
      Stage s = p[i];
      if (s.kind() == Stage::Kind::Lookup)
        s = Stage::lookup(s.path(), s.lookup_vars(), s.source(),
                          merge_lookups_impl(s.inner(), counter));
      out.push_back(std::move(s));
      ++i;
    }
  }
  return out;
}

}  // namespace

Pipeline merge_lookups(const Pipeline& p) {
  std::size_t counter = 0;
  return merge_lookups_impl(p, counter);
}

SourcedPipeline optimize(const Goal& query, int level, CompileContext& ctx) {
  if (level <= 0) return compile(query, ctx);
  Goal folded = eliminate_predicates(query);
  SourcedPipeline sp;
  if (level == 1) {
    sp = compile(folded, ctx);
  } else {
    LiveVarSet live;
    for (const auto& [name, key] : goal_vars(query)) {
      (void)key;
      live.insert(name);
    }
    sp = SourcedPipeline{CollRef::one(), reduce_pv(folded, live, ctx)};
  }
  sp = eliminate_lookup(sp);
  if (level >= 2) sp.stages = merge_lookups(sp.stages);
  return sp;
}

}  // namespace mongolog
