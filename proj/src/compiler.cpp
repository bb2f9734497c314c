#include "mongolog/compiler.hpp"

#include <algorithm>

namespace mongolog {

namespace {

Path var_field(const std::string& name) { return CompileContext::vars_root() / name; }

std::vector<LookupVar> vars_spec() {
  return {LookupVar{"vars", ValueDef::path_ref(CompileContext::vars_root())}};
}

Stage rebind_from(const Path& p) {
  return Stage::project(
      {ProjectItem::set(CompileContext::vars_root(), ValueDef::path_ref(p / "vars"))});
}

Stage match_true() { return Stage::match(BoolExpr::truth()); }

Stage match_false() {
  return Stage::match(BoolExpr::eq(ValueDef::constant(Value(std::int64_t(0))),
                                   ValueDef::constant(Value(std::int64_t(1)))));
}

BoolExpr empty_at(const Path& p) {
  return BoolExpr::eq(ValueDef::path_ref(p), ValueDef::constant(Value(ValueArray{})));
}

void append(Pipeline& dst, Pipeline src) {
  for (Stage& s : src) dst.push_back(std::move(s));
}

std::string predicate_name(const Term& t) {
  return t.is_compound() || t.is_atom() ? t.symbol() : "";
}

std::size_t predicate_arity(const Term& t) { return t.is_compound() ? t.arity() : 0; }

// The per-variable binding projection for a term read back from `from`.
std::vector<ProjectItem> term_bindings(const Term& t, const Path& from) {
  std::vector<ProjectItem> items;
  items.push_back(ProjectItem::keep(CompileContext::vars_root()));
  for (const auto& [name, key] : vars_of(t))
    items.push_back(ProjectItem::set(var_field(name), ValueDef::binding(from, key)));
  return items;
}

// A variable occurring several times in one call constrains the fact to hold
// equal subterms at every occurrence key.
std::vector<BoolExpr> repeat_constraints(const Term& t) {
  std::map<std::string, std::vector<std::string>> keys_by_name;
  for (const FlatElem& e : flatten(t, Path::root(), Path::root(), Tree{}))
    if (e.name) keys_by_name[*e.name].push_back(e.key);
  std::vector<BoolExpr> out;
  for (const auto& [name, keys] : keys_by_name)
    for (std::size_t i = 1; i < keys.size(); ++i)
      out.push_back(BoolExpr::eq(ValueDef::subterm(Path::root(), keys[i]),
                                 ValueDef::subterm(Path::root(), keys[0])));
  return out;
}

Pipeline translate_edb_call(const Term& t, CompileContext& ctx) {
  std::string coll = Database::fact_collection_name(predicate_name(t), predicate_arity(t));
  Path p = ctx.fresh_temp();
  BoolExpr criterion = BoolExpr::subset_eq(
      ValueDef::term_expr(t, CompileContext::vars_root(), BoolExpr::exists(Path::parse("v"))),
      ValueDef::fact(Path::root()));
  std::vector<BoolExpr> repeats = repeat_constraints(t);
  if (!repeats.empty()) {
    repeats.insert(repeats.begin(), std::move(criterion));
    criterion = BoolExpr::and_(std::move(repeats));
  }
  Pipeline inner;
  inner.push_back(Stage::match(std::move(criterion)));
  inner.push_back(Stage::project(term_bindings(t, Path::root())));
  Pipeline out;
  out.push_back(Stage::lookup(p, vars_spec(), CollRef::named(coll), std::move(inner)));
  out.push_back(Stage::unwind(p));
  out.push_back(rebind_from(p));
  return out;
}

Goal substitute(const Goal& g, const std::map<std::string, Term>& subst);

Term substitute(const Term& t, const std::map<std::string, Term>& subst) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = subst.find(t.symbol());
      return it == subst.end() ? t : it->second;
    }
    case Term::Kind::Compound: {
      std::vector<Term> args;
      for (const Term& a : t.args()) args.push_back(substitute(a, subst));
      return Term::compound(t.symbol(), std::move(args));
    }
    default: return t;
  }
}

Goal substitute(const Goal& g, const std::map<std::string, Term>& subst) {
  Goal out = g;
  out.t1 = substitute(g.t1, subst);
  out.t2 = substitute(g.t2, subst);
  out.children.clear();
  for (const Goal& c : g.children) out.children.push_back(substitute(c, subst));
  return out;
}

Term freshen(const Term& t, const std::string& prefix) {
  switch (t.kind()) {
    case Term::Kind::Var: return Term::var(prefix + t.symbol());
    case Term::Kind::Compound: {
      std::vector<Term> args;
      for (const Term& a : t.args()) args.push_back(freshen(a, prefix));
      return Term::compound(t.symbol(), std::move(args));
    }
    default: return t;
  }
}

Goal freshen(const Goal& g, const std::string& prefix) {
  Goal out = g;
  out.t1 = freshen(g.t1, prefix);
  out.t2 = freshen(g.t2, prefix);
  out.children.clear();
  for (const Goal& c : g.children) out.children.push_back(freshen(c, prefix));
  return out;
}

// One clause expansion: substitute call arguments for head variables on their
// first occurrence and unify the rest explicitly.
Goal expand_clause(const Clause& clause, const std::vector<Term>& args, CompileContext& ctx) {
  std::string prefix = ctx.fresh_expansion_prefix();
  Term head = freshen(clause.head, prefix);
  Goal body = freshen(clause.body, prefix);

  std::map<std::string, Term> subst;
  std::vector<std::size_t> unify_positions;
  std::vector<Term> head_args(head.is_compound() ? head.args() : std::vector<Term>{});
  for (std::size_t i = 0; i < head_args.size(); ++i) {
    Term h = substitute(head_args[i], subst);
    if (h.is_var() && h.symbol().rfind(prefix, 0) == 0 && !subst.count(h.symbol())) {
      subst.emplace(h.symbol(), args[i]);
    } else {
      unify_positions.push_back(i);
    }
  }

  std::vector<Goal> parts;
  for (std::size_t i : unify_positions)
    parts.push_back(Goal::unify(args[i], substitute(head_args[i], subst)));
  Goal expanded = substitute(body, subst);
  if (parts.empty()) return expanded;
  if (expanded.kind != Goal::Kind::True) parts.push_back(std::move(expanded));
  if (parts.size() == 1) return parts[0];
  return Goal::conj(std::move(parts));
}

Pipeline translate_idb_call(const Term& t, CompileContext& ctx) {
  std::vector<const Clause*> clauses =
      ctx.program().clauses_for(predicate_name(t), predicate_arity(t));
  std::vector<Term> args = t.is_compound() ? t.args() : std::vector<Term>{};
  std::vector<Goal> branches;
  for (const Clause* c : clauses) branches.push_back(expand_clause(*c, args, ctx));
  if (branches.size() == 1) return translate(branches[0], ctx);
  return translate(Goal::disj(std::move(branches)), ctx);
}

Pipeline translate_call(const Term& t, CompileContext& ctx) {
  std::string name = predicate_name(t);
  std::size_t arity = predicate_arity(t);
  if (name.empty()) throw compile_error("goal term has no constant functor");
  if (ctx.program().has_clauses(name, arity)) return translate_idb_call(t, ctx);
  if (ctx.is_edb(name, arity)) return translate_edb_call(t, ctx);
  throw compile_error("unknown predicate " + name + "/" + std::to_string(arity));
}

Pipeline translate_limit(const Goal& inner_goal, std::int64_t k, CompileContext& ctx) {
  Path p = ctx.fresh_temp();
  Pipeline inner = translate(inner_goal, ctx);
  inner.push_back(Stage::limit(k));
  Pipeline out;
  out.push_back(Stage::lookup(p, vars_spec(), CollRef::one(), std::move(inner)));
  out.push_back(Stage::unwind(p));
  out.push_back(rebind_from(p));
  return out;
}

Pipeline translate_ignore(const Goal& inner_goal, CompileContext& ctx) {
  Path p = ctx.fresh_temp();
  Pipeline out;
  out.push_back(Stage::lookup(p, vars_spec(), CollRef::one(), translate(inner_goal, ctx)));
  out.push_back(Stage::unwind_preserve(p));
  out.push_back(Stage::project({ProjectItem::set(
      CompileContext::vars_root(),
      ValueDef::cond(BoolExpr::exists(p / "vars"), ValueDef::path_ref(p / "vars"),
                     ValueDef::path_ref(CompileContext::vars_root())))}));
  return out;
}

Pipeline translate_neg(const Goal& inner_goal, CompileContext& ctx) {
  Path p = ctx.fresh_temp();
  Pipeline inner = translate(inner_goal, ctx);
  inner.push_back(Stage::limit(1));
  Pipeline out;
  out.push_back(Stage::lookup(p, vars_spec(), CollRef::one(), std::move(inner)));
  out.push_back(Stage::match(empty_at(p)));
  return out;
}

// Shared by if-then and if-then-else: evaluate the committed condition
// solution, then the then-branch under its bindings.
void append_conditional_core(const Goal& cond, const Goal& then_goal, const Path& p_i,
                             const Path& p_t, Pipeline& out, CompileContext& ctx) {
  Pipeline cond_inner = translate(cond, ctx);
  cond_inner.push_back(Stage::limit(1));
  out.push_back(Stage::lookup(p_i, vars_spec(), CollRef::one(), std::move(cond_inner)));

  Pipeline then_inner;
  then_inner.push_back(Stage::unwind(p_i));
  then_inner.push_back(Stage::project(
      {ProjectItem::keep(Path::root()),
       ProjectItem::set(CompileContext::vars_root(), ValueDef::path_ref(p_i / "vars"))}));
  append(then_inner, translate(then_goal, ctx));
  std::vector<LookupVar> spec = vars_spec();
  spec.push_back(LookupVar{p_i.str(), ValueDef::path_ref(p_i)});
  out.push_back(Stage::lookup(p_t, std::move(spec), CollRef::one(), std::move(then_inner)));
}

Pipeline translate_if_then(const Goal& cond, const Goal& then_goal, CompileContext& ctx) {
  Path p_i = ctx.fresh_temp();
  Path p_t = ctx.fresh_temp();
  Pipeline out;
  append_conditional_core(cond, then_goal, p_i, p_t, out, ctx);
  out.push_back(Stage::unwind(p_t));
  out.push_back(rebind_from(p_t));
  return out;
}

Pipeline translate_if_then_else(const Goal& cond, const Goal& then_goal, const Goal& else_goal,
                                CompileContext& ctx) {
  Path p_i = ctx.fresh_temp();
  Path p_t = ctx.fresh_temp();
  Path p_e = ctx.fresh_temp();
  Pipeline out;
  append_conditional_core(cond, then_goal, p_i, p_t, out, ctx);

  Pipeline else_inner;
  else_inner.push_back(Stage::match(empty_at(p_i)));
  append(else_inner, translate(else_goal, ctx));
  std::vector<LookupVar> spec = vars_spec();
  spec.push_back(LookupVar{p_i.str(), ValueDef::path_ref(p_i)});
  out.push_back(Stage::lookup(p_e, std::move(spec), CollRef::one(), std::move(else_inner)));

  out.push_back(Stage::unwind_preserve(p_t));
  out.push_back(Stage::unwind_preserve(p_e));
  out.push_back(Stage::match(
      BoolExpr::or_({BoolExpr::not_(empty_at(p_t)), BoolExpr::not_(empty_at(p_e))})));
  out.push_back(Stage::project({ProjectItem::set(
      CompileContext::vars_root(),
      ValueDef::cond(BoolExpr::exists(p_t / "vars"), ValueDef::path_ref(p_t / "vars"),
                     ValueDef::path_ref(p_e / "vars")))}));
  return out;
}

Pipeline translate_unify(const Term& t1, const Term& t2, CompileContext& ctx) {
  Path p_1 = ctx.fresh_temp();
  Path p_2 = ctx.fresh_temp();
  Pipeline out;
  out.push_back(Stage::project(
      {ProjectItem::keep(CompileContext::vars_root()),
       ProjectItem::set(p_1, ValueDef::term_expr(t1, CompileContext::vars_root(),
                                                 BoolExpr::truth())),
       ProjectItem::set(p_2, ValueDef::term_expr(t2, CompileContext::vars_root(),
                                                 BoolExpr::truth()))}));
  out.push_back(Stage::project({ProjectItem::keep(CompileContext::vars_root()),
                                ProjectItem::set(p_1, ValueDef::instantiate(p_1, p_2)),
                                ProjectItem::set(p_2, ValueDef::instantiate(p_2, p_1))}));
  out.push_back(Stage::match(BoolExpr::eq(ValueDef::path_ref(p_1), ValueDef::path_ref(p_2))));

  std::vector<ProjectItem> items;
  items.push_back(ProjectItem::keep(CompileContext::vars_root()));
  std::set<std::string> seen;
  for (const Term* t : {&t1, &t2})
    for (const auto& [name, key] : vars_of(*t))
      if (seen.insert(name).second)
        items.push_back(ProjectItem::set(var_field(name), ValueDef::binding(p_1, key)));
  out.push_back(Stage::project(std::move(items)));
  return out;
}

Pipeline translate_type_check(const Goal& g, CompileContext& ctx) {
  (void)ctx;
  switch (g.kind) {
    case Goal::Kind::VarG:
      if (g.t1.is_var())
        return {Stage::match(BoolExpr::not_(BoolExpr::exists(var_field(g.t1.symbol()))))};
      return {match_false()};
    case Goal::Kind::NonvarG:
      if (g.t1.is_var()) return {Stage::match(BoolExpr::exists(var_field(g.t1.symbol())))};
      return {match_true()};
    case Goal::Kind::GroundG:
      if (g.t1.is_ground()) return {match_true()};
      return {Stage::match(BoolExpr::eq(
          ValueDef::term_expr(g.t1, CompileContext::vars_root(),
                              BoolExpr::not_(BoolExpr::exists(Path::parse("v")))),
          ValueDef::constant(Value(ValueArray{}))))};
    default: throw compile_error("not a type-check goal");
  }
}

Pipeline translate_disj(const std::vector<Goal>& branches, CompileContext& ctx) {
  Pipeline out;
  std::vector<Path> parts;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    Path p_k = ctx.fresh_temp();
    Pipeline inner = translate(branches[i], ctx);
    inner.push_back(Stage::project(
        {ProjectItem::keep(CompileContext::vars_root()),
         ProjectItem::set(Path::parse("p_i"), ValueDef::constant(Value(std::int64_t(i + 1))))}));
    out.push_back(Stage::lookup(p_k, vars_spec(), CollRef::one(), std::move(inner)));
    parts.push_back(p_k);
  }
  Path all = ctx.fresh_temp();
  std::vector<ValueDef> elems;
  for (const Path& p : parts) elems.push_back(ValueDef::path_ref(p));
  out.push_back(Stage::project({ProjectItem::keep(CompileContext::vars_root()),
                                ProjectItem::set(all, ValueDef::array(std::move(elems)))}));
  out.push_back(Stage::unwind(all));
  out.push_back(Stage::unwind(all));
  out.push_back(Stage::sort({SortEntry{all / "p_i", SortDirection::Ascending}}));
  out.push_back(rebind_from(all));
  return out;
}

Pipeline translate_transitive(const Goal& g, CompileContext& ctx) {
  if (!ctx.is_edb(g.pred, 2) || ctx.program().has_clauses(g.pred, 2))
    throw compile_error("transitive closure needs a binary stored predicate, got " + g.pred);
  for (const Term* t : {&g.t1, &g.t2})
    if (t->is_compound())
      throw compile_error("transitive closure arguments must be constants or variables");
  CollRef source = CollRef::named(Database::fact_collection_name(g.pred, 2));

  Pipeline out;
  ValueDef start = ValueDef::constant(Value());
  if (g.t1.is_var()) {
    const std::string& x = g.t1.symbol();
    Path p_1 = ctx.fresh_temp();
    Pipeline inner;
    inner.push_back(Stage::match(BoolExpr::not_(BoolExpr::exists(var_field(x)))));
    inner.push_back(Stage::project({ProjectItem::keep(CompileContext::vars_root()),
                                    ProjectItem::set(var_field(x),
                                                     ValueDef::path_ref(Path::parse("1")))}));
    out.push_back(Stage::lookup(p_1, vars_spec(), source, std::move(inner)));
    out.push_back(Stage::unwind_preserve(p_1));
    out.push_back(Stage::project(
        {ProjectItem::keep(CompileContext::vars_root()),
         ProjectItem::set(var_field(x),
                          ValueDef::cond(BoolExpr::exists(p_1 / "vars" / x),
                                         ValueDef::path_ref(p_1 / "vars" / x),
                                         ValueDef::path_ref(var_field(x))))}));
    start = ValueDef::path_ref(var_field(x));
  } else {
    start = ValueDef::constant(g.t1.constant_value());
  }

  Path p = ctx.fresh_temp();
  Path p_d = ctx.fresh_temp();
  out.push_back(Stage::graph_lookup(p, source, {start}, Path::parse("1"), Path::parse("2"),
                                    BoolExpr::truth(), p_d));
  out.push_back(Stage::unwind(p));

  if (g.t2.is_var()) {
    const std::string& y = g.t2.symbol();
    out.push_back(Stage::match(
        BoolExpr::or_({BoolExpr::not_(BoolExpr::exists(var_field(y))),
                       BoolExpr::eq(ValueDef::path_ref(p / "2"),
                                    ValueDef::path_ref(var_field(y)))})));
    out.push_back(Stage::project({ProjectItem::keep(CompileContext::vars_root()),
                                  ProjectItem::set(var_field(y),
                                                   ValueDef::path_ref(p / "2"))}));
  } else {
    out.push_back(Stage::match(BoolExpr::eq(ValueDef::path_ref(p / "2"),
                                            ValueDef::constant(g.t2.constant_value()))));
    out.push_back(Stage::project({ProjectItem::keep(CompileContext::vars_root())}));
  }
  return out;
}

}  // namespace

Pipeline translate(const Goal& goal, CompileContext& ctx) {
  switch (goal.kind) {
    case Goal::Kind::True: return {match_true()};
    case Goal::Kind::False: return {match_false()};
    case Goal::Kind::Call: return translate_call(goal.t1, ctx);
    case Goal::Kind::Conj: {
      Pipeline out;
      for (const Goal& g : goal.children) append(out, translate(g, ctx));
      return out;
    }
    case Goal::Kind::Disj: return translate_disj(goal.children, ctx);
    case Goal::Kind::IfThen: return translate_if_then(goal.children[0], goal.children[1], ctx);
    case Goal::Kind::IfThenElse:
      return translate_if_then_else(goal.children[0], goal.children[1], goal.children[2], ctx);
    case Goal::Kind::Neg: return translate_neg(goal.children[0], ctx);
    case Goal::Kind::LimitG: return translate_limit(goal.children[0], goal.k, ctx);
    case Goal::Kind::Once: return translate_limit(goal.children[0], 1, ctx);
    case Goal::Kind::Ignore: return translate_ignore(goal.children[0], ctx);
    case Goal::Kind::Unify: return translate_unify(goal.t1, goal.t2, ctx);
    case Goal::Kind::EqG:
      return {Stage::match(BoolExpr::eq(
          ValueDef::term_expr(goal.t1, CompileContext::vars_root(), BoolExpr::truth()),
          ValueDef::term_expr(goal.t2, CompileContext::vars_root(), BoolExpr::truth())))};
    case Goal::Kind::NeqG:
      return {Stage::match(BoolExpr::not_(BoolExpr::eq(
          ValueDef::term_expr(goal.t1, CompileContext::vars_root(), BoolExpr::truth()),
          ValueDef::term_expr(goal.t2, CompileContext::vars_root(), BoolExpr::truth()))))};
    case Goal::Kind::VarG:
    case Goal::Kind::NonvarG:
    case Goal::Kind::GroundG: return translate_type_check(goal, ctx);
    case Goal::Kind::Transitive: return translate_transitive(goal, ctx);
  }
  throw compile_error("unhandled goal kind");
}

Term instantiate_goal(const Goal& goal, const Tree& tree) {
  Value flat = eval_term_expr(goal_to_term(goal), CompileContext::vars_root(), BoolExpr::truth(),
                              tree);
  FlatTerm elems;
  for (const Value& e : flat.as_array()) {
    auto elem = flat_elem_from_value(e);
    if (elem) elems.push_back(std::move(*elem));
  }
  return unflatten(elems);
}

std::vector<Solution> solutions_from_forest(const Goal& query, const Forest& forest) {
  std::vector<std::pair<std::string, std::string>> vars = goal_vars(query);
  std::vector<const Goal*> conjuncts;
  if (query.kind == Goal::Kind::Conj)
    for (const Goal& g : query.children) conjuncts.push_back(&g);
  else
    conjuncts.push_back(&query);

  std::vector<Solution> out;
  for (const Tree& g : forest) {
    Solution s;
    for (const auto& [name, key] : vars) {
      (void)key;
      if (!name.empty() && name[0] == '_') continue;
      Value bound = subtree(g, CompileContext::vars_root() / name);
      if (bound.is_undefined()) continue;
      s.bindings.emplace(name, term_from_binding(bound));
    }
    for (const Goal* c : conjuncts) s.instantiated.push_back(instantiate_goal(*c, g));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Solution> solve(const Goal& query, const Program& program, const Database& db) {
  CompileContext ctx(program, db);
  SourcedPipeline p = compile(query, ctx);
  Forest result = run_pipeline(p, db);
  return solutions_from_forest(query, result);
}

}  // namespace mongolog
