#include "mongolog/stage.hpp"

namespace mongolog {

ValueDef ValueDef::constant(Value v) {
  ValueDef d;
  d.kind_ = Kind::Const;
  d.value_ = std::move(v);
  return d;
}

ValueDef ValueDef::path_ref(Path p) {
  ValueDef d;
  d.kind_ = Kind::PathRef;
  d.path_ = std::move(p);
  return d;
}

ValueDef ValueDef::array(std::vector<ValueDef> elems) {
  ValueDef d;
  d.kind_ = Kind::Array;
  d.elems_ = std::move(elems);
  return d;
}

ValueDef ValueDef::boolean(BoolExpr e) {
  ValueDef d;
  d.kind_ = Kind::Bool;
  d.bool_ = std::make_shared<BoolExpr>(std::move(e));
  return d;
}

ValueDef ValueDef::cond(BoolExpr c, ValueDef then_def, ValueDef else_def) {
  ValueDef d;
  d.kind_ = Kind::Cond;
  d.bool_ = std::make_shared<BoolExpr>(std::move(c));
  d.elems_.push_back(std::move(then_def));
  d.elems_.push_back(std::move(else_def));
  return d;
}

ValueDef ValueDef::sort_key(SortDirection dir, Path p) {
  ValueDef d;
  d.kind_ = Kind::SortKeyOf;
  d.dir_ = dir;
  d.path_ = std::move(p);
  return d;
}

ValueDef ValueDef::term_expr(Term t, Path var_root, BoolExpr filter) {
  ValueDef d;
  d.kind_ = Kind::TermExpr;
  d.term_ = std::move(t);
  d.path_ = std::move(var_root);
  d.bool_ = std::make_shared<BoolExpr>(std::move(filter));
  return d;
}

ValueDef ValueDef::fact(Path p) {
  ValueDef d;
  d.kind_ = Kind::Fact;
  d.path_ = std::move(p);
  return d;
}

ValueDef ValueDef::subterm(Path p, std::string key) {
  ValueDef d;
  d.kind_ = Kind::Subterm;
  d.path_ = std::move(p);
  d.key_ = std::move(key);
  return d;
}

ValueDef ValueDef::binding(Path p, std::string key) {
  ValueDef d;
  d.kind_ = Kind::Binding;
  d.path_ = std::move(p);
  d.key_ = std::move(key);
  return d;
}

ValueDef ValueDef::instantiate(Path p1, Path p2) {
  ValueDef d;
  d.kind_ = Kind::Instantiate;
  d.path_ = std::move(p1);
  d.path2_ = std::move(p2);
  return d;
}

ValueDef ValueDef::filter(Path p, BoolExpr criterion) {
  ValueDef d;
  d.kind_ = Kind::Filter;
  d.path_ = std::move(p);
  d.bool_ = std::make_shared<BoolExpr>(std::move(criterion));
  return d;
}

bool operator==(const ValueDef& a, const ValueDef& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case ValueDef::Kind::Const: return a.value_ == b.value_;
    case ValueDef::Kind::PathRef: return a.path_ == b.path_;
    case ValueDef::Kind::Array: return a.elems_ == b.elems_;
    case ValueDef::Kind::Bool: return *a.bool_ == *b.bool_;
    case ValueDef::Kind::Cond: return *a.bool_ == *b.bool_ && a.elems_ == b.elems_;
    case ValueDef::Kind::SortKeyOf: return a.path_ == b.path_ && a.dir_ == b.dir_;
    case ValueDef::Kind::TermExpr:
      return a.term_ == b.term_ && a.path_ == b.path_ && *a.bool_ == *b.bool_;
    case ValueDef::Kind::Fact: return a.path_ == b.path_;
    case ValueDef::Kind::Subterm:
    case ValueDef::Kind::Binding: return a.path_ == b.path_ && a.key_ == b.key_;
    case ValueDef::Kind::Instantiate: return a.path_ == b.path_ && a.path2_ == b.path2_;
    case ValueDef::Kind::Filter: return a.path_ == b.path_ && *a.bool_ == *b.bool_;
  }
  return false;
}

BoolExpr BoolExpr::and_(std::vector<BoolExpr> args) {
  BoolExpr e;
  e.kind_ = Kind::And;
  e.args_ = std::move(args);
  return e;
}

BoolExpr BoolExpr::or_(std::vector<BoolExpr> args) {
  BoolExpr e;
  e.kind_ = Kind::Or;
  e.args_ = std::move(args);
  return e;
}

BoolExpr BoolExpr::not_(BoolExpr arg) {
  BoolExpr e;
  e.kind_ = Kind::Not;
  e.args_.push_back(std::move(arg));
  return e;
}

BoolExpr BoolExpr::eq(ValueDef lhs, ValueDef rhs) {
  BoolExpr e;
  e.kind_ = Kind::Eq;
  e.defs_.push_back(std::move(lhs));
  e.defs_.push_back(std::move(rhs));
  return e;
}

BoolExpr BoolExpr::subset_eq(ValueDef lhs, ValueDef rhs) {
  BoolExpr e;
  e.kind_ = Kind::SubsetEq;
  e.defs_.push_back(std::move(lhs));
  e.defs_.push_back(std::move(rhs));
  return e;
}

BoolExpr BoolExpr::exists(Path p) {
  BoolExpr e;
  e.kind_ = Kind::Exists;
  e.path_ = std::move(p);
  return e;
}

BoolExpr BoolExpr::truth() {
  return eq(ValueDef::constant(Value(std::int64_t(1))), ValueDef::constant(Value(std::int64_t(1))));
}

bool BoolExpr::is_truth() const { return *this == truth(); }

bool operator==(const BoolExpr& a, const BoolExpr& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or:
    case BoolExpr::Kind::Not: return a.args_ == b.args_;
    case BoolExpr::Kind::Eq:
    case BoolExpr::Kind::SubsetEq: return a.defs_ == b.defs_;
    case BoolExpr::Kind::Exists: return a.path_ == b.path_;
  }
  return false;
}

Stage Stage::match(BoolExpr criterion) {
  Stage s;
  s.kind_ = Kind::Match;
  s.criterion_ = std::make_shared<BoolExpr>(std::move(criterion));
  return s;
}

Stage Stage::unwind(Path p) {
  Stage s;
  s.kind_ = Kind::Unwind;
  s.path_ = std::move(p);
  return s;
}

Stage Stage::unwind_preserve(Path p) {
  Stage s;
  s.kind_ = Kind::UnwindPreserve;
  s.path_ = std::move(p);
  return s;
}

Stage Stage::project(std::vector<ProjectItem> items) {
  Stage s;
  s.kind_ = Kind::Project;
  s.items_ = std::move(items);
  return s;
}

Stage Stage::sort(std::vector<SortEntry> entries) {
  Stage s;
  s.kind_ = Kind::Sort;
  s.sort_entries_ = std::move(entries);
  return s;
}

Stage Stage::limit(std::int64_t count) {
  Stage s;
  s.kind_ = Kind::Limit;
  s.count_ = count;
  return s;
}

Stage Stage::lookup(Path as, std::vector<LookupVar> vars, CollRef source, Pipeline inner) {
  Stage s;
  s.kind_ = Kind::Lookup;
  s.path_ = std::move(as);
  s.lookup_vars_ = std::move(vars);
  s.source_ = std::move(source);
  s.inner_ = std::move(inner);
  return s;
}

Stage Stage::graph_lookup(Path as, CollRef source, std::vector<ValueDef> starts, Path connect_to,
                          Path connect_from, BoolExpr criterion, std::optional<Path> depth_field,
                          std::optional<std::int64_t> max_depth) {
  Stage s;
  s.kind_ = Kind::GraphLookup;
  s.path_ = std::move(as);
  s.source_ = std::move(source);
  s.starts_ = std::move(starts);
  s.connect_to_ = std::move(connect_to);
  s.connect_from_ = std::move(connect_from);
  s.criterion_ = std::make_shared<BoolExpr>(std::move(criterion));
  s.depth_field_ = std::move(depth_field);
  s.max_depth_ = max_depth;
  return s;
}

bool operator==(const Stage& a, const Stage& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Stage::Kind::Match: return *a.criterion_ == *b.criterion_;
    case Stage::Kind::Unwind:
    case Stage::Kind::UnwindPreserve: return a.path_ == b.path_;
    case Stage::Kind::Project: return a.items_ == b.items_;
    case Stage::Kind::Sort: return a.sort_entries_ == b.sort_entries_;
    case Stage::Kind::Limit: return a.count_ == b.count_;
    case Stage::Kind::Lookup:
      return a.path_ == b.path_ && a.lookup_vars_ == b.lookup_vars_ && a.source_ == b.source_ &&
             a.inner_ == b.inner_;
    case Stage::Kind::GraphLookup:
      return a.path_ == b.path_ && a.source_ == b.source_ && a.starts_ == b.starts_ &&
             a.connect_to_ == b.connect_to_ && a.connect_from_ == b.connect_from_ &&
             *a.criterion_ == *b.criterion_ && a.depth_field_ == b.depth_field_ &&
             a.max_depth_ == b.max_depth_;
  }
  return false;
}

}  // namespace mongolog
