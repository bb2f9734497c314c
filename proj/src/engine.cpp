#include "mongolog/engine.hpp"

#include <algorithm>
#include <set>

namespace mongolog {

namespace {

Value normalize_flat(const Value& v) {
  if (!is_flat_array(v)) return v;
  ValueArray sorted = v.as_array();
  std::stable_sort(sorted.begin(), sorted.end(), [](const Value& a, const Value& b) {
    return key_less(a.as_object().at("k").as_text(), b.as_object().at("k").as_text());
  });
  return Value(std::move(sorted));
}

ValueArray as_elements(const Value& v) {
  if (v.is_array()) return v.as_array();
  return ValueArray{v};
}

}  // namespace

Value eval_value_def(const ValueDef& d, const Tree& g) {
  switch (d.kind()) {
    case ValueDef::Kind::Const: return d.const_value();
    case ValueDef::Kind::PathRef: return subtree(g, d.path());
    case ValueDef::Kind::Array: {
      ValueArray out;
      for (const ValueDef& e : d.elements()) {
        Value v = eval_value_def(e, g);
        out.push_back(v.is_undefined() ? Value(nullptr) : std::move(v));
      }
      return Value(std::move(out));
    }
    case ValueDef::Kind::Bool: return Value(eval_bool(d.bool_expr(), g));
    case ValueDef::Kind::Cond:
      return eval_bool(d.bool_expr(), g) ? eval_value_def(d.then_def(), g)
                                         : eval_value_def(d.else_def(), g);
    case ValueDef::Kind::SortKeyOf: {
      ValueObject o;
      o.emplace(d.direction() == SortDirection::Ascending ? "+" : "-", subtree(g, d.path()));
      return Value(std::move(o));
    }
    case ValueDef::Kind::TermExpr:
      return eval_term_expr(d.term(), d.path(), d.bool_expr(), g);
    case ValueDef::Kind::Fact: return eval_fact(d.path(), g);
    case ValueDef::Kind::Subterm: return eval_subterm(d.path(), d.key(), g);
    case ValueDef::Kind::Binding: return eval_binding(d.path(), d.key(), g);
    case ValueDef::Kind::Instantiate: return eval_instantiate(d.path(), d.second_path(), g);
    case ValueDef::Kind::Filter: {
      Value arr = subtree(g, d.path());
      if (!arr.is_array()) return Value::undefined();
      ValueArray out;
      for (const Value& elem : arr.as_array())
        if (eval_bool(d.bool_expr(), Tree{elem, {}})) out.push_back(elem);
      return Value(std::move(out));
    }
  }
  return Value::undefined();
}

bool eval_bool(const BoolExpr& b, const Tree& g) {
  switch (b.kind()) {
    case BoolExpr::Kind::And:
      return std::all_of(b.args().begin(), b.args().end(),
                         [&](const BoolExpr& a) { return eval_bool(a, g); });
    case BoolExpr::Kind::Or:
      return std::any_of(b.args().begin(), b.args().end(),
                         [&](const BoolExpr& a) { return eval_bool(a, g); });
    case BoolExpr::Kind::Not: return !eval_bool(b.args()[0], g);
    case BoolExpr::Kind::Eq: {
      Value l = eval_value_def(b.lhs(), g);
      Value r = eval_value_def(b.rhs(), g);
      if (l.is_undefined() || r.is_undefined()) return false;
      return normalize_flat(l) == normalize_flat(r);
    }
    case BoolExpr::Kind::SubsetEq: {
      Value l = eval_value_def(b.lhs(), g);
      Value r = eval_value_def(b.rhs(), g);
      if (l.is_undefined() || r.is_undefined()) return false;
      ValueArray le = as_elements(l);
      ValueArray re = as_elements(r);
      for (const Value& e : le) {
        bool found = std::any_of(re.begin(), re.end(), [&](const Value& x) { return x == e; });
        if (!found) return false;
      }
      return true;
    }
    case BoolExpr::Kind::Exists: return !subtree(g, b.path()).is_undefined();
  }
  return false;
}

const Forest& resolve_source(const CollRef& source, const Database& db) {
  if (source.is_one) return Database::c_one();
  if (!db.has_collection(source.name)) throw eval_error("unknown collection: " + source.name);
  return db.collection(source.name);
}

namespace {

Forest run_match(const Stage& s, const Forest& input) {
  Forest out;
  for (const Tree& g : input)
    if (eval_bool(s.criterion(), g)) out.push_back(g);
  return out;
}

Forest unwind_tree(const Path& p, const Tree& g) {
  Value v = subtree(g, p);
  if (v.is_null() || v.is_undefined()) return {};
  if (!v.is_array()) return {g};
  Forest out;
  for (const Value& elem : v.as_array()) {
    Tree t = g;
    set_at_path(t.root, p, elem);
    out.push_back(std::move(t));
  }
  return out;
}

Forest run_project(const Stage& s, const Forest& input) {
  Forest out;
  for (const Tree& g : input) {
    Tree result{Value(ValueObject{}), g.sort_label};
    for (const ProjectItem& item : s.items()) {
      if (item.kind == ProjectItem::Kind::Keep) {
        Value v = subtree(g, item.target);
        if (v.is_undefined()) continue;
        if (item.target.empty())
          result.root = v;
        else
          set_at_path(result.root, item.target, v);
      } else {
        Value v = eval_value_def(*item.def, g);
        if (v.is_undefined()) continue;
        set_at_path(result.root, item.target, v);
      }
    }
    Path id = Path::parse("_id");
    if (subtree(result, id).is_undefined()) {
      Value v = subtree(g, id);
      if (!v.is_undefined()) set_at_path(result.root, id, v);
    }
    out.push_back(std::move(result));
  }
  return out;
}

Forest run_sort(const Stage& s, const Forest& input) {
  Forest out;
  for (const Tree& g : input) {
    SortLabel label;
    for (const SortEntry& e : s.sort_entries())
      label.push_back(SortKey{e.direction, subtree(g, e.path)});
    label.insert(label.end(), g.sort_label.begin(), g.sort_label.end());
    out.push_back(Tree{g.root, std::move(label)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Tree& a, const Tree& b) {
    return compare_sort_labels(a.sort_label, b.sort_label) == Ordering::Less;
  });
  return out;
}

Forest run_limit(const Stage& s, const Forest& input) {
  Forest out = input;
  std::stable_sort(out.begin(), out.end(), [](const Tree& a, const Tree& b) {
    return compare_sort_labels(a.sort_label, b.sort_label) == Ordering::Less;
  });
  std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max<std::int64_t>(s.count(), 0)),
                                        out.size());
  out.resize(n);
  return out;
}

Forest run_lookup(const Stage& s, const Forest& input, const Database& db) {
  const Forest& source = resolve_source(s.source(), db);
  Forest out;
  for (const Tree& g : input) {
    Value vars_doc{ValueObject{}};
    for (const LookupVar& var : s.lookup_vars()) {
      Value v = eval_value_def(var.def, g);
      if (v.is_undefined()) continue;
      set_at_path(vars_doc, Path::parse(var.name), v);
    }
    Forest joined;
    for (const Tree& src : source)
      joined.push_back(Tree{merge(src.root, vars_doc), {}});
    Forest result = run_pipeline(s.inner(), joined, db);
    ValueArray arr;
    for (const Tree& t : result) arr.push_back(t.root);
    Tree output = g;
    set_at_path(output.root, s.path(), Value(std::move(arr)));
    out.push_back(std::move(output));
  }
  return out;
}

std::string dedup_key(const Tree& t) {
  Value id = subtree(t, Path::parse("_id"));
  return id.is_undefined() ? t.root.to_json() : id.to_json();
}

bool connects(const Value& field, const std::vector<Value>& frontier) {
  for (const Value& f : frontier) {
    if (field == f) return true;
    if (field.is_array())
      for (const Value& e : field.as_array())
        if (e == f) return true;
  }
  return false;
}

Forest run_graph_lookup(const Stage& s, const Forest& input, const Database& db) {
  const Forest& source = resolve_source(s.source(), db);
  Forest out;
  for (const Tree& g : input) {
    for (const ValueDef& start_def : s.starts()) {
      Value start = eval_value_def(start_def, g);
      std::vector<Value> frontier;
      if (start.is_array())
        frontier.assign(start.as_array().begin(), start.as_array().end());
      else if (!start.is_undefined())
        frontier.push_back(start);

      ValueArray visited;
      std::set<std::string> seen;
      std::int64_t depth = 1;
      while (!frontier.empty() && (!s.max_depth() || depth <= *s.max_depth())) {
        std::vector<Value> next;
        for (const Tree& src : source) {
          if (seen.count(dedup_key(src))) continue;
          if (!connects(subtree(src, s.connect_to()), frontier)) continue;
          if (!eval_bool(s.criterion(), src)) continue;
          seen.insert(dedup_key(src));
          Value doc = src.root;
          if (s.depth_field()) set_at_path(doc, *s.depth_field(), Value(depth));
          visited.push_back(std::move(doc));
          Value from = subtree(src, s.connect_from());
          if (from.is_array())
            next.insert(next.end(), from.as_array().begin(), from.as_array().end());
          else if (!from.is_undefined())
            next.push_back(from);
        }
        frontier = std::move(next);
        ++depth;
      }
      Tree output = g;
      set_at_path(output.root, s.path(), Value(std::move(visited)));
      out.push_back(std::move(output));
    }
  }
  return out;
}

}  // namespace

Forest run_stage(const Stage& stage, const Forest& input, const Database& db) {
  switch (stage.kind()) {
    case Stage::Kind::Match: return run_match(stage, input);
    case Stage::Kind::Unwind: {
      Forest out;
      for (const Tree& g : input) {
        Forest per = unwind_tree(stage.path(), g);
        out.insert(out.end(), per.begin(), per.end());
      }
      return out;
    }
    case Stage::Kind::UnwindPreserve: {
      Forest out;
      for (const Tree& g : input) {
        Forest per = unwind_tree(stage.path(), g);
        if (per.empty())
          out.push_back(g);
        else
          out.insert(out.end(), per.begin(), per.end());
      }
      return out;
    }
    case Stage::Kind::Project: return run_project(stage, input);
    case Stage::Kind::Sort: return run_sort(stage, input);
    case Stage::Kind::Limit: return run_limit(stage, input);
    case Stage::Kind::Lookup: return run_lookup(stage, input, db);
    case Stage::Kind::GraphLookup: return run_graph_lookup(stage, input, db);
  }
  return {};
}

Forest run_pipeline(const Pipeline& stages, const Forest& input, const Database& db) {
  Forest current = input;
  for (const Stage& s : stages) current = run_stage(s, current, db);
  return current;
}

Forest run_pipeline(const Pipeline& stages, const CollRef& source, const Database& db) {
  return run_pipeline(stages, resolve_source(source, db), db);
}

}  // namespace mongolog
