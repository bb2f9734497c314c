#include "mongolog/term.hpp"

#include <algorithm>
#include <map>

namespace mongolog {

Term Term::atom(std::string text) {
  Term t;
  t.kind_ = Kind::Atom;
  t.symbol_ = std::move(text);
  return t;
}

Term Term::number(Value n) {
  if (!n.is_number()) throw structure_error("Term::number requires a numeric value");
  Term t;
  t.kind_ = Kind::Number;
  t.number_ = std::move(n);
  return t;
}

Term Term::var(std::string name) {
  Term t;
  t.kind_ = Kind::Var;
  t.symbol_ = std::move(name);
  return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) return atom(std::move(functor));
  Term t;
  t.kind_ = Kind::Compound;
  t.symbol_ = std::move(functor);
  t.args_ = std::move(args);
  return t;
}

bool Term::is_ground() const {
  switch (kind_) {
    case Kind::Var: return false;
    case Kind::Compound:
      return std::all_of(args_.begin(), args_.end(), [](const Term& a) { return a.is_ground(); });
    default: return true;
  }
}

Value Term::constant_value() const {
  if (is_atom()) return Value(symbol_);
  if (is_number()) return number_;
  throw structure_error("constant_value on a non-constant term");
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Term::Kind::Atom:
    case Term::Kind::Var: return a.symbol_ == b.symbol_;
    case Term::Kind::Number: return a.number_ == b.number_;
    case Term::Kind::Compound: return a.symbol_ == b.symbol_ && a.args_ == b.args_;
  }
  return false;
}

// --- canonical key order ---

namespace {

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> segs;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = key.find('.', start);
    if (dot == std::string::npos) {
      segs.push_back(key.substr(start));
      break;
    }
    segs.push_back(key.substr(start, dot - start));
    start = dot + 1;
  }
  return segs;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int compare_segment(const std::string& a, const std::string& b) {
  bool na = all_digits(a);
  bool nb = all_digits(b);
  if (na && nb) {
    // Compare numerically; strip leading zeros to normalize lengths.
    auto strip = [](const std::string& s) {
      std::size_t i = s.find_first_not_of('0');
      return i == std::string::npos ? std::string("0") : s.substr(i);
    };
    std::string sa = strip(a);
    std::string sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size() ? -1 : 1;
    return sa.compare(sb);
  }
  if (na != nb) return na ? -1 : 1;
  return a.compare(b);
}

}  // namespace

bool key_less(const std::string& a, const std::string& b) {
  std::vector<std::string> sa = split_key(a);
  std::vector<std::string> sb = split_key(b);
  for (std::size_t i = 0; i < sa.size() && i < sb.size(); ++i) {
    int c = compare_segment(sa[i], sb[i]);
    if (c != 0) return c < 0;
  }
  return sa.size() < sb.size();
}

void sort_canonical(FlatTerm& elems) {
  std::stable_sort(elems.begin(), elems.end(),
                   [](const FlatElem& a, const FlatElem& b) { return key_less(a.key, b.key); });
}

// --- flatten / unflatten ---

namespace {

std::string join_key(const Path& prefix, const std::string& key) {
  std::string p = prefix.str();
  if (p.empty()) return key;
  return p + "." + key;
}

std::string root_or(const Path& prefix) {
  std::string p = prefix.str();
  return p.empty() ? std::string("0") : p;
}

void flatten_into(const Term& term, const Path& var_root, const Path& prefix,
                  const Tree& bindings, FlatTerm& out) {
  switch (term.kind()) {
    case Term::Kind::Atom:
    case Term::Kind::Number:
      out.push_back(FlatElem{root_or(prefix), term.constant_value(), std::nullopt});
      return;
    case Term::Kind::Var: {
      Value bound = subtree(bindings, var_root / Path::parse(term.symbol()));
      if (bound.is_undefined()) {
        out.push_back(FlatElem{root_or(prefix), std::nullopt, term.symbol()});
        return;
      }
      if (is_flat_array(bound)) {
        // A stored compound binding: splice its elements under this position.
        for (const Value& ev : bound.as_array()) {
          auto elem = flat_elem_from_value(ev);
          if (!elem) continue;
          elem->key = join_key(prefix, elem->key);
          out.push_back(std::move(*elem));
        }
        return;
      }
      out.push_back(FlatElem{root_or(prefix), bound, std::nullopt});
      return;
    }
    case Term::Kind::Compound: {
      out.push_back(FlatElem{join_key(prefix, "0"), Value(term.symbol()), std::nullopt});
      for (std::size_t i = 0; i < term.arity(); ++i)
        flatten_into(term.args()[i], var_root, prefix / std::to_string(i + 1), bindings, out);
      return;
    }
  }
}

}  // namespace

FlatTerm flatten(const Term& term, const Path& var_root, const Path& prefix,
                 const Tree& bindings) {
  FlatTerm out;
  flatten_into(term, var_root, prefix, bindings, out);
  sort_canonical(out);
  return out;
}

std::vector<std::pair<std::string, std::string>> vars_of(const Term& term) {
  FlatTerm flat = flatten(term, Path::root(), Path::root(), Tree{});
  std::vector<std::pair<std::string, std::string>> out;
  for (const FlatElem& e : flat) {
    if (!e.name) continue;
    bool seen = false;
    for (const auto& [n, k] : out)
      if (n == *e.name) seen = true;
    if (!seen) out.emplace_back(*e.name, e.key);
  }
  return out;
}

namespace {

Term constant_term(const Value& v) {
  if (v.is_number()) return Term::number(v);
  if (v.is_text()) return Term::atom(v.as_text());
  throw structure_error("flat element value is not a constant: " + v.to_json());
}

Term unflatten_at(const std::string& key, const std::map<std::string, FlatElem>& by_key);

Term unflatten_compound(const std::string& key, const std::map<std::string, FlatElem>& by_key) {
  std::string functor_key = key.empty() ? "0" : key + ".0";
  auto fit = by_key.find(functor_key);
  if (fit == by_key.end() || !fit->second.value || !fit->second.value->is_text())
    throw structure_error("flat term has no functor element at key " + functor_key);
  std::vector<Term> args;
  for (std::size_t i = 1;; ++i) {
    std::string arg_key = key.empty() ? std::to_string(i) : key + "." + std::to_string(i);
    bool present = by_key.count(arg_key) > 0;
    if (!present) {
      std::string nested = arg_key + ".";
      auto it = by_key.lower_bound(nested);
      present = it != by_key.end() && it->first.compare(0, nested.size(), nested) == 0;
    }
    if (!present) {
      // Make sure there is no later argument index (a gap would be malformed).
      for (const auto& [k, e] : by_key) {
        (void)e;
        if (key.empty() ? all_digits(split_key(k)[0]) : k.compare(0, key.size() + 1, key + ".") == 0) {
          std::string seg = key.empty() ? split_key(k)[0] : split_key(k.substr(key.size() + 1))[0];
          if (all_digits(seg) && std::stoull(seg) >= i + 1)
            throw structure_error("gap in argument indices of flat term at key " + arg_key);
        }
      }
      break;
    }
    args.push_back(unflatten_at(arg_key, by_key));
  }
  return Term::compound(fit->second.value->as_text(), std::move(args));
}

Term unflatten_at(const std::string& key, const std::map<std::string, FlatElem>& by_key) {
  auto it = by_key.find(key);
  if (it != by_key.end()) {
    const FlatElem& e = it->second;
    if (e.name) return Term::var(*e.name);
    if (e.value) return constant_term(*e.value);
    throw structure_error("flat element has neither value nor name at key " + key);
  }
  return unflatten_compound(key, by_key);
}

}  // namespace

Term unflatten(const FlatTerm& elems) {
  if (elems.empty()) throw structure_error("cannot unflatten an empty flat term");
  std::map<std::string, FlatElem> by_key;
  for (const FlatElem& e : elems) {
    std::string key = e.key.empty() ? "0" : e.key;
    by_key[key] = e;
    by_key[key].key = key;
  }
  if (by_key.size() == 1 && by_key.count("0")) return unflatten_at("0", by_key);
  return unflatten_compound("", by_key);
}

Value flat_elem_value(const FlatElem& elem) {
  ValueObject o;
  o.emplace("k", Value(elem.key));
  if (elem.value) o.emplace("v", *elem.value);
  if (elem.name) o.emplace("n", Value(*elem.name));
  return Value(std::move(o));
}

std::optional<FlatElem> flat_elem_from_value(const Value& v) {
  if (!v.is_object()) return std::nullopt;
  const ValueObject& o = v.as_object();
  auto kit = o.find("k");
  if (kit == o.end() || !kit->second.is_text()) return std::nullopt;
  FlatElem e;
  e.key = kit->second.as_text();
  auto vit = o.find("v");
  if (vit != o.end() && !vit->second.is_undefined()) e.value = vit->second;
  auto nit = o.find("n");
  if (nit != o.end() && nit->second.is_text()) e.name = nit->second.as_text();
  return e;
}

bool is_flat_array(const Value& v) {
  if (!v.is_array() || v.as_array().empty()) return false;
  for (const Value& e : v.as_array())
    if (!flat_elem_from_value(e)) return false;
  return true;
}

Term term_from_binding(const Value& v) {
  if (is_flat_array(v)) {
    FlatTerm flat;
    for (const Value& e : v.as_array()) flat.push_back(*flat_elem_from_value(e));
    return unflatten(flat);
  }
  return constant_term(v);
}

// --- term expressions ---

Value eval_term_expr(const Term& term, const Path& var_root, const BoolExpr& filter,
                     const Tree& tree) {
  FlatTerm flat = flatten(term, var_root, Path::root(), tree);
  ValueArray out;
  for (const FlatElem& e : flat) {
    Value rendered = flat_elem_value(e);
    Tree elem_tree{rendered, {}};
    if (eval_bool(filter, elem_tree)) out.push_back(std::move(rendered));
  }
  return Value(std::move(out));
}

Value eval_fact(const Path& path, const Tree& tree) {
  Value doc = subtree(tree, path);
  if (!doc.is_object()) return Value::undefined();
  FlatTerm elems;
  for (const auto& [key, v] : doc.as_object()) {
    if (key == "_id" || v.is_null() || v.is_undefined()) continue;
    elems.push_back(FlatElem{key, v, std::nullopt});
  }
  sort_canonical(elems);
  ValueArray out;
  for (const FlatElem& e : elems) out.push_back(flat_elem_value(e));
  return Value(std::move(out));
}

namespace {

// Fetches the flat term at `path`, converting a term document on the fly.
std::optional<FlatTerm> flat_term_at(const Path& path, const Tree& tree) {
  Value v = subtree(tree, path);
  if (v.is_object()) {
    Value converted = eval_fact(path, tree);
    if (converted.is_undefined()) return std::nullopt;
    v = converted;
  }
  if (!v.is_array()) return std::nullopt;
  FlatTerm flat;
  for (const Value& e : v.as_array()) {
    auto elem = flat_elem_from_value(e);
    if (!elem) return std::nullopt;
    flat.push_back(std::move(*elem));
  }
  return flat;
}

std::optional<std::string> strip_prefix(const std::string& key, const std::string& prefix) {
  if (key == prefix) return std::string("0");
  if (key.size() > prefix.size() + 1 && key.compare(0, prefix.size(), prefix) == 0 &&
      key[prefix.size()] == '.')
    return key.substr(prefix.size() + 1);
  return std::nullopt;
}

FlatTerm subterm_elems(const FlatTerm& flat, const std::string& key) {
  FlatTerm out;
  for (const FlatElem& e : flat) {
    auto stripped = strip_prefix(e.key, key);
    if (!stripped) continue;
    FlatElem copy = e;
    copy.key = *stripped;
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace

Value eval_subterm(const Path& path, const std::string& key, const Tree& tree) {
  auto flat = flat_term_at(path, tree);
  if (!flat) return Value::undefined();
  FlatTerm sub = subterm_elems(*flat, key);
  if (sub.empty()) return Value::undefined();
  ValueArray out;
  for (const FlatElem& e : sub) out.push_back(flat_elem_value(e));
  return Value(std::move(out));
}

Value eval_binding(const Path& path, const std::string& key, const Tree& tree) {
  auto flat = flat_term_at(path, tree);
  if (!flat) return Value::undefined();
  FlatTerm sub = subterm_elems(*flat, key);
  if (sub.empty()) return Value::undefined();
  if (sub.size() == 1 && sub[0].key == "0") {
    if (sub[0].value) return *sub[0].value;
    return Value::undefined();  // a still-free variable yields no binding
  }
  ValueArray out;
  for (const FlatElem& e : sub) out.push_back(flat_elem_value(e));
  return Value(std::move(out));
}

Value eval_instantiate(const Path& p1, const Path& p2, const Tree& tree) {
  auto f1 = flat_term_at(p1, tree);
  auto f2 = flat_term_at(p2, tree);
  if (!f1 || !f2) return Value::undefined();
  FlatTerm out;
  for (const FlatElem& e : *f1)
    if (e.value) out.push_back(e);
  for (const FlatElem& e1 : *f1) {
    if (!e1.name) continue;
    for (const FlatElem& e2 : *f2)
      if (strip_prefix(e2.key, e1.key)) out.push_back(e2);
  }
  sort_canonical(out);
  ValueArray rendered;
  for (const FlatElem& e : out) rendered.push_back(flat_elem_value(e));
  return Value(std::move(rendered));
}

// --- unification ---

namespace {

// Dereferences a variable through the bindings object, if bound.
std::optional<Term> lookup_binding(const Tree& bindings, const std::string& name) {
  Value v = subtree(bindings, Path(std::vector<std::string>{name}));
  if (v.is_undefined()) return std::nullopt;
  return term_from_binding(v);
}

Term deref(Term t, const Tree& bindings) {
  while (t.is_var()) {
    auto bound = lookup_binding(bindings, t.symbol());
    if (!bound) return t;
    t = *bound;
  }
  return t;
}

// Stores `t` as a binding value: scalar for constants, flat array otherwise.
Value binding_value(const Term& t, const Tree& bindings) {
  if (t.is_constant()) return t.constant_value();
  FlatTerm flat = flatten(t, Path::root(), Path::root(), bindings);
  ValueArray out;
  for (const FlatElem& e : flat) out.push_back(flat_elem_value(e));
  return Value(std::move(out));
}

bool unify_walk(const Term& a, const Term& b, Tree& bindings) {
  Term ta = deref(a, bindings);
  Term tb = deref(b, bindings);
  if (ta.is_var() && tb.is_var()) return ta.symbol() == tb.symbol();
  if (ta.is_var() || tb.is_var()) {
    const Term& var = ta.is_var() ? ta : tb;
    const Term& other = ta.is_var() ? tb : ta;
    set_at_path(bindings.root, Path(std::vector<std::string>{var.symbol()}),
                binding_value(other, bindings));
    return true;
  }
  if (ta.is_constant() && tb.is_constant())
    return ta.constant_value() == tb.constant_value();
  if (ta.is_compound() && tb.is_compound()) {
    if (ta.symbol() != tb.symbol() || ta.arity() != tb.arity()) return false;
    for (std::size_t i = 0; i < ta.arity(); ++i)
      if (!unify_walk(ta.args()[i], tb.args()[i], bindings)) return false;
    return true;
  }
  return false;
}

}  // namespace

std::optional<Tree> unify_simplified(const Term& a, const Term& b, const Tree& bindings) {
  Tree extended = bindings;
  if (!extended.root.is_object()) extended.root = Value(ValueObject{});
  if (!unify_walk(a, b, extended)) return std::nullopt;
  return extended;
}

namespace {

using Subst = std::map<std::string, Term>;

Term subst_deref(Term t, const Subst& s) {
  while (t.is_var()) {
    auto it = s.find(t.symbol());
    if (it == s.end()) return t;
    t = it->second;
  }
  return t;
}

bool unifiable_walk(const Term& a, const Term& b, Subst& s) {
  Term ta = subst_deref(a, s);
  Term tb = subst_deref(b, s);
  if (ta.is_var() && tb.is_var()) {
    if (ta.symbol() != tb.symbol()) s.emplace(ta.symbol(), tb);
    return true;
  }
  if (ta.is_var() || tb.is_var()) {
    const Term& var = ta.is_var() ? ta : tb;
    const Term& other = ta.is_var() ? tb : ta;
    s.emplace(var.symbol(), other);
    return true;
  }
  if (ta.is_constant() && tb.is_constant()) return ta.constant_value() == tb.constant_value();
  if (ta.is_compound() && tb.is_compound()) {
    if (ta.symbol() != tb.symbol() || ta.arity() != tb.arity()) return false;
    for (std::size_t i = 0; i < ta.arity(); ++i)
      if (!unifiable_walk(ta.args()[i], tb.args()[i], s)) return false;
    return true;
  }
  return false;
}

}  // namespace

bool unifiable(const Term& a, const Term& b) {
  Subst s;
  return unifiable_walk(a, b, s);
}

}  // namespace mongolog
