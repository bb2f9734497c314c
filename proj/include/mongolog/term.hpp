#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mongolog/json_tree.hpp"

namespace mongolog {

struct structure_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A logic term: atom, number, variable, or compound.
class Term {
 public:
  enum class Kind { Atom, Number, Var, Compound };

  static Term atom(std::string text);
  static Term number(int n) { return number(Value(n)); }
  static Term number(std::int64_t n) { return number(Value(n)); }
  static Term number(double n) { return number(Value(n)); }
  static Term number(Value n);
  static Term var(std::string name);
  static Term compound(std::string functor, std::vector<Term> args);

  Kind kind() const { return kind_; }
  bool is_atom() const { return kind_ == Kind::Atom; }
  bool is_number() const { return kind_ == Kind::Number; }
  bool is_var() const { return kind_ == Kind::Var; }
  bool is_compound() const { return kind_ == Kind::Compound; }
  bool is_constant() const { return is_atom() || is_number(); }

  /// Atom text, variable name, or compound functor.
  const std::string& symbol() const { return symbol_; }
  /// Numeric value (Kind::Number only).
  const Value& number_value() const { return number_; }
  const std::vector<Term>& args() const { return args_; }
  std::size_t arity() const { return args_.size(); }

  bool is_ground() const;
  /// Constant payload as a Value (atom text or number).
  Value constant_value() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  Kind kind_ = Kind::Atom;
  std::string symbol_;
  Value number_;
  std::vector<Term> args_;
};

/// One element of a flattened term: an index key plus either a constant value
/// or a variable name.
struct FlatElem {
  std::string key;
  std::optional<Value> value;
  std::optional<std::string> name;

  friend bool operator==(const FlatElem& a, const FlatElem& b) {
    return a.key == b.key && a.value == b.value && a.name == b.name;
  }
};

/// Flattened term in canonical pre-order (numeric segments compare
/// numerically, parents before children).
using FlatTerm = std::vector<FlatElem>;

/// Compares dotted index keys segmentwise: numeric segments numerically,
/// others lexicographically (numeric before text), prefixes first.
bool key_less(const std::string& a, const std::string& b);

void sort_canonical(FlatTerm& elems);

/// Flattens `term`, reading variable bindings at `var_root` inside
/// `bindings`. A bound variable contributes its stored value; stored flat
/// arrays (compound bindings) are spliced with their keys re-prefixed.
/// Root-level constants and bare variables use the normalized key "0".
FlatTerm flatten(const Term& term, const Path& var_root, const Path& prefix,
                 const Tree& bindings);

/// Variable occurrences of `term` as (name, index key) pairs, first
/// occurrence only, in pre-order.
std::vector<std::pair<std::string, std::string>> vars_of(const Term& term);

/// Rebuilds a term from its flattened form. Throws structure_error on a
/// missing functor element or gaps in argument indices.
Term unflatten(const FlatTerm& elems);

/// Renders a flat element as an object value ({"k":..,"v":..} or
/// {"k":..,"n":..}); absent fields are omitted.
Value flat_elem_value(const FlatElem& elem);
std::optional<FlatElem> flat_elem_from_value(const Value& v);

/// True when `v` is an array of flat-element objects.
bool is_flat_array(const Value& v);

/// Converts a stored binding value (scalar or flat array) into a Term.
Term term_from_binding(const Value& v);

// --- term expression evaluation (used by the pipeline engine) ---

class BoolExpr;  // defined in stage.hpp
bool eval_bool(const BoolExpr& expr, const Tree& tree);

/// Flattens `term` against the bindings in `tree` at `var_root` and keeps the
/// elements whose object rendering satisfies `filter`; returns an Array.
Value eval_term_expr(const Term& term, const Path& var_root, const BoolExpr& filter,
                     const Tree& tree);

/// Flattens the term document at `path`: one {k,v} element per non-null key
/// except "_id", canonically sorted. Undefined when `path` is not an object.
Value eval_fact(const Path& path, const Tree& tree);

/// Elements of the flat array at `path` whose key extends `key`, with the
/// prefix stripped (a fully stripped key becomes "0"). An object at `path`
/// is first converted as by eval_fact. Undefined when nothing matches.
Value eval_subterm(const Path& path, const std::string& key, const Tree& tree);

/// The binding a variable at index `key` receives from the flat term at
/// `path`: the scalar for an atomic subterm, the flat array for a compound
/// one, Undefined for a still-free variable or no match.
Value eval_binding(const Path& path, const std::string& key, const Tree& tree);

/// Instantiates the flat term at `p1` with the one at `p2`: constants of p1
/// plus all elements of p2 whose key extends (possibly trivially) the key of
/// a variable element of p1; canonically sorted.
Value eval_instantiate(const Path& p1, const Path& p2, const Tree& tree);

// --- unification ---

/// Alias-free unification oracle. Bindings are an object tree mapping
/// variable names to stored binding values. Two distinct free variables do
/// not unify; a free variable binds to any term (no occurs check). Returns
/// the extended bindings, or nullopt when unification fails.
std::optional<Tree> unify_simplified(const Term& a, const Term& b, const Tree& bindings);

/// Textbook unifiability with variable aliasing allowed and no occurs check.
/// Used to decide whether an equation can ever succeed.
bool unifiable(const Term& a, const Term& b);

}  // namespace mongolog
