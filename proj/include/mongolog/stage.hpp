#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mongolog/json_tree.hpp"
#include "mongolog/term.hpp"

namespace mongolog {

class BoolExpr;

// A value-producing expression evaluated against one tree.
class ValueDef {
 public:
  enum class Kind {
    Const,        // a literal value
    PathRef,      // the subtree at a path
    Array,        // an array built from element definitions
    Bool,         // a boolean expression as a value
    Cond,         // if-then-else on a boolean expression
    SortKeyOf,    // a sort key (direction + value definition), only inside Sort
    TermExpr,     // flatten a term against bindings, filtered per element
    Fact,         // flat elements of the term document at a path
    Subterm,      // flat elements below a key within the flat term at a path
    Binding,      // the stored binding for the subterm at a key (scalar or flat array)
    Instantiate,  // flat term at p1 instantiated by matching elements of p2
    Filter,       // elements of the array at a path that satisfy a criterion
  };

  static ValueDef constant(Value v);
  static ValueDef path_ref(Path p);
  static ValueDef array(std::vector<ValueDef> elems);
  static ValueDef boolean(BoolExpr e);
  static ValueDef cond(BoolExpr c, ValueDef then_def, ValueDef else_def);
  static ValueDef sort_key(SortDirection dir, Path p);
  static ValueDef term_expr(Term t, Path var_root, BoolExpr filter);
  static ValueDef fact(Path p);
  static ValueDef subterm(Path p, std::string key);
  static ValueDef binding(Path p, std::string key);
  static ValueDef instantiate(Path p1, Path p2);
  static ValueDef filter(Path p, BoolExpr criterion);

  Kind kind() const { return kind_; }
  const Value& const_value() const { return value_; }
  const Path& path() const { return path_; }
  const Path& second_path() const { return path2_; }
  const std::string& key() const { return key_; }
  const std::vector<ValueDef>& elements() const { return elems_; }
  const BoolExpr& bool_expr() const { return *bool_; }
  const ValueDef& then_def() const { return elems_[0]; }
  const ValueDef& else_def() const { return elems_[1]; }
  const Term& term() const { return term_; }
  SortDirection direction() const { return dir_; }

  friend bool operator==(const ValueDef& a, const ValueDef& b);
  friend bool operator!=(const ValueDef& a, const ValueDef& b) { return !(a == b); }

 private:
  Kind kind_ = Kind::Const;
  Value value_;
  Path path_;
  Path path2_;
  std::string key_;
  std::vector<ValueDef> elems_;
  std::shared_ptr<const BoolExpr> bool_;
  Term term_ = Term::atom("");
  SortDirection dir_ = SortDirection::Ascending;
};

class BoolExpr {
 public:
  enum class Kind { And, Or, Not, Eq, SubsetEq, Exists };

  static BoolExpr and_(std::vector<BoolExpr> args);
  static BoolExpr or_(std::vector<BoolExpr> args);
  static BoolExpr not_(BoolExpr arg);
  static BoolExpr eq(ValueDef lhs, ValueDef rhs);
  static BoolExpr subset_eq(ValueDef lhs, ValueDef rhs);
  static BoolExpr exists(Path p);

  // The always-true criterion used where a criterion is mandatory.
  static BoolExpr truth();

  Kind kind() const { return kind_; }
  const std::vector<BoolExpr>& args() const { return args_; }
  const ValueDef& lhs() const { return defs_[0]; }
  const ValueDef& rhs() const { return defs_[1]; }
  const Path& path() const { return path_; }

  bool is_truth() const;

  friend bool operator==(const BoolExpr& a, const BoolExpr& b);
  friend bool operator!=(const BoolExpr& a, const BoolExpr& b) { return !(a == b); }

 private:
  Kind kind_ = Kind::Eq;
  std::vector<BoolExpr> args_;
  std::vector<ValueDef> defs_;
  Path path_;
};

// One entry of a projection stage.
struct ProjectItem {
  enum class Kind { Keep, Set };
  Kind kind = Kind::Keep;
  Path target;
  std::optional<ValueDef> def;

  static ProjectItem keep(Path p) { return ProjectItem{Kind::Keep, std::move(p), std::nullopt}; }
  static ProjectItem set(Path p, ValueDef d) {
    return ProjectItem{Kind::Set, std::move(p), std::move(d)};
  }

  friend bool operator==(const ProjectItem& a, const ProjectItem& b) {
    return a.kind == b.kind && a.target == b.target && a.def == b.def;
  }
  friend bool operator!=(const ProjectItem& a, const ProjectItem& b) { return !(a == b); }
};

struct SortEntry {
  Path path;
  SortDirection direction = SortDirection::Ascending;

  friend bool operator==(const SortEntry& a, const SortEntry& b) {
    return a.path == b.path && a.direction == b.direction;
  }
  friend bool operator!=(const SortEntry& a, const SortEntry& b) { return !(a == b); }
};

// A collection reference: either a named collection or the one-document helper.
struct CollRef {
  bool is_one = false;
  std::string name;

  static CollRef one() { return CollRef{true, ""}; }
  static CollRef named(std::string n) { return CollRef{false, std::move(n)}; }

  friend bool operator==(const CollRef& a, const CollRef& b) {
    return a.is_one == b.is_one && a.name == b.name;
  }
  friend bool operator!=(const CollRef& a, const CollRef& b) { return !(a == b); }
};

struct LookupVar {
  std::string name;
  ValueDef def;

  friend bool operator==(const LookupVar& a, const LookupVar& b) {
    return a.name == b.name && a.def == b.def;
  }
  friend bool operator!=(const LookupVar& a, const LookupVar& b) { return !(a == b); }
};

class Stage;
using Pipeline = std::vector<Stage>;

class Stage {
 public:
  enum class Kind {
    Match,
    Unwind,
    UnwindPreserve,
    Project,
    Sort,
    Limit,
    Lookup,
    GraphLookup,
  };

  static Stage match(BoolExpr criterion);
  static Stage unwind(Path p);
  static Stage unwind_preserve(Path p);
  static Stage project(std::vector<ProjectItem> items);
  static Stage sort(std::vector<SortEntry> entries);
  static Stage limit(std::int64_t count);
  static Stage lookup(Path as, std::vector<LookupVar> vars, CollRef source, Pipeline inner);
  static Stage graph_lookup(Path as, CollRef source, std::vector<ValueDef> starts, Path connect_to,
                            Path connect_from, BoolExpr criterion,
                            std::optional<Path> depth_field = std::nullopt,
                            std::optional<std::int64_t> max_depth = std::nullopt);

  Kind kind() const { return kind_; }
  const BoolExpr& criterion() const { return *criterion_; }
  const Path& path() const { return path_; }
  const std::vector<ProjectItem>& items() const { return items_; }
  const std::vector<SortEntry>& sort_entries() const { return sort_entries_; }
  std::int64_t count() const { return count_; }
  const std::vector<LookupVar>& lookup_vars() const { return lookup_vars_; }
  const CollRef& source() const { return source_; }
  const Pipeline& inner() const { return inner_; }
  Pipeline& inner_mutable() { return inner_; }
  const std::vector<ValueDef>& starts() const { return starts_; }
  const Path& connect_to() const { return connect_to_; }
  const Path& connect_from() const { return connect_from_; }
  const std::optional<Path>& depth_field() const { return depth_field_; }
  const std::optional<std::int64_t>& max_depth() const { return max_depth_; }

  friend bool operator==(const Stage& a, const Stage& b);
  friend bool operator!=(const Stage& a, const Stage& b) { return !(a == b); }

 private:
  Kind kind_ = Kind::Match;
  std::shared_ptr<const BoolExpr> criterion_;
  Path path_;
  std::vector<ProjectItem> items_;
  std::vector<SortEntry> sort_entries_;
  std::int64_t count_ = 0;
  std::vector<LookupVar> lookup_vars_;
  CollRef source_ = CollRef::one();
  Pipeline inner_;
  std::vector<ValueDef> starts_;
  Path connect_to_;
  Path connect_from_;
  std::optional<Path> depth_field_;
  std::optional<std::int64_t> max_depth_;
};

// A pipeline together with the collection it reads from.
struct SourcedPipeline {
  CollRef source = CollRef::one();
  Pipeline stages;

  friend bool operator==(const SourcedPipeline& a, const SourcedPipeline& b) {
    return a.source == b.source && a.stages == b.stages;
  }
  friend bool operator!=(const SourcedPipeline& a, const SourcedPipeline& b) { return !(a == b); }
};

}  // namespace mongolog
