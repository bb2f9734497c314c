#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mongolog {

/// Error raised by tree/value operations with no defined result.
struct eval_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Value;
using ValueArray = std::vector<Value>;
using ValueObject = std::map<std::string, Value>;

enum class ValueKind { Undefined, Null, Bool, Int, Float, Text, Array, Object };

/// A JSON value extended with an Undefined sentinel for absent fields.
/// Integers and floats are kept distinct for round-trip rendering, but all
/// comparisons treat numbers numerically (2 equals 2.0).
class Value {
 public:
  Value() : repr_(UndefinedT{}) {}
  Value(std::nullptr_t) : repr_(NullT{}) {}
  Value(bool b) : repr_(b) {}
  Value(int i) : repr_(static_cast<std::int64_t>(i)) {}
  Value(std::int64_t i) : repr_(i) {}
  Value(double d) : repr_(d) {}
  Value(const char* s) : repr_(std::string(s)) {}
  Value(std::string s) : repr_(std::move(s)) {}
  Value(ValueArray a) : repr_(std::move(a)) {}
  Value(ValueObject o) : repr_(std::move(o)) {}

  static Value undefined() { return Value(); }

  ValueKind kind() const;
  bool is_undefined() const { return kind() == ValueKind::Undefined; }
  bool is_null() const { return kind() == ValueKind::Null; }
  bool is_bool() const { return kind() == ValueKind::Bool; }
  bool is_int() const { return kind() == ValueKind::Int; }
  bool is_float() const { return kind() == ValueKind::Float; }
  bool is_number() const { return is_int() || is_float(); }
  bool is_text() const { return kind() == ValueKind::Text; }
  bool is_array() const { return kind() == ValueKind::Array; }
  bool is_object() const { return kind() == ValueKind::Object; }

  bool as_bool() const { return std::get<bool>(repr_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(repr_); }
  double as_float() const { return std::get<double>(repr_); }
  double as_number() const;
  const std::string& as_text() const { return std::get<std::string>(repr_); }
  const ValueArray& as_array() const { return std::get<ValueArray>(repr_); }
  ValueArray& as_array() { return std::get<ValueArray>(repr_); }
  const ValueObject& as_object() const { return std::get<ValueObject>(repr_); }
  ValueObject& as_object() { return std::get<ValueObject>(repr_); }

  /// Deep structural equality; numbers compare numerically across Int/Float.
  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

  /// Parses a JSON document. Throws eval_error on malformed input.
  static Value parse_json(const std::string& text);

  /// Serializes with object keys in sorted order. Undefined object fields are
  /// skipped; Undefined array elements render as null. `indent < 0` renders
  /// compact output.
  std::string to_json(int indent = -1) const;

 private:
  struct UndefinedT {
    bool operator==(const UndefinedT&) const { return true; }
  };
  struct NullT {
    bool operator==(const NullT&) const { return true; }
  };
  std::variant<UndefinedT, NullT, bool, std::int64_t, double, std::string, ValueArray,
               ValueObject>
      repr_;
};

enum class Ordering { Less, Equal, Greater };

/// Total order over values: Null/Undefined lowest, then numbers, texts,
/// booleans, objects, arrays. Arrays order by their minimum element (empty
/// first), objects by their sorted key/value sequence.
Ordering compare_default(const Value& a, const Value& b);

/// A dot-separated field path; the empty path addresses the tree root.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<std::string> segments);

  /// Splits on '.'; empty text gives the root path. Rejects empty segments.
  static Path parse(const std::string& text);
  static Path root() { return Path(); }

  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }
  const std::string& operator[](std::size_t i) const { return segments_[i]; }
  const std::vector<std::string>& segments() const { return segments_; }

  /// Renders as dot-joined text (empty string for the root path).
  std::string str() const;

  Path operator/(const std::string& segment) const;
  Path operator/(const Path& rest) const;

  friend bool operator==(const Path& a, const Path& b) { return a.segments_ == b.segments_; }
  friend bool operator!=(const Path& a, const Path& b) { return !(a == b); }
  friend bool operator<(const Path& a, const Path& b) { return a.segments_ < b.segments_; }

 private:
  std::vector<std::string> segments_;
};

enum class SortDirection { Ascending, Descending };

struct SortKey {
  SortDirection direction = SortDirection::Ascending;
  Value value;

  friend bool operator==(const SortKey& a, const SortKey& b) {
    return a.direction == b.direction && a.value == b.value;
  }
};

/// Ordering annotation attached to a tree by sort stages; earlier entries
/// are more significant.
using SortLabel = std::vector<SortKey>;

/// Lexicographic comparison of sort labels; descending entries invert the
/// value comparison, and a label that is a prefix of another orders first.
Ordering compare_sort_labels(const SortLabel& a, const SortLabel& b);

/// A document: an object-valued root plus its (possibly empty) sort label.
struct Tree {
  Value root = Value(ValueObject{});
  SortLabel sort_label;

  friend bool operator==(const Tree& a, const Tree& b) {
    return a.root == b.root && a.sort_label == b.sort_label;
  }
};

/// An ordered sequence of trees. Pipeline semantics are set-oriented; the
/// order is kept for deterministic presentation.
using Forest = std::vector<Tree>;

/// Resolves `path` inside `root`. A missing key yields Undefined. A
/// non-numeric segment applied to an array resolves each object element and
/// collects the defined results into an array (Undefined when none resolve);
/// a canonical integer segment indexes into the array.
Value subtree(const Value& root, const Path& path);
Value subtree(const Tree& tree, const Path& path);

/// Builds the object nesting that carries `value` at `path`. For the root
/// path the value itself is returned and must be an object.
Value attach_value(const Path& path, Value value);
Tree attach(const Path& path, Value value);

/// Collects subtree(t, path) over the forest in order, skipping Undefined.
Value array_of(const Forest& forest, const Path& path);

/// Recursive union of two objects; on a key collision of two objects the
/// merge recurses, otherwise the right side wins.
Value merge(const Value& left, const Value& right);

/// Replaces the value at `path`, creating (or overwriting) intermediate
/// objects along the way. Undefined erases the field at `path`.
void set_at_path(Value& root, const Path& path, Value value);

}  // namespace mongolog
