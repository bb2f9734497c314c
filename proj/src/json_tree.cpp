#include "mongolog/json_tree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace mongolog {

ValueKind Value::kind() const {
  switch (repr_.index()) {
    case 0: return ValueKind::Undefined;
    case 1: return ValueKind::Null;
    case 2: return ValueKind::Bool;
    case 3: return ValueKind::Int;
    case 4: return ValueKind::Float;
    case 5: return ValueKind::Text;
    case 6: return ValueKind::Array;
    default: return ValueKind::Object;
  }
}

double Value::as_number() const {
  return is_int() ? static_cast<double>(as_int()) : as_float();
}

static Ordering compare_numbers(const Value& a, const Value& b) {
  if (a.is_int() && b.is_int()) {
    if (a.as_int() < b.as_int()) return Ordering::Less;
    if (a.as_int() > b.as_int()) return Ordering::Greater;
    return Ordering::Equal;
  }
  double x = a.as_number();
  double y = b.as_number();
  if (x < y) return Ordering::Less;
  if (x > y) return Ordering::Greater;
  return Ordering::Equal;
}

bool operator==(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) return compare_numbers(a, b) == Ordering::Equal;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ValueKind::Undefined:
    case ValueKind::Null: return true;
    case ValueKind::Bool: return a.as_bool() == b.as_bool();
    case ValueKind::Text: return a.as_text() == b.as_text();
    case ValueKind::Array: return a.as_array() == b.as_array();
    case ValueKind::Object: return a.as_object() == b.as_object();
    default: return true;  // numbers handled above
  }
}

namespace {

// Type rank for the default order; Undefined sorts with Null.
int type_rank(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Undefined:
    case ValueKind::Null: return 0;
    case ValueKind::Int:
    case ValueKind::Float: return 1;
    case ValueKind::Text: return 2;
    case ValueKind::Bool: return 3;
    case ValueKind::Object: return 4;
    case ValueKind::Array: return 5;
  }
  return 6;
}

Ordering compare_arrays(const ValueArray& a, const ValueArray& b) {
  if (a.empty() || b.empty()) {
    if (a.empty() && b.empty()) return Ordering::Equal;
    return a.empty() ? Ordering::Less : Ordering::Greater;
  }
  const Value* min_a = &a[0];
  for (const Value& v : a)
    if (compare_default(v, *min_a) == Ordering::Less) min_a = &v;
  const Value* min_b = &b[0];
  for (const Value& v : b)
    if (compare_default(v, *min_b) == Ordering::Less) min_b = &v;
  Ordering by_min = compare_default(*min_a, *min_b);
  if (by_min != Ordering::Equal) return by_min;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    Ordering c = compare_default(a[i], b[i]);
    if (c != Ordering::Equal) return c;
  }
  if (a.size() < b.size()) return Ordering::Less;
  if (a.size() > b.size()) return Ordering::Greater;
  return Ordering::Equal;
}

Ordering compare_objects(const ValueObject& a, const ValueObject& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    int kc = ia->first.compare(ib->first);
    if (kc < 0) return Ordering::Less;
    if (kc > 0) return Ordering::Greater;
    Ordering vc = compare_default(ia->second, ib->second);
    if (vc != Ordering::Equal) return vc;
  }
  if (ia == a.end() && ib == b.end()) return Ordering::Equal;
  return ia == a.end() ? Ordering::Less : Ordering::Greater;
}

}  // namespace

Ordering compare_default(const Value& a, const Value& b) {
  int ra = type_rank(a);
  int rb = type_rank(b);
  if (ra != rb) return ra < rb ? Ordering::Less : Ordering::Greater;
  switch (ra) {
    case 0: return Ordering::Equal;
    case 1: return compare_numbers(a, b);
    case 2: {
      int c = a.as_text().compare(b.as_text());
      if (c < 0) return Ordering::Less;
      if (c > 0) return Ordering::Greater;
      return Ordering::Equal;
    }
    case 3:
      if (a.as_bool() == b.as_bool()) return Ordering::Equal;
      return a.as_bool() ? Ordering::Greater : Ordering::Less;
    case 4: return compare_objects(a.as_object(), b.as_object());
    default: return compare_arrays(a.as_array(), b.as_array());
  }
}

Ordering compare_sort_labels(const SortLabel& a, const SortLabel& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i].direction != b[i].direction)
      return a[i].direction == SortDirection::Ascending ? Ordering::Less : Ordering::Greater;
    Ordering c = compare_default(a[i].value, b[i].value);
    if (c == Ordering::Equal) continue;
    if (a[i].direction == SortDirection::Descending)
      c = c == Ordering::Less ? Ordering::Greater : Ordering::Less;
    return c;
  }
  if (a.size() == b.size()) return Ordering::Equal;
  return a.size() < b.size() ? Ordering::Less : Ordering::Greater;
}

// --- Path ---

Path::Path(std::vector<std::string> segments) : segments_(std::move(segments)) {
  for (const std::string& s : segments_)
    if (s.empty()) throw eval_error("path segment must not be empty");
}

Path Path::parse(const std::string& text) {
  if (text.empty()) return Path();
  std::vector<std::string> segs;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = text.find('.', start);
    if (dot == std::string::npos) {
      segs.push_back(text.substr(start));
      break;
    }
    segs.push_back(text.substr(start, dot - start));
    start = dot + 1;
  }
  return Path(std::move(segs));
}

std::string Path::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i) out += '.';
    out += segments_[i];
  }
  return out;
}

Path Path::operator/(const std::string& segment) const {
  std::vector<std::string> segs = segments_;
  segs.push_back(segment);
  return Path(std::move(segs));
}

Path Path::operator/(const Path& rest) const {
  std::vector<std::string> segs = segments_;
  segs.insert(segs.end(), rest.segments_.begin(), rest.segments_.end());
  return Path(std::move(segs));
}

// --- subtree ---

namespace {

bool is_canonical_index(const std::string& s, std::size_t* out) {
  if (s.empty()) return false;
  if (s.size() > 1 && s[0] == '0') return false;
  std::size_t n = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    n = n * 10 + static_cast<std::size_t>(c - '0');
    if (n > 100000000) return false;
  }
  *out = n;
  return true;
}

Value resolve(const Value& v, const std::vector<std::string>& segs, std::size_t i) {
  if (i == segs.size()) return v;
  if (v.is_object()) {
    auto it = v.as_object().find(segs[i]);
    if (it == v.as_object().end()) return Value::undefined();
    return resolve(it->second, segs, i + 1);
  }
  if (v.is_array()) {
    std::size_t idx = 0;
    if (is_canonical_index(segs[i], &idx) && idx < v.as_array().size())
      return resolve(v.as_array()[idx], segs, i + 1);
    ValueArray results;
    for (const Value& elem : v.as_array()) {
      if (!elem.is_object()) continue;
      Value r = resolve(elem, segs, i);
      if (!r.is_undefined()) results.push_back(std::move(r));
    }
    if (results.empty()) return Value::undefined();
    return Value(std::move(results));
  }
  return Value::undefined();
}

}  // namespace

Value subtree(const Value& root, const Path& path) {
  return resolve(root, path.segments(), 0);
}

Value subtree(const Tree& tree, const Path& path) { return subtree(tree.root, path); }

Value attach_value(const Path& path, Value value) {
  if (path.empty()) {
    if (!value.is_object()) throw eval_error("attach at the root path requires an object");
    return value;
  }
  Value node = std::move(value);
  for (std::size_t i = path.size(); i-- > 0;) {
    ValueObject wrap;
    wrap.emplace(path[i], std::move(node));
    node = Value(std::move(wrap));
  }
  return node;
}

Tree attach(const Path& path, Value value) {
  return Tree{attach_value(path, std::move(value)), {}};
}

Value array_of(const Forest& forest, const Path& path) {
  ValueArray out;
  for (const Tree& t : forest) {
    Value v = subtree(t, path);
    if (!v.is_undefined()) out.push_back(std::move(v));
  }
  return Value(std::move(out));
}

Value merge(const Value& left, const Value& right) {
  if (!left.is_object() || !right.is_object()) return right;
  ValueObject out = left.as_object();
  for (const auto& [key, rv] : right.as_object()) {
    auto it = out.find(key);
    if (it != out.end() && it->second.is_object() && rv.is_object())
      it->second = merge(it->second, rv);
    else
      out[key] = rv;
  }
  return Value(std::move(out));
}

void set_at_path(Value& root, const Path& path, Value value) {
  if (path.empty()) {
    if (value.is_undefined()) {
      root = Value(ValueObject{});
      return;
    }
    if (!value.is_object()) throw eval_error("cannot replace the tree root with a non-object");
    root = std::move(value);
    return;
  }
  if (!root.is_object()) root = Value(ValueObject{});
  Value* node = &root;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    Value& child = node->as_object()[path[i]];
    if (!child.is_object()) child = Value(ValueObject{});
    node = &child;
  }
  if (value.is_undefined())
    node->as_object().erase(path[path.size() - 1]);
  else
    node->as_object()[path[path.size() - 1]] = std::move(value);
}

// --- JSON I/O ---

namespace {

Value from_nlohmann(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return Value(nullptr);
    case nlohmann::json::value_t::boolean: return Value(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return Value(static_cast<std::int64_t>(j.get<std::int64_t>()));
    case nlohmann::json::value_t::number_unsigned: {
      auto u = j.get<std::uint64_t>();
      if (u <= static_cast<std::uint64_t>(INT64_MAX))
        return Value(static_cast<std::int64_t>(u));
      return Value(static_cast<double>(u));
    }
    case nlohmann::json::value_t::number_float: return Value(j.get<double>());
    case nlohmann::json::value_t::string: return Value(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      ValueArray a;
      for (const auto& e : j) a.push_back(from_nlohmann(e));
      return Value(std::move(a));
    }
    case nlohmann::json::value_t::object: {
      ValueObject o;
      for (auto it = j.begin(); it != j.end(); ++it) o.emplace(it.key(), from_nlohmann(*it));
      return Value(std::move(o));
    }
    default: throw eval_error("unsupported JSON value type");
  }
}

nlohmann::json to_nlohmann(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Undefined:
    case ValueKind::Null: return nullptr;
    case ValueKind::Bool: return v.as_bool();
    case ValueKind::Int: return v.as_int();
    case ValueKind::Float: return v.as_float();
    case ValueKind::Text: return v.as_text();
    case ValueKind::Array: {
      nlohmann::json a = nlohmann::json::array();
      for (const Value& e : v.as_array()) a.push_back(to_nlohmann(e));
      return a;
    }
    case ValueKind::Object: {
      nlohmann::json o = nlohmann::json::object();
      for (const auto& [k, e] : v.as_object())
        if (!e.is_undefined()) o[k] = to_nlohmann(e);
      return o;
    }
  }
  return nullptr;
}

}  // namespace

Value Value::parse_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw eval_error("malformed JSON: " + text.substr(0, 80));
  return from_nlohmann(j);
}

std::string Value::to_json(int indent) const { return to_nlohmann(*this).dump(indent); }

}  // namespace mongolog
