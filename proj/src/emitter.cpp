#include "mongolog/emitter.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "mongolog/term.hpp"
#include "nlohmann/json.hpp"

namespace mongolog {

namespace {

// ---------------------------------------------------------------------------
// Shell-object document model. Object keys carry a quoting flag so emitted
// scripts can follow shell conventions (bare operator keys, quoted field
// names).
// ---------------------------------------------------------------------------

struct JsDoc;

struct JsField {
  std::string key;
  bool quote = false;
  std::shared_ptr<JsDoc> value;
};

struct JsDoc {
  enum class Kind { Null, Bool, Int, Float, Str, Arr, Obj };
  Kind kind = Kind::Null;
  bool b = false;
  std::int64_t i = 0;
  double f = 0.0;
  std::string s;
  std::vector<JsDoc> arr;
  std::vector<JsField> obj;

  static JsDoc null_() { return JsDoc{}; }
  static JsDoc boolean(bool v) {
    JsDoc d;
    d.kind = Kind::Bool;
    d.b = v;
    return d;
  }
  static JsDoc integer(std::int64_t v) {
    JsDoc d;
    d.kind = Kind::Int;
    d.i = v;
    return d;
  }
  static JsDoc real(double v) {
    JsDoc d;
    d.kind = Kind::Float;
    d.f = v;
    return d;
  }
  static JsDoc str(std::string v) {
    JsDoc d;
    d.kind = Kind::Str;
    d.s = std::move(v);
    return d;
  }
  static JsDoc array(std::vector<JsDoc> v = {}) {
    JsDoc d;
    d.kind = Kind::Arr;
    d.arr = std::move(v);
    return d;
  }
  static JsDoc object() {
    JsDoc d;
    d.kind = Kind::Obj;
    return d;
  }

  JsDoc& field(std::string key, JsDoc value, bool quote = false) {
    obj.push_back(JsField{std::move(key), quote, std::make_shared<JsDoc>(std::move(value))});
    return *this;
  }
  const JsDoc* find(const std::string& key) const {
    for (const JsField& f : obj)
      if (f.key == key) return f.value.get();
    return nullptr;
  }
};

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_' && s[0] != '$') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '$') return false;
  return true;
}

std::string escape_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string render_number(double v) { return nlohmann::json(v).dump(); }

// ---------------------------------------------------------------------------
// Layout: values render on one line when short enough, otherwise one
// field/element per line with two-space indentation.
// ---------------------------------------------------------------------------

void render(const JsDoc& d, std::string& out, int indent);

std::string render_inline(const JsDoc& d) {
  switch (d.kind) {
    case JsDoc::Kind::Null: return "null";
    case JsDoc::Kind::Bool: return d.b ? "true" : "false";
    case JsDoc::Kind::Int: return std::to_string(d.i);
    case JsDoc::Kind::Float: return render_number(d.f);
    case JsDoc::Kind::Str: return escape_string(d.s);
    case JsDoc::Kind::Arr: {
      if (d.arr.empty()) return "[]";
      std::string out = "[";
      for (std::size_t k = 0; k < d.arr.size(); ++k) {
        if (k) out += ", ";
        out += render_inline(d.arr[k]);
      }
      return out + "]";
    }
    case JsDoc::Kind::Obj: {
      if (d.obj.empty()) return "{}";
      std::string out = "{ ";
      for (std::size_t k = 0; k < d.obj.size(); ++k) {
        if (k) out += ", ";
        const JsField& f = d.obj[k];
        out += f.quote ? escape_string(f.key) : f.key;
        out += ": ";
        out += render_inline(*f.value);
      }
      return out + " }";
    }
  }
  return "";
}

void render(const JsDoc& d, std::string& out, int indent) {
  std::string flat = render_inline(d);
  if (static_cast<int>(flat.size()) + indent * 2 <= 92) {
    out += flat;
    return;
  }
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (d.kind == JsDoc::Kind::Arr) {
    out += "[\n";
    for (std::size_t k = 0; k < d.arr.size(); ++k) {
      out += pad_in;
      render(d.arr[k], out, indent + 1);
      if (k + 1 < d.arr.size()) out += ',';
      out += '\n';
    }
    out += pad + "]";
    return;
  }
  if (d.kind == JsDoc::Kind::Obj) {
    out += "{\n";
    for (std::size_t k = 0; k < d.obj.size(); ++k) {
      const JsField& f = d.obj[k];
      out += pad_in;
      out += f.quote ? escape_string(f.key) : f.key;
      out += ": ";
      render(*f.value, out, indent + 1);
      if (k + 1 < d.obj.size()) out += ',';
      out += '\n';
    }
    out += pad + "}";
    return;
  }
  out += flat;
}

// ---------------------------------------------------------------------------
// Value <-> JsDoc
// ---------------------------------------------------------------------------

JsDoc jsdoc_of_value(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Undefined:
    case ValueKind::Null: return JsDoc::null_();
    case ValueKind::Bool: return JsDoc::boolean(v.as_bool());
    case ValueKind::Int: return JsDoc::integer(v.as_int());
    case ValueKind::Float: return JsDoc::real(v.as_float());
    case ValueKind::Text: return JsDoc::str(v.as_text());
    case ValueKind::Array: {
      JsDoc d = JsDoc::array();
      for (const Value& e : v.as_array()) d.arr.push_back(jsdoc_of_value(e));
      return d;
    }
    case ValueKind::Object: {
      JsDoc d = JsDoc::object();
      for (const auto& [k, e] : v.as_object()) d.field(k, jsdoc_of_value(e), true);
      return d;
    }
  }
  return JsDoc::null_();
}

Value value_of_jsdoc(const JsDoc& d) {
  switch (d.kind) {
    case JsDoc::Kind::Null: return Value(nullptr);
    case JsDoc::Kind::Bool: return Value(d.b);
    case JsDoc::Kind::Int: return Value(d.i);
    case JsDoc::Kind::Float: return Value(d.f);
    case JsDoc::Kind::Str: return Value(d.s);
    case JsDoc::Kind::Arr: {
      ValueArray arr;
      for (const JsDoc& e : d.arr) arr.push_back(value_of_jsdoc(e));
      return Value(std::move(arr));
    }
    case JsDoc::Kind::Obj: {
      ValueObject obj;
      for (const JsField& f : d.obj) obj.emplace(f.key, value_of_jsdoc(*f.value));
      return Value(std::move(obj));
    }
  }
  return Value(nullptr);
}

// ---------------------------------------------------------------------------
// Expression emission. `lets` holds lookup variable names in scope; inside a
// filter body, paths resolve against the element alias instead.
// ---------------------------------------------------------------------------

struct EmitCtx {
  std::set<std::string> lets;
  std::string element_alias;  // non-empty inside a per-element criterion
  bool* approximate = nullptr;
};

std::string dotted(const Path& p) {
  std::string out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k) out += '.';
    out += p[k];
  }
  return out;
}

std::string emit_path(const Path& p, const EmitCtx& ctx) {
  if (!ctx.element_alias.empty()) {
    if (p.empty()) return "$$" + ctx.element_alias;
    return "$$" + ctx.element_alias + "." + dotted(p);
  }
  if (p.empty()) return "$$ROOT";
  if (ctx.lets.count(p[0])) return "$$" + dotted(p);
  return "$" + dotted(p);
}

JsDoc emit_expr(const ValueDef& d, const EmitCtx& ctx);
JsDoc emit_bool(const BoolExpr& b, const EmitCtx& ctx);

JsDoc emit_const(const Value& v) {
  if (v.is_array() || v.is_object()) return JsDoc::object().field("$literal", jsdoc_of_value(v));
  if (v.is_text() && !v.as_text().empty() && v.as_text()[0] == '$')
    return JsDoc::object().field("$literal", jsdoc_of_value(v));
  return jsdoc_of_value(v);
}

JsDoc type_is_missing(const std::string& path_text) {
  JsDoc type_of = JsDoc::object().field("$type", JsDoc::str(path_text));
  return JsDoc::object().field(
      "$ne", JsDoc::array({std::move(type_of), JsDoc::str("missing")}));
}

JsDoc emit_bool(const BoolExpr& b, const EmitCtx& ctx) {
  switch (b.kind()) {
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or: {
      JsDoc args = JsDoc::array();
      for (const BoolExpr& a : b.args()) args.arr.push_back(emit_bool(a, ctx));
      return JsDoc::object().field(b.kind() == BoolExpr::Kind::And ? "$and" : "$or",
                                   std::move(args));
    }
    case BoolExpr::Kind::Not:
      return JsDoc::object().field("$not", JsDoc::array({emit_bool(b.args()[0], ctx)}));
    case BoolExpr::Kind::Eq:
      return JsDoc::object().field(
          "$eq", JsDoc::array({emit_expr(b.lhs(), ctx), emit_expr(b.rhs(), ctx)}));
    case BoolExpr::Kind::SubsetEq:
      return JsDoc::object().field(
          "$setIsSubset", JsDoc::array({emit_expr(b.lhs(), ctx), emit_expr(b.rhs(), ctx)}));
    case BoolExpr::Kind::Exists: return type_is_missing(emit_path(b.path(), ctx));
  }
  return JsDoc::null_();
}

void mark_approximate(const EmitCtx& ctx) {
  if (ctx.approximate) *ctx.approximate = true;
}

// Splices the stored binding of one variable element into flat-array form.
JsDoc var_element_expansion(const std::string& key, const std::string& name,
                            const std::string& root_ref) {
  std::string stored = root_ref + "." + name;
  JsDoc bound = type_is_missing(stored);

  JsDoc key_expr = key == "0" ? JsDoc::str("$$s.k")
                              : JsDoc::object().field(
                                    "$concat", JsDoc::array({JsDoc::str(key + "."),
                                                             JsDoc::str("$$s.k")}));
  JsDoc mapped = JsDoc::object()
                     .field("k", std::move(key_expr))
                     .field("v", JsDoc::str("$$s.v"))
                     .field("n", JsDoc::str("$$s.n"));
  JsDoc splice = JsDoc::object().field(
      "$map", JsDoc::object()
                  .field("input", JsDoc::str(stored))
                  .field("as", JsDoc::str("s"))
                  .field("in", std::move(mapped)));
  JsDoc scalar = JsDoc::array(
      {JsDoc::object().field("k", JsDoc::str(key)).field("v", JsDoc::str(stored))});
  JsDoc is_array = JsDoc::object().field("$isArray", JsDoc::str(stored));
  JsDoc bound_case = JsDoc::object().field(
      "$cond", JsDoc::array({std::move(is_array), std::move(splice), std::move(scalar)}));

  ValueObject free_elem;
  free_elem.emplace("k", Value(key));
  free_elem.emplace("n", Value(name));
  ValueArray free_arr;
  free_arr.push_back(Value(std::move(free_elem)));
  JsDoc free_case = JsDoc::object().field("$literal", jsdoc_of_value(Value(std::move(free_arr))));

  return JsDoc::object().field(
      "$cond", JsDoc::array({std::move(bound), std::move(bound_case), std::move(free_case)}));
}

JsDoc emit_term_expr(const ValueDef& d, const EmitCtx& ctx) {
  mark_approximate(ctx);
  FlatTerm flat = flatten(d.term(), Path::root(), Path::root(), Tree{});
  ValueArray spec;
  for (const FlatElem& e : flat) spec.push_back(flat_elem_value(e));

  std::string root_ref = "$$root";
  JsDoc pieces = JsDoc::array();
  for (const FlatElem& e : flat) {
    if (e.name) {
      pieces.arr.push_back(var_element_expansion(e.key, *e.name, root_ref));
    } else {
      ValueArray one;
      one.push_back(flat_elem_value(e));
      pieces.arr.push_back(
          JsDoc::object().field("$literal", jsdoc_of_value(Value(std::move(one)))));
    }
  }
  JsDoc body = JsDoc::object().field("$concatArrays", std::move(pieces));

  if (!d.bool_expr().is_truth()) {
    EmitCtx elem = ctx;
    elem.element_alias = "e";
    body = JsDoc::object().field(
        "$filter", JsDoc::object()
                       .field("input", std::move(body))
                       .field("as", JsDoc::str("e"))
                       .field("cond", emit_bool(d.bool_expr(), elem)));
  }

  JsDoc vars = JsDoc::object()
                   .field("term", JsDoc::object().field("$literal",
                                                        jsdoc_of_value(Value(std::move(spec)))))
                   .field("root", JsDoc::str(emit_path(d.path(), ctx)));
  return JsDoc::object().field(
      "$let", JsDoc::object().field("vars", std::move(vars)).field("in", std::move(body)));
}

JsDoc emit_fact(const ValueDef& d, const EmitCtx& ctx) {
  mark_approximate(ctx);
  JsDoc entries = JsDoc::object().field("$objectToArray", JsDoc::str("$$fact"));
  JsDoc keep = JsDoc::object().field(
      "$ne", JsDoc::array({JsDoc::str("$$f.k"), JsDoc::str("_id")}));
  JsDoc filtered = JsDoc::object().field(
      "$filter", JsDoc::object()
                     .field("input", std::move(entries))
                     .field("as", JsDoc::str("f"))
                     .field("cond", std::move(keep)));
  JsDoc mapped = JsDoc::object().field(
      "$map",
      JsDoc::object()
          .field("input", std::move(filtered))
          .field("as", JsDoc::str("f"))
          .field("in",
                 JsDoc::object().field("k", JsDoc::str("$$f.k")).field("v", JsDoc::str("$$f.v"))));
  JsDoc vars = JsDoc::object().field("fact", JsDoc::str(emit_path(d.path(), ctx)));
  return JsDoc::object().field(
      "$let", JsDoc::object().field("vars", std::move(vars)).field("in", std::move(mapped)));
}

// Key-prefix selection shared by the subterm and binding expansions:
// elements of $$<arr> whose key equals $$key or extends it by a dot.
JsDoc key_extension_filter(const std::string& arr_ref) {
  JsDoc equals = JsDoc::object().field(
      "$eq", JsDoc::array({JsDoc::str("$$s.k"), JsDoc::str("$$key")}));
  JsDoc prefixed = JsDoc::object().field(
      "$concat", JsDoc::array({JsDoc::str("$$key"), JsDoc::str(".")}));
  JsDoc index = JsDoc::object().field(
      "$indexOfBytes", JsDoc::array({JsDoc::str("$$s.k"), std::move(prefixed)}));
  JsDoc extends = JsDoc::object().field(
      "$eq", JsDoc::array({std::move(index), JsDoc::integer(0)}));
  JsDoc cond =
      JsDoc::object().field("$or", JsDoc::array({std::move(equals), std::move(extends)}));
  return JsDoc::object().field(
      "$filter", JsDoc::object()
                     .field("input", JsDoc::str(arr_ref))
                     .field("as", JsDoc::str("s"))
                     .field("cond", std::move(cond)));
}

JsDoc stripped_key_expr() {
  JsDoc equals = JsDoc::object().field(
      "$eq", JsDoc::array({JsDoc::str("$$s.k"), JsDoc::str("$$key")}));
  JsDoc offset = JsDoc::object().field(
      "$add", JsDoc::array({JsDoc::object().field("$strLenBytes", JsDoc::str("$$key")),
                            JsDoc::integer(1)}));
  JsDoc rest = JsDoc::object().field(
      "$substrBytes",
      JsDoc::array({JsDoc::str("$$s.k"), std::move(offset), JsDoc::integer(1024)}));
  return JsDoc::object().field(
      "$cond", JsDoc::array({std::move(equals), JsDoc::str("0"), std::move(rest)}));
}

JsDoc subterm_expansion(const std::string& arr_ref) {
  JsDoc mapped = JsDoc::object()
                     .field("k", stripped_key_expr())
                     .field("v", JsDoc::str("$$s.v"))
                     .field("n", JsDoc::str("$$s.n"));
  return JsDoc::object().field(
      "$map", JsDoc::object()
                  .field("input", key_extension_filter(arr_ref))
                  .field("as", JsDoc::str("s"))
                  .field("in", std::move(mapped)));
}

JsDoc emit_subterm(const ValueDef& d, const EmitCtx& ctx) {
  mark_approximate(ctx);
  JsDoc vars = JsDoc::object()
                   .field("sub", JsDoc::str(emit_path(d.path(), ctx)))
                   .field("key", JsDoc::str(d.key()));
  return JsDoc::object().field(
      "$let",
      JsDoc::object().field("vars", std::move(vars)).field("in", subterm_expansion("$$sub")));
}

JsDoc emit_binding(const ValueDef& d, const EmitCtx& ctx) {
  mark_approximate(ctx);
  JsDoc first_key = JsDoc::object().field(
      "$arrayElemAt", JsDoc::array({JsDoc::str("$$m.k"), JsDoc::integer(0)}));
  JsDoc scalar_case = JsDoc::object().field(
      "$and",
      JsDoc::array({JsDoc::object().field("$eq", JsDoc::array({JsDoc::object().field(
                                                                   "$size", JsDoc::str("$$m")),
                                                               JsDoc::integer(1)})),
                    JsDoc::object().field("$eq", JsDoc::array({std::move(first_key),
                                                               JsDoc::str("0")}))}));
  JsDoc scalar = JsDoc::object().field(
      "$arrayElemAt", JsDoc::array({JsDoc::str("$$m.v"), JsDoc::integer(0)}));
  JsDoc unwrap = JsDoc::object().field(
      "$cond", JsDoc::array({std::move(scalar_case), std::move(scalar), JsDoc::str("$$m")}));
  JsDoc inner_let = JsDoc::object().field(
      "$let", JsDoc::object()
                  .field("vars", JsDoc::object().field("m", subterm_expansion("$$bind")))
                  .field("in", std::move(unwrap)));
  JsDoc vars = JsDoc::object()
                   .field("bind", JsDoc::str(emit_path(d.path(), ctx)))
                   .field("key", JsDoc::str(d.key()));
  return JsDoc::object().field(
      "$let", JsDoc::object().field("vars", std::move(vars)).field("in", std::move(inner_let)));
}

JsDoc emit_instantiate(const ValueDef& d, const EmitCtx& ctx) {
  mark_approximate(ctx);
  JsDoc constants = JsDoc::object().field(
      "$filter", JsDoc::object()
                     .field("input", JsDoc::str("$$inst"))
                     .field("as", JsDoc::str("s"))
                     .field("cond", type_is_missing("$$s.v")));

  JsDoc var_key = JsDoc::object().field(
      "$or",
      JsDoc::array(
          {JsDoc::object().field("$eq", JsDoc::array({JsDoc::str("$$s.k"), JsDoc::str("$$t.k")})),
           JsDoc::object().field(
               "$eq",
               JsDoc::array({JsDoc::object().field(
                                 "$indexOfBytes",
                                 JsDoc::array({JsDoc::str("$$s.k"),
                                               JsDoc::object().field(
                                                   "$concat",
                                                   JsDoc::array({JsDoc::str("$$t.k"),
                                                                 JsDoc::str(".")}))})),
                             JsDoc::integer(0)}))}));
  JsDoc is_var = type_is_missing("$$t.n");
  JsDoc per_target = JsDoc::object().field(
      "$map", JsDoc::object()
                  .field("input", JsDoc::str("$$inst"))
                  .field("as", JsDoc::str("t"))
                  .field("in", JsDoc::object().field(
                                   "$and", JsDoc::array({std::move(is_var), std::move(var_key)}))));
  JsDoc extends_var = JsDoc::object().field("$anyElementTrue", std::move(per_target));
  JsDoc additions = JsDoc::object().field(
      "$filter", JsDoc::object()
                     .field("input", JsDoc::str("$$with"))
                     .field("as", JsDoc::str("s"))
                     .field("cond", std::move(extends_var)));
  JsDoc body = JsDoc::object().field(
      "$concatArrays", JsDoc::array({std::move(constants), std::move(additions)}));
  JsDoc vars = JsDoc::object()
                   .field("inst", JsDoc::str(emit_path(d.path(), ctx)))
                   .field("with", JsDoc::str(emit_path(d.second_path(), ctx)));
  return JsDoc::object().field(
      "$let", JsDoc::object().field("vars", std::move(vars)).field("in", std::move(body)));
}

JsDoc emit_expr(const ValueDef& d, const EmitCtx& ctx) {
  switch (d.kind()) {
    case ValueDef::Kind::Const: return emit_const(d.const_value());
    case ValueDef::Kind::PathRef: return JsDoc::str(emit_path(d.path(), ctx));
    case ValueDef::Kind::Array: {
      JsDoc arr = JsDoc::array();
      for (const ValueDef& e : d.elements()) arr.arr.push_back(emit_expr(e, ctx));
      return arr;
    }
    case ValueDef::Kind::Bool: return emit_bool(d.bool_expr(), ctx);
    case ValueDef::Kind::Cond:
      return JsDoc::object().field(
          "$cond", JsDoc::array({emit_bool(d.bool_expr(), ctx), emit_expr(d.then_def(), ctx),
                                 emit_expr(d.else_def(), ctx)}));
    case ValueDef::Kind::SortKeyOf: throw emit_error("sort key outside a sort stage");
    case ValueDef::Kind::TermExpr: return emit_term_expr(d, ctx);
    case ValueDef::Kind::Fact: return emit_fact(d, ctx);
    case ValueDef::Kind::Subterm: return emit_subterm(d, ctx);
    case ValueDef::Kind::Binding: return emit_binding(d, ctx);
    case ValueDef::Kind::Instantiate: return emit_instantiate(d, ctx);
    case ValueDef::Kind::Filter: {
      EmitCtx elem = ctx;
      elem.element_alias = "e";
      return JsDoc::object().field(
          "$filter", JsDoc::object()
                         .field("input", JsDoc::str(emit_path(d.path(), ctx)))
                         .field("as", JsDoc::str("e"))
                         .field("cond", emit_bool(d.bool_expr(), elem)));
    }
  }
  throw emit_error("unknown value definition");
}

// ---------------------------------------------------------------------------
// Stage emission
// ---------------------------------------------------------------------------

// Numbers and booleans act as inclusion flags in $project, so constants
// there always go through $literal.
JsDoc emit_project_value(const ValueDef& d, const EmitCtx& ctx) {
  if (d.kind() == ValueDef::Kind::Const) {
    const Value& v = d.const_value();
    if (!v.is_text()) return JsDoc::object().field("$literal", jsdoc_of_value(v));
  }
  return emit_expr(d, ctx);
}

JsDoc emit_stage(const Stage& s, const EmitCtx& ctx) {
  switch (s.kind()) {
    case Stage::Kind::Match: {
      JsDoc expr = JsDoc::object().field("$expr", emit_bool(s.criterion(), ctx));
      return JsDoc::object().field("$match", std::move(expr));
    }
    case Stage::Kind::Unwind:
      return JsDoc::object().field("$unwind", JsDoc::str("$" + dotted(s.path())));
    case Stage::Kind::UnwindPreserve: {
      JsDoc spec = JsDoc::object()
                       .field("path", JsDoc::str("$" + dotted(s.path())))
                       .field("preserveNullAndEmptyArrays", JsDoc::boolean(true));
      return JsDoc::object().field("$unwind", std::move(spec));
    }
    case Stage::Kind::Project: {
      const auto& items = s.items();
      if (!items.empty() && items[0].kind == ProjectItem::Kind::Keep && items[0].target.empty()) {
        JsDoc fields = JsDoc::object();
        for (std::size_t k = 1; k < items.size(); ++k) {
          if (items[k].kind != ProjectItem::Kind::Set)
            throw emit_error("keep after whole-document keep");
          fields.field(dotted(items[k].target), emit_project_value(*items[k].def, ctx), true);
        }
        return JsDoc::object().field("$addFields", std::move(fields));
      }
      JsDoc fields = JsDoc::object();
      if (items.empty()) {
        fields.field("_id", JsDoc::integer(1), true);
      } else {
        for (const ProjectItem& item : items) {
          if (item.kind == ProjectItem::Kind::Keep) {
            if (item.target.empty()) throw emit_error("whole-document keep after other items");
            fields.field(dotted(item.target), JsDoc::integer(1), true);
          } else {
            fields.field(dotted(item.target), emit_project_value(*item.def, ctx), true);
          }
        }
      }
      return JsDoc::object().field("$project", std::move(fields));
    }
    case Stage::Kind::Sort: {
      JsDoc keys = JsDoc::object();
      for (const SortEntry& e : s.sort_entries())
        keys.field(dotted(e.path),
                   JsDoc::integer(e.direction == SortDirection::Ascending ? 1 : -1), true);
      return JsDoc::object().field("$sort", std::move(keys));
    }
    case Stage::Kind::Limit: return JsDoc::object().field("$limit", JsDoc::integer(s.count()));
    case Stage::Kind::Lookup: {
      JsDoc lets = JsDoc::object();
      for (const LookupVar& v : s.lookup_vars())
        lets.field(v.name, emit_expr(v.def, ctx), !is_identifier(v.name));
      EmitCtx inner_ctx = ctx;
      for (const LookupVar& v : s.lookup_vars()) inner_ctx.lets.insert(v.name);
      JsDoc inner = JsDoc::array();
      for (const Stage& st : s.inner()) inner.arr.push_back(emit_stage(st, inner_ctx));
      JsDoc spec = JsDoc::object()
                       .field("from", JsDoc::str(s.source().is_one ? "one" : s.source().name))
                       .field("let", std::move(lets))
                       .field("pipeline", std::move(inner))
                       .field("as", JsDoc::str(dotted(s.path())));
      return JsDoc::object().field("$lookup", std::move(spec));
    }
    case Stage::Kind::GraphLookup: {
      JsDoc start;
      if (s.starts().size() == 1) {
        start = emit_expr(s.starts()[0], ctx);
      } else {
        start = JsDoc::array();
        for (const ValueDef& e : s.starts()) start.arr.push_back(emit_expr(e, ctx));
      }
      JsDoc spec = JsDoc::object()
                       .field("from", JsDoc::str(s.source().is_one ? "one" : s.source().name))
                       .field("startWith", std::move(start))
                       .field("connectToField", JsDoc::str(dotted(s.connect_to())))
                       .field("connectFromField", JsDoc::str(dotted(s.connect_from())))
                       .field("as", JsDoc::str(dotted(s.path())));
      if (s.depth_field()) spec.field("depthField", JsDoc::str(dotted(*s.depth_field())));
      if (s.max_depth()) spec.field("maxDepth", JsDoc::integer(*s.max_depth()));
      if (!s.criterion().is_truth())
        spec.field("restrictSearchWithMatch",
                   JsDoc::object().field("$expr", emit_bool(s.criterion(), ctx)));
      return JsDoc::object().field("$graphLookup", std::move(spec));
    }
  }
  throw emit_error("unknown stage");
}

}  // namespace

std::string emit(const Pipeline& stages, const CollRef& source) {
  bool approximate = false;
  EmitCtx ctx;
  ctx.approximate = &approximate;

  JsDoc arr = JsDoc::array();
  for (const Stage& s : stages) arr.arr.push_back(emit_stage(s, ctx));

  std::string name = source.is_one ? "one" : source.name;
  std::string head =
      is_identifier(name) ? "db." + name : "db.getCollection(" + escape_string(name) + ")";

  std::string body;
  if (arr.arr.empty()) {
    body = "[]";
  } else {
    body = "[\n";
    for (std::size_t k = 0; k < arr.arr.size(); ++k) {
      body += "  ";
      render(arr.arr[k], body, 1);
      if (k + 1 < arr.arr.size()) body += ',';
      body += '\n';
    }
    body += "]";
  }

  std::string out;
  if (approximate)
    out += "// approximate term-expression encodings; engine evaluation is authoritative\n";
  out += head + ".aggregate(" + body + ")\n";
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Kind { Str, Num, Ident, Punct, End };
  Kind kind = Kind::End;
  std::string text;  // decoded for Str
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '/') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      std::string s;
      ++i;
      while (i < n && text[i] != quote) {
        if (text[i] == '\\' && i + 1 < n) {
          ++i;
          switch (text[i]) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            case 'r': s += '\r'; break;
            case 'u': {
              if (i + 4 >= n) throw emit_error("truncated escape");
              s += static_cast<char>(std::stoi(text.substr(i + 1, 4), nullptr, 16));
              i += 4;
              break;
            }
            default: s += text[i];
          }
          ++i;
        } else {
          s += text[i++];
        }
      }
      if (i >= n) throw emit_error("unterminated string");
      ++i;
      out.push_back(Token{Token::Kind::Str, std::move(s)});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t start = i;
      if (c == '-') ++i;
      while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' ||
                       text[i] == 'e' || text[i] == 'E' ||
                       ((text[i] == '+' || text[i] == '-') &&
                        (text[i - 1] == 'e' || text[i - 1] == 'E'))))
        ++i;
      out.push_back(Token{Token::Kind::Num, text.substr(start, i - start)});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t start = i;
      while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
                       text[i] == '$'))
        ++i;
      out.push_back(Token{Token::Kind::Ident, text.substr(start, i - start)});
      continue;
    }
    if (std::string("{}[]():,.;").find(c) != std::string::npos) {
      out.push_back(Token{Token::Kind::Punct, std::string(1, c)});
      ++i;
      continue;
    }
    throw emit_error("unexpected character '" + std::string(1, c) + "'");
  }
  out.push_back(Token{Token::Kind::End, ""});
  return out;
}

// ---------------------------------------------------------------------------
// Parser: token stream -> JsDoc -> stages
// ---------------------------------------------------------------------------

class ScriptParser {
 public:
  explicit ScriptParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SourcedPipeline parse() {
    expect_ident("db");
    expect_punct(".");
    CollRef source = parse_source();
    expect_punct(".");
    expect_ident("aggregate");
    expect_punct("(");
    JsDoc stages = parse_value();
    expect_punct(")");
    if (peek().kind == Token::Kind::Punct && peek().text == ";") ++pos_;
    if (peek().kind != Token::Kind::End) throw emit_error("trailing input after script");
    if (stages.kind != JsDoc::Kind::Arr) throw emit_error("aggregate expects an array");

    SourcedPipeline out;
    out.source = source;
    for (const JsDoc& s : stages.arr) out.stages.push_back(decode_stage(s));
    return out;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  void expect_ident(const std::string& t) {
    const Token& tok = next();
    if (tok.kind != Token::Kind::Ident || tok.text != t)
      throw emit_error("expected '" + t + "'");
  }
  void expect_punct(const std::string& t) {
    const Token& tok = next();
    if (tok.kind != Token::Kind::Punct || tok.text != t)
      throw emit_error("expected '" + t + "'");
  }

  CollRef parse_source() {
    const Token& tok = next();
    if (tok.kind != Token::Kind::Ident) throw emit_error("expected collection name");
    std::string name = tok.text;
    if (name == "getCollection") {
      expect_punct("(");
      const Token& s = next();
      if (s.kind != Token::Kind::Str) throw emit_error("getCollection expects a string");
      name = s.text;
      expect_punct(")");
    }
    return name == "one" ? CollRef::one() : CollRef::named(name);
  }

  JsDoc parse_value() {
    const Token& tok = next();
    switch (tok.kind) {
      case Token::Kind::Str: return JsDoc::str(tok.text);
      case Token::Kind::Num: {
        if (tok.text.find_first_of(".eE") != std::string::npos)
          return JsDoc::real(std::stod(tok.text));
        return JsDoc::integer(std::stoll(tok.text));
      }
      case Token::Kind::Ident: {
        if (tok.text == "true") return JsDoc::boolean(true);
        if (tok.text == "false") return JsDoc::boolean(false);
        if (tok.text == "null") return JsDoc::null_();
        throw emit_error("unexpected identifier '" + tok.text + "'");
      }
      case Token::Kind::Punct: {
        if (tok.text == "[") {
          JsDoc arr = JsDoc::array();
          if (peek().kind == Token::Kind::Punct && peek().text == "]") {
            ++pos_;
            return arr;
          }
          while (true) {
            arr.arr.push_back(parse_value());
            const Token& sep = next();
            if (sep.kind != Token::Kind::Punct) throw emit_error("expected ',' or ']'");
            if (sep.text == "]") break;
            if (sep.text != ",") throw emit_error("expected ',' or ']'");
          }
          return arr;
        }
        if (tok.text == "{") {
          JsDoc obj = JsDoc::object();
          if (peek().kind == Token::Kind::Punct && peek().text == "}") {
            ++pos_;
            return obj;
          }
          while (true) {
            const Token& key = next();
            if (key.kind != Token::Kind::Ident && key.kind != Token::Kind::Str)
              throw emit_error("expected object key");
            expect_punct(":");
            obj.field(key.text, parse_value(), key.kind == Token::Kind::Str);
            const Token& sep = next();
            if (sep.kind != Token::Kind::Punct) throw emit_error("expected ',' or '}'");
            if (sep.text == "}") break;
            if (sep.text != ",") throw emit_error("expected ',' or '}'");
          }
          return obj;
        }
        break;
      }
      default: break;
    }
    throw emit_error("unexpected token");
  }

  // ----- decoding -----

  static std::string single_key(const JsDoc& d) {
    if (d.kind != JsDoc::Kind::Obj || d.obj.size() != 1)
      throw emit_error("expected a single-operator object");
    return d.obj[0].key;
  }

  static Path path_of_ref(const std::string& s, const std::string& element_alias) {
    if (s.rfind("$$", 0) == 0) {
      std::string rest = s.substr(2);
      if (rest == "ROOT") return Path::root();
      if (!element_alias.empty()) {
        if (rest == element_alias) return Path::root();
        std::string pfx = element_alias + ".";
        if (rest.rfind(pfx, 0) == 0) return Path::parse(rest.substr(pfx.size()));
      }
      return Path::parse(rest);
    }
    if (!s.empty() && s[0] == '$') return Path::parse(s.substr(1));
    throw emit_error("expected a path reference");
  }

  static bool is_path_ref(const JsDoc& d) {
    return d.kind == JsDoc::Kind::Str && !d.s.empty() && d.s[0] == '$';
  }

  ValueDef decode_expr(const JsDoc& d, const std::string& alias) {
    switch (d.kind) {
      case JsDoc::Kind::Null:
      case JsDoc::Kind::Bool:
      case JsDoc::Kind::Int:
      case JsDoc::Kind::Float: return ValueDef::constant(value_of_jsdoc(d));
      case JsDoc::Kind::Str:
        if (is_path_ref(d)) return ValueDef::path_ref(path_of_ref(d.s, alias));
        return ValueDef::constant(Value(d.s));
      case JsDoc::Kind::Arr: {
        std::vector<ValueDef> elems;
        for (const JsDoc& e : d.arr) elems.push_back(decode_expr(e, alias));
        return ValueDef::array(std::move(elems));
      }
      case JsDoc::Kind::Obj: break;
    }
    std::string op = single_key(d);
    const JsDoc& body = *d.obj[0].value;
    if (op == "$literal") return ValueDef::constant(value_of_jsdoc(body));
    if (op == "$cond") {
      if (body.kind != JsDoc::Kind::Arr || body.arr.size() != 3)
        throw emit_error("$cond expects three operands");
      return ValueDef::cond(decode_bool(body.arr[0], alias), decode_expr(body.arr[1], alias),
                            decode_expr(body.arr[2], alias));
    }
    if (op == "$filter") {
      const JsDoc* input = body.find("input");
      const JsDoc* cond = body.find("cond");
      const JsDoc* as = body.find("as");
      if (!input || !cond || !as) throw emit_error("$filter expects input/as/cond");
      if (!is_path_ref(*input)) throw emit_error("unsupported construct: computed filter input");
      return ValueDef::filter(path_of_ref(input->s, alias), decode_bool(*cond, as->s));
    }
    if (op == "$let") return decode_marker(body, alias);
    if (op == "$and" || op == "$or" || op == "$not" || op == "$eq" || op == "$ne" ||
        op == "$setIsSubset")
      return ValueDef::boolean(decode_bool(d, alias));
    throw emit_error("unsupported construct: " + op);
  }

  BoolExpr decode_bool(const JsDoc& d, const std::string& alias) {
    std::string op = single_key(d);
    const JsDoc& body = *d.obj[0].value;
    if (op == "$and" || op == "$or") {
      if (body.kind != JsDoc::Kind::Arr) throw emit_error(op + " expects an array");
      std::vector<BoolExpr> args;
      for (const JsDoc& a : body.arr) args.push_back(decode_bool(a, alias));
      return op == "$and" ? BoolExpr::and_(std::move(args)) : BoolExpr::or_(std::move(args));
    }
    if (op == "$not") {
      if (body.kind == JsDoc::Kind::Arr && body.arr.size() == 1)
        return BoolExpr::not_(decode_bool(body.arr[0], alias));
      return BoolExpr::not_(decode_bool(body, alias));
    }
    if (op == "$eq" || op == "$setIsSubset") {
      if (body.kind != JsDoc::Kind::Arr || body.arr.size() != 2)
        throw emit_error(op + " expects two operands");
      ValueDef l = decode_expr(body.arr[0], alias);
      ValueDef r = decode_expr(body.arr[1], alias);
      return op == "$eq" ? BoolExpr::eq(std::move(l), std::move(r))
                         : BoolExpr::subset_eq(std::move(l), std::move(r));
    }
    if (op == "$ne") {
      // Existence checks are the only $ne emit produces.
      if (body.kind == JsDoc::Kind::Arr && body.arr.size() == 2 &&
          body.arr[0].kind == JsDoc::Kind::Obj && body.arr[1].kind == JsDoc::Kind::Str &&
          body.arr[1].s == "missing") {
        const JsDoc& type_of = body.arr[0];
        if (type_of.obj.size() == 1 && type_of.obj[0].key == "$type" &&
            type_of.obj[0].value->kind == JsDoc::Kind::Str)
          return BoolExpr::exists(path_of_ref(type_of.obj[0].value->s, alias));
      }
      throw emit_error("unsupported construct: $ne");
    }
    throw emit_error("unsupported construct: " + op);
  }

  ValueDef decode_marker(const JsDoc& body, const std::string& alias) {
    const JsDoc* vars = body.find("vars");
    const JsDoc* in = body.find("in");
    if (!vars || !in || vars->kind != JsDoc::Kind::Obj) throw emit_error("malformed $let");

    const JsDoc* term = vars->find("term");
    const JsDoc* root = vars->find("root");
    if (term && root) {
      if (term->kind != JsDoc::Kind::Obj || term->obj.size() != 1 ||
          term->obj[0].key != "$literal")
        throw emit_error("malformed term payload");
      Value flat_value = value_of_jsdoc(*term->obj[0].value);
      if (!flat_value.is_array()) throw emit_error("malformed term payload");
      FlatTerm flat;
      for (const Value& e : flat_value.as_array()) {
        auto elem = flat_elem_from_value(e);
        if (!elem) throw emit_error("malformed term payload");
        flat.push_back(*elem);
      }
      BoolExpr criterion = BoolExpr::truth();
      if (in->kind == JsDoc::Kind::Obj && in->obj.size() == 1 && in->obj[0].key == "$filter") {
        const JsDoc* cond = in->obj[0].value->find("cond");
        const JsDoc* as = in->obj[0].value->find("as");
        if (cond && as) criterion = decode_bool(*cond, as->s);
      }
      return ValueDef::term_expr(unflatten(flat), path_of_ref(root->s, alias),
                                 std::move(criterion));
    }
    if (const JsDoc* fact = vars->find("fact"))
      return ValueDef::fact(path_of_ref(fact->s, alias));
    const JsDoc* key = vars->find("key");
    if (const JsDoc* sub = vars->find("sub")) {
      if (!key || key->kind != JsDoc::Kind::Str) throw emit_error("malformed subterm payload");
      return ValueDef::subterm(path_of_ref(sub->s, alias), key->s);
    }
    if (const JsDoc* bind = vars->find("bind")) {
      if (!key || key->kind != JsDoc::Kind::Str) throw emit_error("malformed binding payload");
      return ValueDef::binding(path_of_ref(bind->s, alias), key->s);
    }
    const JsDoc* inst = vars->find("inst");
    const JsDoc* with = vars->find("with");
    if (inst && with)
      return ValueDef::instantiate(path_of_ref(inst->s, alias), path_of_ref(with->s, alias));
    throw emit_error("unsupported construct: $let");
  }

  ValueDef decode_project_value(const JsDoc& d) {
    if (d.kind == JsDoc::Kind::Obj && d.obj.size() == 1 && d.obj[0].key == "$literal")
      return ValueDef::constant(value_of_jsdoc(*d.obj[0].value));
    return decode_expr(d, "");
  }

  Stage decode_stage(const JsDoc& d) {
    std::string op = single_key(d);
    const JsDoc& body = *d.obj[0].value;
    if (op == "$match") {
      const JsDoc* expr = body.find("$expr");
      if (!expr || body.obj.size() != 1) throw emit_error("$match expects a single $expr");
      return Stage::match(decode_bool(*expr, ""));
    }
    if (op == "$unwind") {
      if (body.kind == JsDoc::Kind::Str) return Stage::unwind(path_of_ref(body.s, ""));
      const JsDoc* path = body.find("path");
      const JsDoc* preserve = body.find("preserveNullAndEmptyArrays");
      if (!path || !preserve || preserve->kind != JsDoc::Kind::Bool || !preserve->b)
        throw emit_error("malformed $unwind");
      return Stage::unwind_preserve(path_of_ref(path->s, ""));
    }
    if (op == "$project") {
      std::vector<ProjectItem> items;
      if (body.obj.size() == 1 && body.obj[0].key == "_id" &&
          body.obj[0].value->kind == JsDoc::Kind::Int && body.obj[0].value->i == 1)
        return Stage::project({});
      for (const JsField& f : body.obj) {
        if (f.value->kind == JsDoc::Kind::Int) {
          if (f.value->i != 1) throw emit_error("unsupported construct: numeric projection");
          items.push_back(ProjectItem::keep(Path::parse(f.key)));
        } else {
          items.push_back(ProjectItem::set(Path::parse(f.key), decode_project_value(*f.value)));
        }
      }
      return Stage::project(std::move(items));
    }
    if (op == "$addFields") {
      std::vector<ProjectItem> items;
      items.push_back(ProjectItem::keep(Path::root()));
      for (const JsField& f : body.obj)
        items.push_back(ProjectItem::set(Path::parse(f.key), decode_project_value(*f.value)));
      return Stage::project(std::move(items));
    }
    if (op == "$sort") {
      std::vector<SortEntry> entries;
      for (const JsField& f : body.obj) {
        if (f.value->kind != JsDoc::Kind::Int || (f.value->i != 1 && f.value->i != -1))
          throw emit_error("malformed $sort direction");
        entries.push_back(SortEntry{Path::parse(f.key), f.value->i == 1
                                                            ? SortDirection::Ascending
                                                            : SortDirection::Descending});
      }
      return Stage::sort(std::move(entries));
    }
    if (op == "$limit") {
      if (body.kind != JsDoc::Kind::Int) throw emit_error("malformed $limit");
      return Stage::limit(body.i);
    }
    if (op == "$lookup") {
      const JsDoc* from = body.find("from");
      const JsDoc* lets = body.find("let");
      const JsDoc* pipeline = body.find("pipeline");
      const JsDoc* as = body.find("as");
      if (!from || !lets || !pipeline || !as || from->kind != JsDoc::Kind::Str ||
          lets->kind != JsDoc::Kind::Obj || pipeline->kind != JsDoc::Kind::Arr ||
          as->kind != JsDoc::Kind::Str)
        throw emit_error("malformed $lookup");
      std::vector<LookupVar> vars;
      for (const JsField& f : lets->obj)
        vars.push_back(LookupVar{f.key, decode_expr(*f.value, "")});
      Pipeline inner;
      for (const JsDoc& st : pipeline->arr) inner.push_back(decode_stage(st));
      CollRef source = from->s == "one" ? CollRef::one() : CollRef::named(from->s);
      return Stage::lookup(Path::parse(as->s), std::move(vars), source, std::move(inner));
    }
    if (op == "$graphLookup") {
      const JsDoc* from = body.find("from");
      const JsDoc* start = body.find("startWith");
      const JsDoc* to = body.find("connectToField");
      const JsDoc* from_field = body.find("connectFromField");
      const JsDoc* as = body.find("as");
      if (!from || !start || !to || !from_field || !as) throw emit_error("malformed $graphLookup");
      std::vector<ValueDef> starts;
      if (start->kind == JsDoc::Kind::Arr)
        for (const JsDoc& e : start->arr) starts.push_back(decode_expr(e, ""));
      else
        starts.push_back(decode_expr(*start, ""));
      std::optional<Path> depth;
      if (const JsDoc* df = body.find("depthField")) depth = Path::parse(df->s);
      std::optional<std::int64_t> max_depth;
      if (const JsDoc* md = body.find("maxDepth")) max_depth = md->i;
      BoolExpr criterion = BoolExpr::truth();
      if (const JsDoc* restrict_match = body.find("restrictSearchWithMatch")) {
        const JsDoc* expr = restrict_match->find("$expr");
        if (!expr) throw emit_error("malformed restrictSearchWithMatch");
        criterion = decode_bool(*expr, "");
      }
      CollRef source = from->s == "one" ? CollRef::one() : CollRef::named(from->s);
      return Stage::graph_lookup(Path::parse(as->s), source, std::move(starts),
                                 Path::parse(to->s), Path::parse(from_field->s),
                                 std::move(criterion), depth, max_depth);
    }
    throw emit_error("unsupported construct: " + op);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

SourcedPipeline parse_emitted(const std::string& text) {
  return ScriptParser(tokenize(text)).parse();
}

bool same_tokens(const std::string& a, const std::string& b) {
  std::vector<Token> ta;
  std::vector<Token> tb;
  try {
    ta = tokenize(a);
    tb = tokenize(b);
  } catch (const emit_error&) {
    return false;
  }
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (ta[i].kind != tb[i].kind || ta[i].text != tb[i].text) return false;
  return true;
}

}  // namespace mongolog
