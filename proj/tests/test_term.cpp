#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "mongolog/stage.hpp"
#include "mongolog/term.hpp"

using namespace mongolog;

namespace {

Value V(const std::string& text) { return Value::parse_json(text); }

Term f(const std::string& functor, std::vector<Term> args) {
  return Term::compound(functor, std::move(args));
}

Value flat_value(const Term& t) {
  ValueArray out;
  for (const FlatElem& e : flatten(t, Path::parse("vars"), Path::root(), Tree{}))
    out.push_back(flat_elem_value(e));
  return Value(std::move(out));
}

Term random_term(std::mt19937& rng, int depth, bool ground) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 3 : 2);
  switch (pick(rng)) {
    case 0: {
      static const char* atoms[] = {"a", "b", "c", "d"};
      return Term::atom(atoms[std::uniform_int_distribution<int>(0, 3)(rng)]);
    }
    case 1: return Term::number(static_cast<std::int64_t>(
        std::uniform_int_distribution<int>(0, 9)(rng)));
    case 2: {
      if (ground) return Term::atom("g");
      static const char* names[] = {"X", "Y", "Z"};
      return Term::var(names[std::uniform_int_distribution<int>(0, 2)(rng)]);
    }
    default: {
      static const char* functors[] = {"f", "g", "h"};
      int n = std::uniform_int_distribution<int>(1, 3)(rng);
      std::vector<Term> args;
      for (int i = 0; i < n; ++i) args.push_back(random_term(rng, depth - 1, ground));
      return f(functors[std::uniform_int_distribution<int>(0, 2)(rng)], std::move(args));
    }
  }
}

}  // namespace

TEST_CASE("key_less orders dotted index keys numerically") {
  CHECK(key_less("2", "10"));
  CHECK(!key_less("10", "2"));
  CHECK(key_less("1", "1.0"));
  CHECK(key_less("1.0", "1.1"));
  CHECK(key_less("1.9", "1.10"));
  CHECK(key_less("0", "1"));
  CHECK(!key_less("1", "1"));
}

TEST_CASE("flatten packs compound terms into dotted keys") {
  FlatTerm elems = flatten(f("p", {Term::atom("a"), f("q", {Term::number(2)})}),
                           Path::parse("vars"), Path::root(), Tree{});
  REQUIRE(elems.size() == 4);
  CHECK(elems[0] == FlatElem{"0", Value("p"), std::nullopt});
  CHECK(elems[1] == FlatElem{"1", Value("a"), std::nullopt});
  CHECK(elems[2] == FlatElem{"2.0", Value("q"), std::nullopt});
  CHECK(elems[3] == FlatElem{"2.1", Value(2), std::nullopt});
}

TEST_CASE("flatten reads variable bindings and splices compounds") {
  Tree bindings{V("{\"vars\": {\"x\": 2}}"), {}};
  FlatTerm elems = flatten(f("p", {Term::var("x")}), Path::parse("vars"), Path::root(), bindings);
  REQUIRE(elems.size() == 2);
  CHECK(elems[0] == FlatElem{"0", Value("p"), std::nullopt});
  CHECK(elems[1] == FlatElem{"1", Value(2), std::nullopt});

  Tree unbound{};
  FlatTerm free_var = flatten(Term::var("x"), Path::parse("vars"), Path::root(), unbound);
  REQUIRE(free_var.size() == 1);
  CHECK(free_var[0] == FlatElem{"0", std::nullopt, "x"});

  // A binding stored as a flat array splices in with re-prefixed keys.
  Tree compound_binding{Value(ValueObject{
      {"vars", Value(ValueObject{{"x", flat_value(f("q", {Term::number(3)}))}})}}), {}};
  FlatTerm spliced =
      flatten(f("p", {Term::var("x")}), Path::parse("vars"), Path::root(), compound_binding);
  REQUIRE(spliced.size() == 3);
  CHECK(spliced[1] == FlatElem{"1.0", Value("q"), std::nullopt});
  CHECK(spliced[2] == FlatElem{"1.1", Value(3), std::nullopt});
}

TEST_CASE("vars_of lists first occurrences in pre-order") {
  auto vs = vars_of(f("p", {Term::var("x")}));
  REQUIRE(vs.size() == 1);
  CHECK(vs[0] == std::pair<std::string, std::string>{"x", "1"});
  CHECK(vars_of(f("p", {Term::atom("a")})).empty());
  auto nested = vars_of(f("f", {Term::var("x"), f("g", {Term::var("y")})}));
  REQUIRE(nested.size() == 2);
  CHECK(nested[0] == std::pair<std::string, std::string>{"x", "1"});
  CHECK(nested[1] == std::pair<std::string, std::string>{"y", "2.1"});
  auto repeated = vars_of(f("f", {Term::var("x"), Term::var("x")}));
  CHECK(repeated.size() == 1);
}

TEST_CASE("unflatten rebuilds terms and rejects malformed input") {
  FlatTerm pq = {{"0", Value("p"), std::nullopt}, {"1", Value("q"), std::nullopt}};
  CHECK(unflatten(pq) == f("p", {Term::atom("q")}));
  FlatTerm mixed = {{"0", Value("f"), std::nullopt},
                    {"1", std::nullopt, "x"},
                    {"2", Value(3), std::nullopt}};
  CHECK(unflatten(mixed) == f("f", {Term::var("x"), Term::number(3)}));
  FlatTerm gap = {{"0", Value("f"), std::nullopt}, {"2", Value(3), std::nullopt}};
  CHECK_THROWS_AS(unflatten(gap), structure_error);
  FlatTerm headless = {{"1", Value(3), std::nullopt}};
  CHECK_THROWS_AS(unflatten(headless), structure_error);
}

TEST_CASE("flatten then unflatten is the identity on random terms") {
  std::mt19937 rng(23);
  for (int i = 0; i < 300; ++i) {
    Term t = random_term(rng, 3, i % 3 == 0);
    FlatTerm elems = flatten(t, Path::parse("vars"), Path::root(), Tree{});
    CHECK(unflatten(elems) == t);
    for (std::size_t k = 1; k < elems.size(); ++k) CHECK(key_less(elems[k - 1].key, elems[k].key));
  }
}

TEST_CASE("eval_term_expr renders filtered flat elements") {
  Tree g{V("{\"x\": 2}"), {}};
  CHECK(eval_term_expr(f("p", {Term::var("x")}), Path::root(), BoolExpr::truth(), g) ==
        V("[{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1\", \"v\": 2}]"));

  BoolExpr never = BoolExpr::eq(ValueDef::constant(Value(0)), ValueDef::constant(Value(1)));
  CHECK(eval_term_expr(f("p", {Term::var("x")}), Path::root(), never, g) == V("[]"));

  BoolExpr no_value = BoolExpr::not_(BoolExpr::exists(Path::parse("v")));
  Tree unbound{};
  CHECK(eval_term_expr(f("p", {Term::var("x")}), Path::parse("vars"), no_value, unbound) ==
        V("[{\"k\": \"1\", \"n\": \"x\"}]"));
}

TEST_CASE("eval_fact flattens a term document, dropping _id") {
  Tree g{V("{\"0\": \"a\"}"), {}};
  CHECK(eval_fact(Path::root(), g) == V("[{\"k\": \"0\", \"v\": \"a\"}]"));
  Tree with_id{V("{\"_id\": 7, \"0\": \"p\", \"1\": \"a\"}"), {}};
  CHECK(eval_fact(Path::root(), with_id) ==
        V("[{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1\", \"v\": \"a\"}]"));
  Tree empty{V("{\"q\": {}}"), {}};
  CHECK(eval_fact(Path::parse("q"), empty) == V("[]"));
  Tree scalar{V("{\"q\": 3}"), {}};
  CHECK(eval_fact(Path::parse("q"), scalar).is_undefined());
}

TEST_CASE("eval_subterm strips the key prefix") {
  Tree g{V("{\"a\": [{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1.0\", \"v\": \"q\"},"
           " {\"k\": \"1.1\", \"v\": 3}]}"),
         {}};
  CHECK(eval_subterm(Path::parse("a"), "1", g) ==
        V("[{\"k\": \"0\", \"v\": \"q\"}, {\"k\": \"1\", \"v\": 3}]"));
  CHECK(eval_subterm(Path::parse("a"), "9", g).is_undefined());
  Tree atomic{V("{\"a\": [{\"k\": \"0\", \"v\": \"c\"}]}"), {}};
  CHECK(eval_subterm(Path::parse("a"), "0", atomic) == V("[{\"k\": \"0\", \"v\": \"c\"}]"));
}

TEST_CASE("eval_binding yields scalars, flat arrays, or Undefined") {
  Tree g{Value(ValueObject{{"t", flat_value(f("p", {Term::atom("a"),
                                                    f("q", {Term::number(3)}),
                                                    Term::var("x")}))}}),
         {}};
  CHECK(eval_binding(Path::parse("t"), "1", g) == Value("a"));
  CHECK(eval_binding(Path::parse("t"), "2", g) ==
        V("[{\"k\": \"0\", \"v\": \"q\"}, {\"k\": \"1\", \"v\": 3}]"));
  CHECK(eval_binding(Path::parse("t"), "3", g).is_undefined());
  CHECK(eval_binding(Path::parse("t"), "9", g).is_undefined());
}

TEST_CASE("eval_instantiate substitutes matching elements") {
  Value a = V("[{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1\", \"n\": \"x\"}]");
  Value b = V("[{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1\", \"v\": \"q\"}]");
  Tree g{Value(ValueObject{{"a", a}, {"b", b}}), {}};
  CHECK(eval_instantiate(Path::parse("a"), Path::parse("b"), g) ==
        V("[{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1\", \"v\": \"q\"}]"));

  Value ground = flat_value(f("p", {Term::atom("c")}));
  Tree g2{Value(ValueObject{{"a", ground}, {"b", b}}), {}};
  CHECK(eval_instantiate(Path::parse("a"), Path::parse("b"), g2) == ground);

  Value expanded = V("[{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1.0\", \"v\": \"q\"},"
                     " {\"k\": \"1.1\", \"v\": 3}]");
  Tree g3{Value(ValueObject{{"a", a}, {"b", expanded}}), {}};
  CHECK(eval_instantiate(Path::parse("a"), Path::parse("b"), g3) ==
        flat_value(f("p", {f("q", {Term::number(3)})})));
}

TEST_CASE("eval_instantiate is idempotent against a ground right side") {
  std::mt19937 rng(31);
  for (int i = 0; i < 100; ++i) {
    Term shape = random_term(rng, 2, false);
    Term filler = random_term(rng, 2, true);
    if (!shape.is_compound() || !filler.is_compound()) continue;
    if (shape.symbol() != filler.symbol() || shape.arity() != filler.arity()) continue;
    Tree g{Value(ValueObject{{"a", flat_value(shape)}, {"b", flat_value(filler)}}), {}};
    Value once = eval_instantiate(Path::parse("a"), Path::parse("b"), g);
    Tree g2{Value(ValueObject{{"a", once}, {"b", flat_value(filler)}}), {}};
    CHECK(eval_instantiate(Path::parse("a"), Path::parse("b"), g2) == once);
  }
}

TEST_CASE("ground term expressions match their stored document form") {
  std::mt19937 rng(41);
  for (int i = 0; i < 100; ++i) {
    Term t = random_term(rng, 2, true);
    if (!t.is_compound()) continue;
    Value doc = Value(ValueObject{{"_id", Value(1)}});
    for (const FlatElem& e : flatten(t, Path::parse("vars"), Path::root(), Tree{}))
      doc.as_object()[e.key] = *e.value;
    Tree stored{doc, {}};
    Tree empty{};
    CHECK(eval_term_expr(t, Path::parse("vars"), BoolExpr::truth(), empty) ==
          eval_fact(Path::root(), stored));
  }
}

TEST_CASE("unify_simplified binds free variables against constants") {
  Term lhs = f("p", {Term::var("x"), Term::number(1)});
  Term rhs = f("p", {Term::number(2), Term::var("y")});
  auto out = unify_simplified(lhs, rhs, Tree{});
  REQUIRE(out.has_value());
  CHECK(subtree(out->root, Path::parse("x")) == Value(2));
  CHECK(subtree(out->root, Path::parse("y")) == Value(1));

  CHECK(unify_simplified(Term::number(2), Term::number(2), Tree{}).has_value());
  CHECK(!unify_simplified(Term::number(2), Term::number(3), Tree{}).has_value());
  CHECK(!unify_simplified(f("p", {Term::var("x")}), f("p", {Term::var("y")}), Tree{}).has_value());
  CHECK(unify_simplified(f("p", {Term::var("x")}), f("p", {Term::var("x")}), Tree{}).has_value());
}

TEST_CASE("unify_simplified respects existing bindings") {
  Tree bound{V("{\"x\": 2}"), {}};
  CHECK(unify_simplified(Term::var("x"), Term::number(2), bound).has_value());
  CHECK(!unify_simplified(Term::var("x"), Term::number(3), bound).has_value());
  auto out = unify_simplified(Term::var("x"), Term::var("z"), bound);
  REQUIRE(out.has_value());
  CHECK(subtree(out->root, Path::parse("z")) == Value(2));
}

TEST_CASE("unify_simplified success is symmetric") {
  std::mt19937 rng(53);
  for (int i = 0; i < 300; ++i) {
    Term a = random_term(rng, 2, false);
    Term b = random_term(rng, 2, false);
    CHECK(unify_simplified(a, b, Tree{}).has_value() ==
          unify_simplified(b, a, Tree{}).has_value());
  }
}

TEST_CASE("unifiable allows aliasing and skips the occurs check") {
  CHECK(unifiable(f("p", {Term::var("x")}), f("p", {Term::var("y")})));
  CHECK(!unifiable(f("f", {Term::atom("a")}), f("f", {Term::atom("b")})));
  CHECK(!unifiable(f("f", {Term::atom("a")}), f("g", {Term::atom("a")})));
  CHECK(unifiable(Term::var("x"), f("f", {Term::var("x")})));
  CHECK(unifiable(f("f", {Term::var("x"), Term::var("x")}),
                  f("f", {Term::atom("a"), Term::atom("a")})));
  CHECK(!unifiable(f("f", {Term::var("x"), Term::var("x")}),
                   f("f", {Term::atom("a"), Term::atom("b")})));
}

TEST_CASE("term_from_binding decodes stored values") {
  CHECK(term_from_binding(Value("a")) == Term::atom("a"));
  CHECK(term_from_binding(Value(5)) == Term::number(5));
  CHECK(term_from_binding(flat_value(f("q", {Term::number(3)}))) == f("q", {Term::number(3)}));
}
