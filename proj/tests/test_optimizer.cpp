#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "mongolog/optimizer.hpp"

using namespace mongolog;

namespace {

Term f(const std::string& functor, std::vector<Term> args) {
  return Term::compound(functor, std::move(args));
}

Database parts_db() {
  Database db;
  db.insert_fact(f("hasPart", {Term::atom("fridge1"), Term::atom("door1")}));
  db.insert_fact(f("hasPart", {Term::atom("door1"), Term::atom("handle1")}));
  db.insert_fact(f("hasPart", {Term::atom("door1"), Term::atom("handle2")}));
  db.insert_fact(f("bird", {Term::atom("tweety")}));
  db.insert_fact(f("bird", {Term::atom("tux")}));
  return db;
}

Goal G(const std::string& text) { return parse_query(text); }

std::string binding_text(const Solution& s) {
  std::string out;
  for (const auto& [name, term] : s.bindings) out += name + "=" + print_term(term) + ";";
  return out;
}

std::multiset<std::string> solve_at(const std::string& query, int level, const Program& prog,
                                    const Database& db) {
  CompileContext ctx(prog, db);
  Goal goal = parse_query(query);
  Forest out = run_pipeline(optimize(goal, level, ctx), db);
  std::multiset<std::string> set;
  for (const Solution& s : solutions_from_forest(goal, out)) set.insert(binding_text(s));
  return set;
}

std::size_t stage_count(const Pipeline& p) {
  std::size_t n = 0;
  for (const Stage& s : p) {
    ++n;
    if (s.kind() == Stage::Kind::Lookup) n += stage_count(s.inner());
  }
  return n;
}

Goal random_foldable(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 11 : 6);
  auto leaf_term = [&]() -> Term {
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0: return Term::atom("a");
      case 1: return Term::atom("b");
      case 2: return Term::var("X");
      default: return f("p", {Term::var("Y")});
    }
  };
  switch (pick(rng)) {
    case 0: return Goal::truth();
    case 1: return Goal::falsity();
    case 2: return Goal::call(f("q", {leaf_term()}));
    case 3: return Goal::unify(leaf_term(), leaf_term());
    case 4: return Goal::eq(leaf_term(), leaf_term());
    case 5: {
      Term t = leaf_term();
      int which = std::uniform_int_distribution<int>(0, 2)(rng);
      if (which == 0) return Goal::var_check(t);
      if (which == 1) return Goal::nonvar_check(t);
      return Goal::ground_check(t);
    }
    case 6: return Goal::neq(leaf_term(), leaf_term());
    case 7: return Goal::neg(random_foldable(rng, depth - 1));
    case 8: {
      std::vector<Goal> gs;
      int n = std::uniform_int_distribution<int>(1, 3)(rng);
      for (int i = 0; i < n; ++i) gs.push_back(random_foldable(rng, depth - 1));
      return std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? Goal::conj(std::move(gs))
                                                                : Goal::disj(std::move(gs));
    }
    case 9: return Goal::limit(random_foldable(rng, depth - 1),
                               std::uniform_int_distribution<int>(0, 3)(rng));
    case 10: return Goal::ignore(random_foldable(rng, depth - 1));
    default:
      return Goal::if_then_else(random_foldable(rng, depth - 1), random_foldable(rng, depth - 1),
                                random_foldable(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("decidable goals fold to true or false") {
  CHECK(eliminate_predicates(G("f(a) = f(a)")) == Goal::truth());
  CHECK(eliminate_predicates(G("f(a) = f(b)")) == Goal::falsity());
  CHECK(eliminate_predicates(G("f(a) = g(a)")) == Goal::falsity());
  CHECK(eliminate_predicates(G("f(X) = f(Y)")) == G("f(X) = f(Y)"));
  CHECK(eliminate_predicates(G("a == a")) == Goal::truth());
  CHECK(eliminate_predicates(G("a == b")) == Goal::falsity());
  CHECK(eliminate_predicates(G("p(X) == p(X)")) == Goal::truth());
  CHECK(eliminate_predicates(G("a \\== b")) == Goal::truth());
  CHECK(eliminate_predicates(G("a \\== a")) == Goal::falsity());
  CHECK(eliminate_predicates(G("var(a)")) == Goal::falsity());
  CHECK(eliminate_predicates(G("var(X)")) == G("var(X)"));
  CHECK(eliminate_predicates(G("nonvar(a)")) == Goal::truth());
  CHECK(eliminate_predicates(G("ground(p(a))")) == Goal::truth());
  CHECK(eliminate_predicates(G("ground(p(X))")) == G("ground(p(X))"));
}

TEST_CASE("connectives simplify around folded children") {
  CHECK(eliminate_predicates(G("true, q(a)")) == G("q(a)"));
  CHECK(eliminate_predicates(G("false, q(a)")) == Goal::falsity());
  CHECK(eliminate_predicates(G("a = b ; q(c)")) == G("q(c)"));
  CHECK(eliminate_predicates(G("a = b ; c = d")) == Goal::falsity());
  CHECK(eliminate_predicates(G("\\+ a = b")) == Goal::truth());
  CHECK(eliminate_predicates(G("\\+ a = a")) == Goal::falsity());
  CHECK(eliminate_predicates(G("a = b -> q(x) ; q(y)")) == G("q(y)"));
  CHECK(eliminate_predicates(G("a = a -> q(x) ; q(y)")) == G("q(x)"));
  CHECK(eliminate_predicates(G("a = b -> q(x)")) == Goal::falsity());
  CHECK(eliminate_predicates(G("limit(q(a), 0)")) == Goal::falsity());
  CHECK(eliminate_predicates(G("limit(true, 3)")) == Goal::truth());
  CHECK(eliminate_predicates(G("once(a = a)")) == Goal::truth());
  CHECK(eliminate_predicates(G("ignore(a = b)")) == Goal::truth());
  CHECK(eliminate_predicates(G("ignore(a = a)")) == Goal::truth());
  CHECK(eliminate_predicates(G("true, true")) == Goal::truth());
  CHECK(eliminate_predicates(G("q(a), true, q(b)")) == G("q(a), q(b)"));
}

TEST_CASE("predicate elimination is idempotent") {
  std::mt19937 rng(113);
  for (int i = 0; i < 400; ++i) {
    Goal g = random_foldable(rng, 3);
    Goal once = eliminate_predicates(g);
    CHECK(eliminate_predicates(once) == once);
  }
}

TEST_CASE("lookup elimination starts the pipeline at the first collection") {
  Database db = parts_db();
  Program prog;
  CompileContext ctx(prog, db);
  SourcedPipeline opt = optimize(G("hasPart(X, Y)"), 1, ctx);
  CHECK(opt.source == CollRef::named("hasPart/2"));

  CompileContext ctx2(prog, db);
  SourcedPipeline lim = optimize(G("limit(bird(X), 1)"), 1, ctx2);
  CHECK(lim.source == CollRef::named("bird/1"));
  REQUIRE(!lim.stages.empty());
  CHECK(lim.stages.back().kind() == Stage::Kind::Limit);

  SourcedPipeline untouched{CollRef::one(), {Stage::match(BoolExpr::truth())}};
  CHECK(eliminate_lookup(untouched) == untouched);
}

TEST_CASE("lookup elimination never adds stages") {
  Database db = parts_db();
  Program prog;
  for (const char* q : {"hasPart(X, Y)", "hasPart(X, Y), hasPart(Y, Z)",
                        "limit(bird(X), 1)", "bird(X) ; hasPart(X, Y)",
                        "\\+ bird(penguin)"}) {
    CompileContext c0(prog, db);
    SourcedPipeline plain = compile(G(q), c0);
    SourcedPipeline slim = eliminate_lookup(plain);
    CHECK(stage_count(slim.stages) <= stage_count(plain.stages));
  }
}

TEST_CASE("adjacent single-match lookups merge into one scan") {
  Database db;
  db.collection_mutable("c") = {Tree{Value::parse_json("{\"_id\": 1, \"k\": 1}"), {}},
                                Tree{Value::parse_json("{\"_id\": 2, \"k\": 2}"), {}},
                                Tree{Value::parse_json("{\"_id\": 3, \"k\": 3}"), {}}};
  std::vector<LookupVar> vars = {{"v", ValueDef::path_ref(Path::parse("key"))}};
  BoolExpr c1 = BoolExpr::eq(ValueDef::path_ref(Path::parse("k")),
                             ValueDef::path_ref(Path::parse("v")));
  BoolExpr c2 = BoolExpr::eq(ValueDef::path_ref(Path::parse("k")), ValueDef::constant(Value(3)));
  Pipeline two = {Stage::lookup(Path::parse("a"), vars, CollRef::named("c"), {Stage::match(c1)}),
                  Stage::lookup(Path::parse("b"), vars, CollRef::named("c"), {Stage::match(c2)})};
  Pipeline merged = merge_lookups(two);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].kind() == Stage::Kind::Lookup);
  CHECK(merged[1].kind() == Stage::Kind::Project);

  Forest input = {Tree{Value::parse_json("{\"key\": 2}"), {}}};
  Forest plain = run_pipeline(two, input, db);
  Forest fused = run_pipeline(merged, input, db);
  REQUIRE(plain.size() == 1);
  REQUIRE(fused.size() == 1);
  for (const char* side : {"a", "b"}) {
    Path p = Path::parse(side);
    CHECK(subtree(fused[0], p) == subtree(plain[0], p));
  }
  CHECK(subtree(fused[0], Path::parse("a.k")) == Value::parse_json("[2]"));
  CHECK(subtree(fused[0], Path::parse("b.k")) == Value::parse_json("[3]"));

  // Different sources or different variable specs stay separate.
  Pipeline mixed = {Stage::lookup(Path::parse("a"), vars, CollRef::named("c"), {Stage::match(c1)}),
                    Stage::lookup(Path::parse("b"), vars, CollRef::named("d"), {Stage::match(c2)})};
  CHECK(merge_lookups(mixed) == mixed);
  Pipeline single = {two[0]};
  CHECK(merge_lookups(single) == single);
}

TEST_CASE("a merge is skipped when the second lookup reads the first result") {
  std::vector<LookupVar> plain_vars = {{"v", ValueDef::path_ref(Path::parse("key"))}};
  std::vector<LookupVar> chained = {{"v", ValueDef::path_ref(Path::parse("a.k"))}};
  BoolExpr c = BoolExpr::truth();
  Pipeline two = {
      Stage::lookup(Path::parse("a"), plain_vars, CollRef::named("c"), {Stage::match(c)}),
      Stage::lookup(Path::parse("b"), chained, CollRef::named("c"), {Stage::match(c)})};
  CHECK(merge_lookups(two) == two);
}

TEST_CASE("interleaved projections keep only live variables") {
  Database db = parts_db();
  Program prog;
  CompileContext ctx(prog, db);
  Goal goal = G("hasPart(X, Y), hasPart(Y, Z)");
  Pipeline reduced = reduce_pv(goal, {"X", "Z"}, ctx);
  Forest out = run_pipeline(reduced, CollRef::one(), db);
  REQUIRE(out.size() == 2);
  for (const Tree& t : out) {
    Value vars = subtree(t, Path::parse("vars"));
    REQUIRE(vars.is_object());
    for (const auto& [name, value] : vars.as_object()) {
      (void)value;
      CHECK((name == "X" || name == "Z"));
    }
    CHECK(subtree(vars, Path::parse("X")) == Value("fridge1"));
  }

  // Keeping every variable alive reproduces the plain translation's answers.
  CompileContext ctx2(prog, db);
  Pipeline full = reduce_pv(goal, {"X", "Y", "Z"}, ctx2);
  Forest full_out = run_pipeline(full, CollRef::one(), db);
  std::multiset<std::string> reduced_set, plain_set;
  for (const Solution& s : solutions_from_forest(goal, full_out))
    reduced_set.insert(binding_text(s));
  for (const Solution& s : solve(goal, prog, db)) plain_set.insert(binding_text(s));
  CHECK(reduced_set == plain_set);
}

TEST_CASE("all optimization levels agree on solutions") {
  Database db = parts_db();
  Program prog = parse_program(":- edb hasPart/2, bird/1.\n"
                               "top(Z) :- hasPart(fridge1, Y), hasPart(Y, Z).\n");
  for (const char* q :
       {"hasPart(X, Y)", "hasPart(X, Y), hasPart(Y, Z)", "limit(bird(X), 1)",
        "bird(X) ; hasPart(fridge1, X)", "top(Z)", "\\+ bird(dodo)", "ignore(hasPart(zz, Y))",
        "p(X, 1) = p(2, Y)", "true", "hasPart(fridge1, X) -> q = Y ; r = Y",
        "transitive(hasPart(fridge1, Y))"}) {
    std::multiset<std::string> base = solve_at(q, 0, prog, db);
    CHECK(solve_at(q, 1, prog, db) == base);
    CHECK(solve_at(q, 2, prog, db) == base);
  }
}
