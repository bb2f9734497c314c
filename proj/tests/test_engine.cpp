#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "mongolog/engine.hpp"

using namespace mongolog;

namespace {

Value V(const std::string& text) { return Value::parse_json(text); }

Tree T(const std::string& text) { return Tree{V(text), {}}; }

Forest inventory() {
  return {T("{\"_id\": 1, \"sku\": \"almonds\", \"instock\": 120}"),
          T("{\"_id\": 2, \"sku\": \"bread\", \"instock\": 80}"),
          T("{\"_id\": 3, \"sku\": \"cashews\", \"instock\": 60}"),
          T("{\"_id\": 4, \"sku\": \"pecans\", \"instock\": 80}")};
}

BoolExpr instock_is(int n) {
  return BoolExpr::eq(ValueDef::path_ref(Path::parse("instock")),
                      ValueDef::constant(Value(n)));
}

std::vector<Value> roots(const Forest& f) {
  std::vector<Value> out;
  for (const Tree& t : f) out.push_back(t.root);
  return out;
}

}  // namespace

TEST_CASE("eval_value_def covers constants, paths, arrays, conditionals") {
  Tree g = T("{\"a\": 7, \"x\": 3}");
  CHECK(eval_value_def(ValueDef::constant(Value(5)), g) == Value(5));
  CHECK(eval_value_def(ValueDef::path_ref(Path::parse("a")), g) == Value(7));
  CHECK(eval_value_def(ValueDef::path_ref(Path::parse("zz")), g).is_undefined());
  CHECK(eval_value_def(ValueDef::cond(BoolExpr::exists(Path::parse("a")),
                                      ValueDef::constant(Value(1)),
                                      ValueDef::constant(Value(2))),
                       g) == Value(1));
  CHECK(eval_value_def(ValueDef::cond(BoolExpr::exists(Path::parse("zz")),
                                      ValueDef::constant(Value(1)),
                                      ValueDef::constant(Value(2))),
                       g) == Value(2));
  CHECK(eval_value_def(ValueDef::array({ValueDef::path_ref(Path::parse("x")),
                                        ValueDef::constant(Value(0))}),
                       g) == V("[3, 0]"));
}

TEST_CASE("eval_bool covers equality, subset, existence") {
  Tree g = T("{\"instock\": 80}");
  CHECK(eval_bool(instock_is(80), g));
  CHECK(!eval_bool(instock_is(81), g));
  CHECK(!eval_bool(BoolExpr::exists(Path::parse("a")), Tree{}));
  CHECK(eval_bool(BoolExpr::exists(Path::parse("instock")), g));

  Tree sets = T("{\"s\": [{\"k\": \"0\", \"v\": \"p\"}],"
                " \"t\": [{\"k\": \"0\", \"v\": \"p\"}, {\"k\": \"1\", \"v\": \"a\"}]}");
  BoolExpr sub = BoolExpr::subset_eq(ValueDef::path_ref(Path::parse("s")),
                                     ValueDef::path_ref(Path::parse("t")));
  BoolExpr super = BoolExpr::subset_eq(ValueDef::path_ref(Path::parse("t")),
                                       ValueDef::path_ref(Path::parse("s")));
  CHECK(eval_bool(sub, sets));
  CHECK(!eval_bool(super, sets));

  // Comparisons against Undefined are false; negation flips them.
  BoolExpr missing = BoolExpr::eq(ValueDef::path_ref(Path::parse("zz")),
                                  ValueDef::constant(Value(1)));
  CHECK(!eval_bool(missing, g));
  CHECK(eval_bool(BoolExpr::not_(missing), g));
  CHECK(eval_bool(BoolExpr::and_({}), g));
  CHECK(!eval_bool(BoolExpr::or_({}), g));
}

TEST_CASE("match keeps satisfying trees and all labels") {
  Forest in = inventory();
  in[1].sort_label = {{SortDirection::Ascending, Value(1)}};
  Forest out = run_stage(Stage::match(instock_is(80)), in, Database{});
  REQUIRE(out.size() == 2);
  CHECK(subtree(out[0], Path::parse("_id")) == Value(2));
  CHECK(subtree(out[1], Path::parse("_id")) == Value(4));
  CHECK(out[0].sort_label.size() == 1);
  CHECK(out.size() <= in.size());
}

TEST_CASE("unwind splits arrays and drops empty ones") {
  Forest in = {T("{\"_id\": 1, \"tags\": [\"work\", \"sports\"]}")};
  Forest out = run_stage(Stage::unwind(Path::parse("tags")), in, Database{});
  REQUIRE(out.size() == 2);
  CHECK(out[0].root == V("{\"_id\": 1, \"tags\": \"work\"}"));
  CHECK(out[1].root == V("{\"_id\": 1, \"tags\": \"sports\"}"));

  Forest empties = {T("{\"a\": []}"), T("{\"a\": null}"), T("{\"b\": 1}")};
  CHECK(run_stage(Stage::unwind(Path::parse("a")), empties, Database{}).empty());
  Forest scalar = {T("{\"a\": 5}")};
  Forest passed = run_stage(Stage::unwind(Path::parse("a")), scalar, Database{});
  REQUIRE(passed.size() == 1);
  CHECK(passed[0].root == V("{\"a\": 5}"));
}

TEST_CASE("unwind_preserve passes trees the plain unwind drops") {
  Forest in = {T("{\"a\": [1, 2]}"), T("{\"a\": []}"), T("{\"b\": 1}")};
  Forest plain = run_stage(Stage::unwind(Path::parse("a")), in, Database{});
  Forest preserved = run_stage(Stage::unwind_preserve(Path::parse("a")), in, Database{});
  CHECK(plain.size() == 2);
  REQUIRE(preserved.size() == 4);
  CHECK(preserved[2].root == V("{\"a\": []}"));
  CHECK(preserved[3].root == V("{\"b\": 1}"));
  // Every plain-unwind output appears in the preserving output.
  for (const Tree& t : plain)
    CHECK(std::count(preserved.begin(), preserved.end(), t) >= 1);
}

TEST_CASE("project builds a fresh tree from keeps and sets") {
  Forest in = {T("{\"_id\": 9, \"a\": {\"b\": 1, \"c\": 2}, \"d\": 3}")};
  Forest out = run_stage(Stage::project({ProjectItem::keep(Path::parse("a.b")),
                                         ProjectItem::set(Path::parse("e"),
                                                          ValueDef::constant(Value(5)))}),
                         in, Database{});
  REQUIRE(out.size() == 1);
  CHECK(out[0].root == V("{\"_id\": 9, \"a\": {\"b\": 1}, \"e\": 5}"));

  // Setting an Undefined value omits the field entirely.
  Forest omit = run_stage(
      Stage::project({ProjectItem::set(Path::parse("e"), ValueDef::path_ref(Path::parse("zz")))}),
      in, Database{});
  CHECK(omit[0].root == V("{\"_id\": 9}"));

  // A whole-root keep copies everything, later sets overlay it.
  Forest all = run_stage(Stage::project({ProjectItem::keep(Path::root()),
                                         ProjectItem::set(Path::parse("d"),
                                                          ValueDef::constant(Value(7)))}),
                         in, Database{});
  CHECK(all[0].root == V("{\"_id\": 9, \"a\": {\"b\": 1, \"c\": 2}, \"d\": 7}"));
}

TEST_CASE("projected conditionals read the input tree, not the output") {
  Forest in = {T("{\"a\": 1}")};
  Forest out = run_stage(
      Stage::project({ProjectItem::set(Path::parse("a"), ValueDef::constant(Value(2))),
                      ProjectItem::set(Path::parse("b"), ValueDef::path_ref(Path::parse("a")))}),
      in, Database{});
  CHECK(out[0].root == V("{\"a\": 2, \"b\": 1}"));
}

TEST_CASE("sort orders the forest and stamps labels") {
  Forest out = run_stage(Stage::sort({{Path::parse("instock"), SortDirection::Ascending},
                                      {Path::parse("sku"), SortDirection::Ascending}}),
                         inventory(), Database{});
  REQUIRE(out.size() == 4);
  CHECK(subtree(out[0], Path::parse("sku")) == Value("cashews"));
  CHECK(subtree(out[1], Path::parse("sku")) == Value("bread"));
  CHECK(subtree(out[2], Path::parse("sku")) == Value("pecans"));
  CHECK(subtree(out[3], Path::parse("sku")) == Value("almonds"));
  REQUIRE(out[0].sort_label.size() == 2);
  CHECK(out[0].sort_label[0].value == Value(60));
  CHECK(out[0].sort_label[1].value == Value("cashews"));

  Forest desc = run_stage(Stage::sort({{Path::parse("instock"), SortDirection::Descending}}),
                          inventory(), Database{});
  CHECK(subtree(desc[0], Path::parse("sku")) == Value("almonds"));
}

TEST_CASE("limit takes the label-smallest trees") {
  Forest sorted = run_stage(Stage::sort({{Path::parse("_id"), SortDirection::Ascending}}),
                            inventory(), Database{});
  Forest top = run_stage(Stage::limit(1), sorted, Database{});
  REQUIRE(top.size() == 1);
  CHECK(subtree(top[0], Path::parse("sku")) == Value("almonds"));
  CHECK(run_stage(Stage::limit(0), inventory(), Database{}).empty());
  CHECK(run_stage(Stage::limit(9), inventory(), Database{}).size() == 4);
  // Unlabeled trees keep their input order.
  Forest first2 = run_stage(Stage::limit(2), inventory(), Database{});
  REQUIRE(first2.size() == 2);
  CHECK(subtree(first2[0], Path::parse("_id")) == Value(1));
  CHECK(subtree(first2[1], Path::parse("_id")) == Value(2));
}

TEST_CASE("sort then limit equals sorting everything and truncating") {
  std::mt19937 rng(67);
  for (int round = 0; round < 50; ++round) {
    Forest f;
    int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < n; ++i) {
      ValueObject o{{"k", Value(std::uniform_int_distribution<int>(0, 5)(rng))},
                    {"i", Value(i)}};
      f.push_back(Tree{Value(o), {}});
    }
    Stage sort_k = Stage::sort({{Path::parse("k"), SortDirection::Ascending}});
    Forest sorted = run_stage(sort_k, f, Database{});
    int k = std::uniform_int_distribution<int>(0, 14)(rng);
    Forest limited = run_stage(Stage::limit(k), sorted, Database{});
    Forest truncated = sorted;
    if (truncated.size() > static_cast<std::size_t>(k)) truncated.resize(k);
    CHECK(roots(limited) == roots(truncated));
  }
}

TEST_CASE("lookup joins each input tree against the inner pipeline") {
  Database db;
  db.collection_mutable("inventory") = inventory();
  Forest orders = {T("{\"_id\": 1, \"item\": \"almonds\", \"qty\": 2}"),
                   T("{\"_id\": 2, \"item\": \"pecans\", \"qty\": 1}")};
  Stage join = Stage::lookup(
      Path::parse("a"), {{"v", ValueDef::path_ref(Path::parse("item"))}},
      CollRef::named("inventory"),
      {Stage::match(BoolExpr::eq(ValueDef::path_ref(Path::parse("v")),
                                 ValueDef::path_ref(Path::parse("sku"))))});
  Forest out = run_stage(join, orders, db);
  REQUIRE(out.size() == 2);
  Value a0 = subtree(out[0], Path::parse("a"));
  REQUIRE(a0.is_array());
  REQUIRE(a0.as_array().size() == 1);
  CHECK(subtree(a0.as_array()[0], Path::parse("sku")) == Value("almonds"));
  // The joined documents carry the injected variable field.
  CHECK(subtree(a0.as_array()[0], Path::parse("v")) == Value("almonds"));
  CHECK(subtree(out[0], Path::parse("qty")) == Value(2));
  Value a1 = subtree(out[1], Path::parse("a"));
  CHECK(subtree(a1, Path::parse("sku")) == V("[\"pecans\"]"));

  // No match still emits the input tree, with an empty array.
  Forest odd = {T("{\"_id\": 3, \"item\": \"tofu\"}")};
  Forest none = run_stage(join, odd, db);
  REQUIRE(none.size() == 1);
  CHECK(subtree(none[0], Path::parse("a")) == V("[]"));
}

TEST_CASE("graph lookup walks edges breadth-first with depth tags") {
  Database db;
  db.collection_mutable("ancestors") = {T("{\"_id\": 1, \"child\": \"a\", \"parent\": \"b\"}"),
                                        T("{\"_id\": 2, \"child\": \"b\", \"parent\": \"c\"}"),
                                        T("{\"_id\": 3, \"child\": \"b\", \"parent\": \"d\"}")};
  Stage walk = Stage::graph_lookup(Path::parse("up"), CollRef::named("ancestors"),
                                   {ValueDef::path_ref(Path::parse("start"))},
                                   Path::parse("child"), Path::parse("parent"),
                                   BoolExpr::truth(), Path::parse("d"));
  Forest out = run_stage(walk, {T("{\"start\": \"a\"}")}, db);
  REQUIRE(out.size() == 1);
  Value up = subtree(out[0], Path::parse("up"));
  REQUIRE(up.is_array());
  REQUIRE(up.as_array().size() == 3);
  CHECK(subtree(up.as_array()[0], Path::parse("d")) == Value(1));
  CHECK(subtree(up.as_array()[1], Path::parse("d")) == Value(2));
  CHECK(subtree(up.as_array()[2], Path::parse("d")) == Value(2));

  Stage capped = Stage::graph_lookup(Path::parse("up"), CollRef::named("ancestors"),
                                     {ValueDef::path_ref(Path::parse("start"))},
                                     Path::parse("child"), Path::parse("parent"),
                                     BoolExpr::truth(), std::nullopt, 1);
  Forest shallow = run_stage(capped, {T("{\"start\": \"a\"}")}, db);
  CHECK(subtree(shallow[0], Path::parse("up")).as_array().size() == 1);
}

TEST_CASE("graph lookup matches a transitive reachability oracle") {
  std::mt19937 rng(71);
  for (int round = 0; round < 30; ++round) {
    int nodes = std::uniform_int_distribution<int>(2, 8)(rng);
    int edges = std::uniform_int_distribution<int>(1, 25)(rng);
    Database db;
    Forest& coll = db.collection_mutable("edge");
    std::vector<std::pair<int, int>> es;
    for (int i = 0; i < edges; ++i) {
      int from = std::uniform_int_distribution<int>(0, nodes - 1)(rng);
      int to = std::uniform_int_distribution<int>(0, nodes - 1)(rng);
      es.emplace_back(from, to);
      coll.push_back(Tree{Value(ValueObject{{"_id", Value(i + 1)},
                                            {"from", Value(from)},
                                            {"to", Value(to)}}),
                          {}});
    }
    for (int start = 0; start < nodes; ++start) {
      Stage walk = Stage::graph_lookup(Path::parse("r"), CollRef::named("edge"),
                                       {ValueDef::constant(Value(start))}, Path::parse("from"),
                                       Path::parse("to"), BoolExpr::truth());
      Forest out = run_stage(walk, {Tree{}}, db);
      REQUIRE(out.size() == 1);
      std::set<std::int64_t> got;
      Value reached = subtree(out[0], Path::parse("r"));
      for (const Value& doc : reached.as_array())
        got.insert(subtree(doc, Path::parse("_id")).as_int());

      std::set<int> reach = {start};
      std::set<std::int64_t> expected;
      bool grew = true;
      while (grew) {
        grew = false;
        for (std::size_t i = 0; i < es.size(); ++i) {
          if (!reach.count(es[i].first) || expected.count(i + 1)) continue;
          expected.insert(i + 1);
          if (!reach.count(es[i].second)) {
            reach.insert(es[i].second);
          }
          grew = true;
        }
      }
      CHECK(got == expected);
    }
  }
}

TEST_CASE("stage cardinalities follow the stage kind") {
  Forest in = inventory();
  Database db;
  db.collection_mutable("inventory") = inventory();
  CHECK(run_stage(Stage::sort({{Path::parse("sku"), SortDirection::Descending}}), in, db).size() ==
        in.size());
  CHECK(run_stage(Stage::limit(2), in, db).size() == 2);
  Stage join = Stage::lookup(Path::parse("a"), {{"v", ValueDef::constant(Value(1))}},
                             CollRef::named("inventory"), {});
  CHECK(run_stage(join, in, db).size() == in.size());
}

TEST_CASE("pipelines fold stages over a resolved source") {
  Database db;
  db.collection_mutable("inventory") = inventory();
  Pipeline p = {Stage::sort({{Path::parse("instock"), SortDirection::Ascending},
                             {Path::parse("sku"), SortDirection::Ascending}}),
                Stage::limit(1)};
  Forest out = run_pipeline(p, CollRef::named("inventory"), db);
  REQUIRE(out.size() == 1);
  CHECK(subtree(out[0], Path::parse("sku")) == Value("cashews"));

  Forest one = run_pipeline({}, CollRef::one(), db);
  REQUIRE(one.size() == 1);
  CHECK(one[0].root == V("{\"_id\": 1}"));
  CHECK(run_pipeline({Stage::match(BoolExpr::or_({}))}, CollRef::one(), db).empty());
  CHECK_THROWS_AS(run_pipeline({}, CollRef::named("nope"), db), eval_error);

  Forest again = run_pipeline(p, CollRef::named("inventory"), db);
  CHECK(roots(again) == roots(out));
}
