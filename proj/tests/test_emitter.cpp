#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mongolog/compiler.hpp"
#include "mongolog/emitter.hpp"
#include "mongolog/optimizer.hpp"

using namespace mongolog;

namespace {

Term f(const std::string& functor, std::vector<Term> args) {
  return Term::compound(functor, std::move(args));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing fixture: " << path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

BoolExpr instock_eq(int n) {
  return BoolExpr::eq(ValueDef::path_ref(Path::parse("instock")),
                      ValueDef::constant(Value(n)));
}

Database parts_db() {
  Database db;
  db.insert_fact(f("hasPart", {Term::atom("fridge1"), Term::atom("door1")}));
  db.insert_fact(f("hasPart", {Term::atom("door1"), Term::atom("handle1")}));
  db.insert_fact(f("bird", {Term::atom("tweety")}));
  return db;
}

}  // namespace

TEST_CASE("a match pipeline emits the expected shell script") {
  SourcedPipeline sp{CollRef::named("inventory"), {Stage::match(instock_eq(80))}};
  std::string script = emit(sp);
  CHECK(same_tokens(script, read_file("fixtures/golden/a1.mongo.js")));
  CHECK(script.find("$match") != std::string::npos);
  CHECK(script.find("$expr") != std::string::npos);
  CHECK(script.find("$eq") != std::string::npos);
  CHECK(parse_emitted(script) == sp);
}

TEST_CASE("an empty pipeline emits an empty stage array") {
  std::string script = emit({}, CollRef::named("c"));
  CHECK(script.find("db.c.aggregate([])") != std::string::npos);
  SourcedPipeline back = parse_emitted(script);
  CHECK(back.source == CollRef::named("c"));
  CHECK(back.stages.empty());
}

TEST_CASE("odd collection names go through getCollection") {
  std::string script = emit({}, CollRef::named("hasPart/2"));
  CHECK(script.find("db.getCollection(\"hasPart/2\")") != std::string::npos);
  CHECK(parse_emitted(script).source == CollRef::named("hasPart/2"));
}

TEST_CASE("each stage kind survives a round trip") {
  Pipeline stages;
  stages.push_back(Stage::match(BoolExpr::and_(
      {instock_eq(80), BoolExpr::not_(BoolExpr::exists(Path::parse("gone"))),
       BoolExpr::or_({BoolExpr::subset_eq(ValueDef::path_ref(Path::parse("s")),
                                          ValueDef::path_ref(Path::parse("t"))),
                      BoolExpr::eq(ValueDef::constant(Value("x")),
                                   ValueDef::path_ref(Path::parse("name")))})})));
  stages.push_back(Stage::unwind(Path::parse("tags")));
  stages.push_back(Stage::unwind_preserve(Path::parse("maybe.list")));
  stages.push_back(Stage::project({ProjectItem::keep(Path::parse("sku")),
                                   ProjectItem::set(Path::parse("mark"),
                                                    ValueDef::constant(Value(7)))}));
  stages.push_back(Stage::project({ProjectItem::keep(Path::root()),
                                   ProjectItem::set(Path::parse("extra"),
                                                    ValueDef::path_ref(Path::parse("sku")))}));
  stages.push_back(Stage::project({}));
  stages.push_back(Stage::sort({{Path::parse("instock"), SortDirection::Ascending},
                                {Path::parse("sku"), SortDirection::Descending}}));
  stages.push_back(Stage::limit(4));
  stages.push_back(Stage::lookup(
      Path::parse("joined"), {{"v", ValueDef::path_ref(Path::parse("item"))}},
      CollRef::named("inventory"),
      {Stage::match(BoolExpr::eq(ValueDef::path_ref(Path::parse("v")),
                                 ValueDef::path_ref(Path::parse("sku")))),
       Stage::limit(2)}));
  stages.push_back(Stage::graph_lookup(
      Path::parse("up"), CollRef::named("ancestors"),
      {ValueDef::path_ref(Path::parse("start"))}, Path::parse("child"), Path::parse("parent"),
      BoolExpr::truth()));
  stages.push_back(Stage::graph_lookup(
      Path::parse("up2"), CollRef::named("ancestors"),
      {ValueDef::path_ref(Path::parse("a")), ValueDef::constant(Value("b"))},
      Path::parse("child"), Path::parse("parent"), instock_eq(1), Path::parse("depth"), 3));
  SourcedPipeline sp{CollRef::named("orders"), std::move(stages)};
  SourcedPipeline back = parse_emitted(emit(sp));
  REQUIRE(back.stages.size() == sp.stages.size());
  for (std::size_t i = 0; i < sp.stages.size(); ++i) CHECK(back.stages[i] == sp.stages[i]);
  CHECK(back == sp);
}

TEST_CASE("value definitions survive a round trip inside projections") {
  Pipeline stages = {Stage::project(
      {ProjectItem::set(Path::parse("c"), ValueDef::constant(Value("text"))),
       ProjectItem::set(Path::parse("n"), ValueDef::constant(Value(5))),
       ProjectItem::set(Path::parse("arr"),
                        ValueDef::array({ValueDef::constant(Value(1)),
                                         ValueDef::path_ref(Path::parse("x"))})),
       ProjectItem::set(Path::parse("b"), ValueDef::boolean(instock_eq(2))),
       ProjectItem::set(Path::parse("pick"),
                        ValueDef::cond(BoolExpr::exists(Path::parse("a")),
                                       ValueDef::constant(Value(1)),
                                       ValueDef::constant(Value(2)))),
       ProjectItem::set(Path::parse("lit"), ValueDef::constant(Value::parse_json("[1, 2]"))),
       ProjectItem::set(Path::parse("dollar"), ValueDef::constant(Value("$keep"))),
       ProjectItem::set(Path::parse("f"),
                        ValueDef::filter(Path::parse("arr"),
                                         BoolExpr::eq(ValueDef::path_ref(Path::parse("k")),
                                                      ValueDef::constant(Value(1)))))})};
  SourcedPipeline sp{CollRef::named("c"), std::move(stages)};
  CHECK(parse_emitted(emit(sp)) == sp);
}

TEST_CASE("term expressions emit marked encodings that parse back") {
  Database db = parts_db();
  Program prog;
  for (const char* q : {"p(X, 1) = p(2, Y)", "hasPart(X, Y)", "ground(p(X))",
                        "transitive(hasPart(fridge1, Y))", "hasPart(X, Y) ; bird(X)"}) {
    for (int level : {0, 1, 2}) {
      CompileContext ctx(prog, db);
      SourcedPipeline sp = optimize(parse_query(q), level, ctx);
      std::string script = emit(sp);
      CAPTURE(q);
      CAPTURE(level);
      CHECK(parse_emitted(script) == sp);
    }
  }
  CompileContext ctx(prog, db);
  std::string script = emit(compile(parse_query("p(X) = p(2)"), ctx));
  CHECK(script.substr(0, 2) == "//");
}

TEST_CASE("plain stages carry no approximation note") {
  std::string script = emit({Stage::limit(1)}, CollRef::named("c"));
  CHECK(script.substr(0, 2) == "db");
}

TEST_CASE("same_tokens ignores layout but not content") {
  CHECK(same_tokens("db.c.aggregate([ ])", "db.c.aggregate([\n])"));
  CHECK(same_tokens("{ $limit: 3 }", "{$limit:3}"));
  CHECK(!same_tokens("{ $limit: 3 }", "{ $limit: 4 }"));
  CHECK(!same_tokens("\"a b\"", "\"a  b\""));
  CHECK(same_tokens("// note\ndb.c.aggregate([])", "db.c.aggregate([])"));
}

TEST_CASE("unknown constructs are rejected") {
  CHECK_THROWS_AS(parse_emitted("db.c.aggregate([{ $facet: {} }])"), emit_error);
  CHECK_THROWS_AS(parse_emitted("db.c.aggregate(["), emit_error);
  CHECK_THROWS_AS(parse_emitted("db.c.find({})"), emit_error);
  CHECK_THROWS_AS(parse_emitted("db.c.aggregate([{ $project: { \"a\": 0 } }])"), emit_error);
}

TEST_CASE("stock golden scripts parse into the documented stages") {
  SourcedPipeline unwind = parse_emitted(read_file("fixtures/golden/a2.mongo.js"));
  CHECK(unwind.source == CollRef::named("events"));
  REQUIRE(unwind.stages.size() == 1);
  CHECK(unwind.stages[0] == Stage::unwind(Path::parse("tags")));

  SourcedPipeline graph = parse_emitted(read_file("fixtures/golden/a7.mongo.js"));
  REQUIRE(graph.stages.size() == 1);
  CHECK(graph.stages[0].kind() == Stage::Kind::GraphLookup);
  CHECK(graph.stages[0].connect_to() == Path::parse("child"));
}
