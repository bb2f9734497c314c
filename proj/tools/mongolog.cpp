#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mongolog/compiler.hpp"
#include "mongolog/corpus.hpp"
#include "mongolog/emitter.hpp"
#include "mongolog/engine.hpp"
#include "mongolog/frontend.hpp"
#include "mongolog/optimizer.hpp"

namespace {

using namespace mongolog;

constexpr int kExitOk = 0;
constexpr int kExitNoSolution = 1;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitCompile = 4;
constexpr int kExitEval = 5;

std::string file_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Session {
  Database db;
  Program program;

  void load(const std::string& db_dir, const std::string& program_file) {
    if (!db_dir.empty()) db = load_database(db_dir);
    if (!program_file.empty()) program = parse_program(file_text(program_file));
    // Declared stored predicates without a data file behave as empty
    // collections.
    for (const auto& [name, arity] : program.edb)
      db.collection_mutable(Database::fact_collection_name(name, arity));
  }
};

std::string binding_line(const Solution& s) {
  if (s.bindings.empty()) return "true";
  std::string out;
  for (const auto& [name, term] : s.bindings) {
    if (!out.empty()) out += ", ";
    out += name + " = " + print_term(term);
  }
  return out;
}

Value binding_value(const Term& t) {
  if (t.is_number()) return t.number_value();
  if (t.is_atom()) return Value(t.symbol());
  return Value(print_term(t));
}

std::string json_line(const Solution& s) {
  ValueObject obj;
  for (const auto& [name, term] : s.bindings) obj.emplace(name, binding_value(term));
  return Value(std::move(obj)).to_json();
}

std::vector<Solution> run_query(Session& session, const std::string& query_text, int opt_level) {
  Goal query = parse_query(query_text);
  CompileContext ctx(session.program, session.db);
  SourcedPipeline sp = optimize(query, opt_level, ctx);
  Forest out = run_pipeline(sp.stages, sp.source, session.db);
  return solutions_from_forest(query, out);
}

int cmd_query(Session& session, const std::string& query_text, int opt_level, bool as_json,
              bool expect_some, std::int64_t limit) {
  std::vector<Solution> solutions = run_query(session, query_text, opt_level);
  std::size_t shown = 0;
  for (const Solution& s : solutions) {
    if (limit >= 0 && static_cast<std::int64_t>(shown) >= limit) break;
    std::cout << (as_json ? json_line(s) : binding_line(s)) << "\n";
    ++shown;
  }
  if (solutions.empty()) {
    if (!as_json) std::cout << "false\n";
    if (expect_some) return kExitNoSolution;
  }
  return kExitOk;
}

int cmd_emit(Session& session, const std::string& query_text, int opt_level) {
  Goal query = parse_query(query_text);
  CompileContext ctx(session.program, session.db);
  SourcedPipeline sp = optimize(query, opt_level, ctx);
  std::cout << emit(sp);
  return kExitOk;
}

int cmd_repl(Session& session, int opt_level) {
  std::string line;
  std::cout << "?- " << std::flush;
  while (std::getline(std::cin, line)) {
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.pop_back();
    if (trimmed.empty()) {
      std::cout << "?- " << std::flush;
      continue;
    }
    if (trimmed == "halt." || trimmed == "halt") break;
    try {
      std::vector<Solution> solutions = run_query(session, trimmed, opt_level);
      bool stopped = false;
      for (std::size_t i = 0; i < solutions.size(); ++i) {
        std::cout << binding_line(solutions[i]) << std::flush;
        if (i + 1 == solutions.size()) {
          std::cout << ".\n";
          stopped = true;
          break;
        }
        std::cout << " " << std::flush;
        std::string more;
        if (!std::getline(std::cin, more)) return kExitOk;
        std::string t = more;
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
        if (t != ";") {
          std::cout << ".\n";
          stopped = true;
          break;
        }
      }
      if (solutions.empty()) std::cout << "false.\n";
      (void)stopped;
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
    std::cout << "?- " << std::flush;
  }
  std::cout << "\n";
  return kExitOk;
}

int cmd_check(const std::string& fixtures_dir) {
  std::vector<CorpusCase> cases = run_corpus(fixtures_dir);
  std::size_t failed = 0;
  for (const CorpusCase& c : cases) {
    if (c.pass) {
      std::cout << "ok   " << c.group << ": " << c.name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << c.group << ": " << c.name
                << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    }
  }
  std::cout << cases.size() - failed << "/" << cases.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitNoSolution;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mongolog: compile logic queries to aggregation pipelines and run them"};
  app.require_subcommand(1);

  std::string db_dir;
  std::string program_file;
  std::string query_text;
  std::string fixtures_dir = "fixtures";
  int opt_level = 0;
  bool as_json = false;
  bool expect_some = false;
  std::int64_t limit = -1;

  const char* env_db = std::getenv("MONGOLOG_DB");
  if (env_db) db_dir = env_db;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--db", db_dir, "database directory of <name>.<arity>.jsonl fact files");
    cmd->add_option("--program", program_file, "program file with rules and directives");
    cmd->add_option("--opt", opt_level, "optimization level")
        ->check(CLI::Range(0, 2))
        ->default_val(0);
  };

  CLI::App* query_cmd = app.add_subcommand("query", "run a query and print solutions");
  add_common(query_cmd);
  query_cmd->add_option("--query", query_text, "goal text")->required();
  query_cmd->add_option("--limit", limit, "print at most this many solutions");
  query_cmd->add_flag("--json", as_json, "line-delimited JSON output");
  query_cmd->add_flag("--expect-some", expect_some, "exit 1 when there are no solutions");

  CLI::App* emit_cmd = app.add_subcommand("emit", "print the aggregation script for a query");
  add_common(emit_cmd);
  emit_cmd->add_option("--query", query_text, "goal text")->required();

  CLI::App* repl_cmd = app.add_subcommand("repl", "interactive query prompt");
  add_common(repl_cmd);

  CLI::App* check_cmd = app.add_subcommand("check", "run the bundled example corpus");
  check_cmd->add_option("--fixtures", fixtures_dir, "fixtures directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (check_cmd->parsed()) return cmd_check(fixtures_dir);

    Session session;
    session.load(db_dir, program_file);
    if (query_cmd->parsed())
      return cmd_query(session, query_text, opt_level, as_json, expect_some, limit);
    if (emit_cmd->parsed()) return cmd_emit(session, query_text, opt_level);
    if (repl_cmd->parsed()) return cmd_repl(session, opt_level);
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const compile_error& e) {
    std::cerr << "compile error: " << e.what() << "\n";
    return kExitCompile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEval;
  }
  return kExitUsage;
}
