#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mongolog/database.hpp"
#include "mongolog/engine.hpp"
#include "mongolog/frontend.hpp"
#include "mongolog/stage.hpp"

namespace mongolog {

class compile_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shared state of one translation run: the reserved temporary-path allocator,
// the fixed "vars" root, and the program/database pair used to classify
// predicates and expand rules.
class CompileContext {
 public:
  CompileContext(const Program& program, const Database& db) : program_(&program), db_(&db) {}

  const Program& program() const { return *program_; }
  const Database& db() const { return *db_; }

  // Fresh top-level temporary path; never "vars", "_id", or a repeat.
  Path fresh_temp() { return Path::parse("t" + std::to_string(++temp_counter_)); }

  // Fresh per-expansion variable prefix for inlined clause bodies.
  std::string fresh_expansion_prefix() {
    return "_e" + std::to_string(++expansion_counter_) + "_";
  }

  bool is_edb(const std::string& name, std::size_t arity) const {
    return program_->is_edb(name, arity) ||
           db_->has_collection(Database::fact_collection_name(name, arity));
  }

  static Path vars_root() { return Path::parse("vars"); }

 private:
  const Program* program_;
  const Database* db_;
  std::size_t temp_counter_ = 0;
  std::size_t expansion_counter_ = 0;
};

Pipeline translate(const Goal& goal, CompileContext& ctx);

inline SourcedPipeline compile(const Goal& goal, CompileContext& ctx) {
  return SourcedPipeline{CollRef::one(), translate(goal, ctx)};
}

struct Solution {
  std::map<std::string, Term> bindings;  // query variable name -> bound term
  std::vector<Term> instantiated;        // one instantiated term per query conjunct
};

// The instantiation of a goal under the bindings recorded in a result tree.
Term instantiate_goal(const Goal& goal, const Tree& tree);

// Decodes engine output trees into solutions, reporting only the query's
// variables whose names do not start with '_'.
std::vector<Solution> solutions_from_forest(const Goal& query, const Forest& forest);

// Translate without optimization, evaluate, and decode.
std::vector<Solution> solve(const Goal& query, const Program& program, const Database& db);

}  // namespace mongolog
