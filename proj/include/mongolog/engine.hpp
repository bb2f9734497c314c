#pragma once

#include "mongolog/database.hpp"
#include "mongolog/stage.hpp"

namespace mongolog {

// Evaluates a value definition against one tree; unresolvable yields Undefined.
Value eval_value_def(const ValueDef& d, const Tree& g);

// Decides a boolean criterion against one tree.
bool eval_bool(const BoolExpr& b, const Tree& g);

Forest run_stage(const Stage& stage, const Forest& input, const Database& db);

Forest run_pipeline(const Pipeline& stages, const Forest& input, const Database& db);

Forest run_pipeline(const Pipeline& stages, const CollRef& source, const Database& db);

inline Forest run_pipeline(const SourcedPipeline& p, const Database& db) {
  return run_pipeline(p.stages, p.source, db);
}

// Resolves a collection reference against the database.
const Forest& resolve_source(const CollRef& source, const Database& db);

}  // namespace mongolog
