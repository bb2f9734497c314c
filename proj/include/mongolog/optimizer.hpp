#pragma once

#include <set>
#include <string>

#include "mongolog/compiler.hpp"

namespace mongolog {

using LiveVarSet = std::set<std::string>;

// Source-level partial evaluation: folds decidable goals to true/false and
// simplifies the connectives around them.
Goal eliminate_predicates(const Goal& goal);

// Translation with live-variable projections between the top-level conjuncts
// and a final projection keeping only `live` names under "vars".
Pipeline reduce_pv(const Goal& goal, const LiveVarSet& live, CompileContext& ctx);

// Replaces a leading one-document source with the first joined collection
// when the pipeline starts with matches followed by the join pattern;
// applied repeatedly and inside nested lookups.
SourcedPipeline eliminate_lookup(const SourcedPipeline& p);

// Merges adjacent single-match lookups on the same source into one lookup
// over the disjoined criterion plus per-branch filter projections.
Pipeline merge_lookups(const Pipeline& p);

// The full pass schedule for an optimization level (0, 1, or 2).
SourcedPipeline optimize(const Goal& query, int level, CompileContext& ctx);

}  // namespace mongolog
