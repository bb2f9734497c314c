#pragma once

#include <string>
#include <vector>

#include "mongolog/database.hpp"

namespace mongolog {

/// One golden-corpus check. `group` is "engine", "solve", or "emit".
struct CorpusCase {
  std::string group;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the bundled worked examples against the fixtures directory:
/// engine stage evaluations, program/query result sets (at every
/// optimization level), and emission golden files.
std::vector<CorpusCase> run_corpus(const std::string& fixtures_dir);

bool all_pass(const std::vector<CorpusCase>& cases);

}  // namespace mongolog
