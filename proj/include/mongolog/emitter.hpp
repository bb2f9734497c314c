#pragma once

#include <stdexcept>
#include <string>

#include "mongolog/stage.hpp"

namespace mongolog {

struct emit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Renders a pipeline as a mongo-shell aggregation script.
std::string emit(const Pipeline& stages, const CollRef& source);
inline std::string emit(const SourcedPipeline& p) { return emit(p.stages, p.source); }

/// Structural inverse of emit. Throws emit_error on constructs emit does not
/// produce.
SourcedPipeline parse_emitted(const std::string& text);

/// Compares two scripts token by token, ignoring whitespace and layout.
bool same_tokens(const std::string& a, const std::string& b);

}  // namespace mongolog
