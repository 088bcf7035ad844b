#pragma once

#include "lipinv/map_model.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace lipinv {

struct ParseOptions {
  /// When set, the parsed map must have exactly these dimensions.
  std::optional<std::size_t> expected_inputs;
  std::optional<std::size_t> expected_outputs;
};

/// Parses `name(v1, ..., vn) = (expr1, ..., exprm)`.
///
/// Operators `+ - * /`, unary `-`, integer powers `^k` (k >= 0), calls to
/// abs/relu/sin/cos/exp and n-ary max/min (folded left-associatively), decimal
/// literals with optional exponent. `#` starts a comment running to the end of
/// the line. Unary minus applied to a literal folds into a negative constant.
MapDefinition parse_map(std::string_view text, const ParseOptions& options = {});

/// Fully parenthesized DSL text; `parse_map(to_dsl(m)) == m` for parsed maps.
std::string to_dsl(const MapDefinition& map);

/// Shortest decimal text that reads back as exactly `value`.
std::string format_number(double value);

}  // namespace lipinv
