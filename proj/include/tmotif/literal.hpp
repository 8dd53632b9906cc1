#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace tmotif {

/// Python-style literal to JSON. Accepts dicts, lists, tuples (as arrays),
/// single or double quoted strings, integers, floats, True/False/None and
/// bare words (as strings). Trailing commas are allowed.
/// Throws ParseError with the byte offset of the problem.
nlohmann::json parse_literal(std::string_view text);

/// One past the bracket that closes the one at `open`, skipping quoted text;
/// npos when unbalanced.
std::size_t literal_extent(std::string_view text, std::size_t open);

/// Python-style rendering: arrays of scalars print as tuples.
std::string to_literal(const nlohmann::json& j);

}  // namespace tmotif
