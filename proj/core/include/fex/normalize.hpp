#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fex {

/// Splits an identifier into lowercase terms: the whole token, each
/// underscore segment, and each camel-case hump of a segment. A segment made
/// of several humps is itself the concatenation of those humps, so
/// `parse_axisCommand` yields {axis, axiscommand, command, parse,
/// parse_axiscommand}. Fragments shorter than two characters or made only of
/// digits are dropped; the whole token is always kept. ALL-CAPS segments are
/// not camel-split. Output is sorted and duplicate free.
std::vector<std::string> normalize(std::string_view token);

/// Camel-case humps of one underscore-free segment ("HTTPServer2x" ->
/// {HTTP, Server2x}). Exposed for tests.
std::vector<std::string_view> camel_humps(std::string_view segment);

std::string to_lower(std::string_view s);

}  // namespace fex
