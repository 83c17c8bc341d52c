#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

/// Hole count by a character-level state machine written against the token
/// rules, without the library lexer.
std::size_t count_holes(std::string_view text);

/// Whitespace-normalized signature (keyword up to the top-level `:=`) of every
/// declaration, found by scanning lines rather than through the outline.
std::vector<std::string> signatures(std::string_view text);

/// Random Lean-like text mixing holes with comments, strings, and identifiers
/// that merely contain the hole token.
std::string random_source(std::mt19937_64& rng);

}  // namespace oracle
