#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "verirefine/source.hpp"

namespace verirefine {

/// Lexical class of each byte of a Lean-like source file.
enum class CharClass : std::uint8_t { code, comment, string };

/// Classifies every byte. Recognizes `--` line comments, nestable `/- ... -/`
/// block comments (docstrings included) and `"..."` strings with backslash
/// escapes. Unterminated comments and strings run to end of file.
std::vector<CharClass> classify(std::string_view text);

/// The placeholder token. A hole is an identifier token (see tokenize) spelled
/// exactly like this, so `sorry₁`, `h.sorry` and occurrences in comments or
/// strings are not holes.
inline constexpr std::string_view kHoleToken = "sorry";

bool is_ident_char(char c);

/// Ranges of all holes, in file order.
std::vector<SourceRange> find_holes(std::string_view text);
std::size_t count_holes(std::string_view text);

/// A code token: identifier, number, or a single punctuation/symbol run.
struct Token {
  enum class Kind { ident, number, symbol, string };
  Kind kind;
  std::size_t offset;
  std::string_view text;
};

/// Tokenizes text[begin, end). Comment bytes are skipped; a string literal
/// yields one `string` token spanning the literal. Identifiers start with an
/// ASCII letter, `_` or a Greek letter other than λ, continue with those,
/// digits, `' . ! ?` and subscript digits, and never end in a dot.
std::vector<Token> tokenize(std::string_view text, const std::vector<CharClass>& classes,
                            std::size_t begin, std::size_t end);

}  // namespace verirefine
