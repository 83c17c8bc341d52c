#include "verirefine/lexer.hpp"

#include <array>
#include <cctype>

namespace verirefine {

namespace {

enum class State { code, line_comment, block_comment, string, string_escape };

bool ascii_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool ascii_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Greek letters (U+0370..U+03FF) are identifier letters, except lambda.
bool greek_letter_at(std::string_view s, std::size_t i) {
  if (i + 1 >= s.size()) return false;
  const auto b0 = static_cast<unsigned char>(s[i]);
  const auto b1 = static_cast<unsigned char>(s[i + 1]);
  if (b0 != 0xCE && b0 != 0xCF) return false;
  return !(b0 == 0xCE && b1 == 0xBB);
}

// Subscript digits U+2080..U+2089.
bool subscript_at(std::string_view s, std::size_t i) {
  return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
         static_cast<unsigned char>(s[i + 1]) == 0x82 &&
         static_cast<unsigned char>(s[i + 2]) >= 0x80 && static_cast<unsigned char>(s[i + 2]) <= 0x89;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

constexpr std::array<std::string_view, 11> kMultiCharSymbols = {
    "<;>", "<->", ":=", "=>", "->", "<=", ">=", "!=", "::", "..", "<|"};

}  // namespace

std::vector<CharClass> classify(std::string_view text) {
  std::vector<CharClass> out(text.size(), CharClass::code);
  State state = State::code;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const char next = i + 1 < text.size() ? text[i + 1] : '\0';
    switch (state) {
      case State::code:
        if (c == '-' && next == '-') {
          out[i] = out[i + 1] = CharClass::comment;
          ++i;
          state = State::line_comment;
        } else if (c == '/' && next == '-') {
          out[i] = out[i + 1] = CharClass::comment;
          ++i;
          depth = 1;
          state = State::block_comment;
        } else if (c == '"') {
          out[i] = CharClass::string;
          state = State::string;
        }
        break;
      case State::line_comment:
        if (c == '\n') {
          state = State::code;
        } else {
          out[i] = CharClass::comment;
        }
        break;
      case State::block_comment:
        out[i] = CharClass::comment;
        if (c == '/' && next == '-') {
          out[++i] = CharClass::comment;
          ++depth;
        } else if (c == '-' && next == '/') {
          out[++i] = CharClass::comment;
          if (--depth == 0) state = State::code;
        }
        break;
      case State::string:
        out[i] = CharClass::string;
        if (c == '\\') {
          state = State::string_escape;
        } else if (c == '"') {
          state = State::code;
        }
        break;
      case State::string_escape:
        out[i] = CharClass::string;
        state = State::string;
        break;
    }
  }
  return out;
}

bool is_ident_char(char c) { return ascii_alpha(c) || ascii_digit(c) || c == '_' || c == '\'' || c == '.'; }

std::vector<SourceRange> find_holes(std::string_view text) {
  const auto classes = classify(text);
  std::vector<SourceRange> holes;
  SourcePos pos;
  std::size_t at = 0;
  for (const auto& t : tokenize(text, classes, 0, text.size())) {
    if (t.kind != Token::Kind::ident || t.text != kHoleToken) continue;
    for (; at < t.offset; ++at) {
      if (text[at] == '\n') {
        ++pos.line;
        pos.col = 0;
      } else {
        ++pos.col;
      }
    }
    holes.push_back({pos, {pos.line, pos.col + static_cast<int>(kHoleToken.size())}});
  }
  return holes;
}

std::size_t count_holes(std::string_view text) { return find_holes(text).size(); }

std::vector<Token> tokenize(std::string_view text, const std::vector<CharClass>& classes,
                            std::size_t begin, std::size_t end) {
  std::vector<Token> tokens;
  std::size_t i = begin;
  end = std::min(end, text.size());
  while (i < end) {
    const char c = text[i];
    if (classes[i] == CharClass::comment || std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (classes[i] == CharClass::string) {
      std::size_t j = i + 1;
      bool escaped = false;
      while (j < end && classes[j] == CharClass::string) {
        const char d = text[j++];
        if (escaped) {
          escaped = false;
        } else if (d == '\\') {
          escaped = true;
        } else if (d == '"') {
          break;
        }
      }
      tokens.push_back({Token::Kind::string, i, text.substr(i, j - i)});
      i = j;
      continue;
    }
    if (ascii_alpha(c) || c == '_' || greek_letter_at(text, i)) {
      std::size_t j = i;
      while (j < end && classes[j] == CharClass::code) {
        if (is_ident_char(text[j]) || text[j] == '!' || text[j] == '?') {
          ++j;
        } else if (greek_letter_at(text, j)) {
          j += 2;
        } else if (subscript_at(text, j)) {
          j += 3;
        } else {
          break;
        }
      }
      // A trailing dot belongs to the following syntax, not the name.
      while (j > i + 1 && text[j - 1] == '.') --j;
      tokens.push_back({Token::Kind::ident, i, text.substr(i, j - i)});
      i = j;
      continue;
    }
    if (ascii_digit(c)) {
      std::size_t j = i;
      while (j < end && (ascii_digit(text[j]) || (text[j] == '.' && j + 1 < end && ascii_digit(text[j + 1])))) ++j;
      tokens.push_back({Token::Kind::number, i, text.substr(i, j - i)});
      i = j;
      continue;
    }
    std::size_t len = utf8_length(static_cast<unsigned char>(c));
    if (len == 1) {
      for (auto sym : kMultiCharSymbols) {
        if (text.compare(i, sym.size(), sym) == 0 && i + sym.size() <= end) {
          len = sym.size();
          break;
        }
      }
    }
    len = std::min(len, end - i);
    tokens.push_back({Token::Kind::symbol, i, text.substr(i, len)});
    i += len;
  }
  return tokens;
}

}  // namespace verirefine
