#include "verirefine/source.hpp"

#include <algorithm>

namespace verirefine {

bool SourceRange::contains(const SourceRange& other) const {
  if (other.empty()) {
    return start <= other.start && (other.start < end || (empty() && other.start == start));
  }
  return start <= other.start && other.end <= end;
}

bool intersects(const SourceRange& a, const SourceRange& b) {
  if (a.empty() && b.empty()) return a.start == b.start;
  if (a.empty()) return b.start <= a.start && a.start < b.end;
  if (b.empty()) return a.start <= b.start && b.start < a.end;
  return std::max(a.start, b.start) < std::min(a.end, b.end);
}

std::size_t offset_of(std::string_view text, SourcePos pos) {
  if (pos.line < 0 || pos.col < 0) throw TextError("negative source position");
  std::size_t offset = 0;
  for (int line = 0; line < pos.line; ++line) {
    const auto nl = text.find('\n', offset);
    if (nl == std::string_view::npos) {
      // Position at the start of the line following a final unterminated line.
      if (line + 1 == pos.line && pos.col == 0) return text.size();
      throw TextError("line " + std::to_string(pos.line) + " out of range");
    }
    offset = nl + 1;
  }
  auto line_end = text.find('\n', offset);
  if (line_end == std::string_view::npos) line_end = text.size();
  if (offset + static_cast<std::size_t>(pos.col) > line_end) {
    throw TextError("column " + std::to_string(pos.col) + " out of range on line " +
                    std::to_string(pos.line));
  }
  return offset + static_cast<std::size_t>(pos.col);
}

SourcePos pos_of(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  SourcePos pos;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      line_start = i + 1;
    }
  }
  pos.col = static_cast<int>(offset - line_start);
  return pos;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

int line_count(std::string_view text) { return static_cast<int>(split_lines(text).size()); }

int nonempty_line_count(std::string_view text) {
  int n = 0;
  for (auto line : split_lines(text)) {
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) ++n;
  }
  return n;
}

SourceRange full_range(std::string_view text) { return {{0, 0}, pos_of(text, text.size())}; }

std::string_view text_in(std::string_view text, const SourceRange& range) {
  const auto a = offset_of(text, range.start);
  const auto b = offset_of(text, range.end);
  return text.substr(a, b >= a ? b - a : 0);
}

void to_json(nlohmann::json& j, const SourcePos& p) { j = nlohmann::json::array({p.line, p.col}); }

void from_json(const nlohmann::json& j, SourcePos& p) {
  p.line = j.at(0).get<int>();
  p.col = j.at(1).get<int>();
}

void to_json(nlohmann::json& j, const SourceRange& r) { j = {{"start", r.start}, {"end", r.end}}; }

void from_json(const nlohmann::json& j, SourceRange& r) {
  r.start = j.at("start").get<SourcePos>();
  r.end = j.at("end").get<SourcePos>();
}

}  // namespace verirefine
