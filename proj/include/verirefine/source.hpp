#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace verirefine {

/// Project-relative path of a source file, e.g. "Chapters/Chap01/section01.lean".
using FileId = std::string;

/// Zero-based (line, byte column) position in a file.
struct SourcePos {
  int line = 0;
  int col = 0;

  auto operator<=>(const SourcePos&) const = default;
};

/// Half-open range [start, end). A zero-width range denotes the single point
/// at `start` (diagnostics reported at a token position use this form).
struct SourceRange {
  SourcePos start;
  SourcePos end;

  /// Whole lines first..last inclusive.
  static SourceRange lines(int first, int last) { return {{first, 0}, {last + 1, 0}}; }

  bool empty() const { return !(start < end); }
  bool contains(const SourceRange& other) const;

  auto operator<=>(const SourceRange&) const = default;
};

/// True iff the two ranges share at least one position.
bool intersects(const SourceRange& a, const SourceRange& b);

class TextError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Byte offset of `pos` in `text`. A column equal to the line length is
/// legal (it addresses the newline); anything further throws TextError.
std::size_t offset_of(std::string_view text, SourcePos pos);
SourcePos pos_of(std::string_view text, std::size_t offset);

/// Lines without their terminators. A trailing newline does not start an
/// extra line.
std::vector<std::string_view> split_lines(std::string_view text);
int line_count(std::string_view text);
int nonempty_line_count(std::string_view text);

/// Range covering the whole text.
SourceRange full_range(std::string_view text);

std::string_view text_in(std::string_view text, const SourceRange& range);

void to_json(nlohmann::json& j, const SourcePos& p);
void from_json(const nlohmann::json& j, SourcePos& p);
void to_json(nlohmann::json& j, const SourceRange& r);
void from_json(const nlohmann::json& j, SourceRange& r);

}  // namespace verirefine
