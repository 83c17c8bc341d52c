#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "verirefine/diagnostics.hpp"
#include "verirefine/source.hpp"

namespace verirefine {

/// Line classes of the declaration-level grammar shared by the simulated
/// verifier and real toolchain files.
enum class LineKind {
  blank,
  comment,
  import,
  open,
  namespace_open,
  section_open,
  end,
  option,
  doc_start,
  attribute,
  decl_start,
  command,
  continuation,
};

bool is_header_kind(LineKind k);

/// Provenance anchor carried by the docstring immediately above a generated
/// declaration: `/-- [index] label -/`.
struct ProvenanceTag {
  std::int64_t index = 0;
  std::string label;
};

std::string provenance_docstring(std::int64_t index, std::string_view label);
std::optional<ProvenanceTag> parse_provenance_tag(std::string_view docstring_first_line);

struct Declaration {
  std::string kind;
  /// As written (relative to the enclosing namespace). Empty for `example`
  /// and anonymous instances.
  std::string name;
  std::string namespace_prefix;
  int first_line = 0;    ///< docstring/attribute line if present
  int keyword_line = 0;
  int last_line = 0;     ///< inclusive; trailing blank lines excluded
  std::size_t begin_offset = 0;
  std::size_t keyword_offset = 0;
  std::size_t end_offset = 0;  ///< one past the last byte of last_line
  /// Offset just past the top-level `:=`, when present.
  std::optional<std::size_t> body_offset;
  std::optional<ProvenanceTag> tag;
  /// Everything from the keyword up to the top-level `:=`, whitespace-normalized.
  std::string signature;

  std::string full_name() const {
    if (name.empty() || namespace_prefix.empty()) return name;
    return namespace_prefix + "." + name;
  }
  SourceRange range() const { return SourceRange::lines(first_line, last_line); }
};

struct FileOutline {
  std::vector<LineKind> lines;
  /// Index of the last line of the leading header block, or -1.
  int header_last_line = -1;
  std::vector<std::string> imports;
  std::vector<Declaration> decls;
  /// Non-header command lines (namespace/section/end/variable/...) that occur
  /// after the header.
  std::vector<int> body_command_lines;
};

FileOutline outline(std::string_view text);

/// Contiguous prefix of import/open/namespace/section-opening lines, capped
/// at `bound` lines. Empty when the file has no header lines.
Scope header_scope(std::string_view text, int bound = 64);
Scope header_scope(const FileOutline& outline, int bound = 64);

/// Declarations whose range contains `line`.
const Declaration* declaration_at(const FileOutline& outline, int line);

/// Module name for a project file: "A/B/c.lean" -> "A.B.c".
std::string module_name(const FileId& file);
FileId module_file(std::string_view module);

std::string normalize_ws(std::string_view text);

}  // namespace verirefine
