#pragma once

#include <optional>
#include <string>
#include <vector>

#include "verirefine/project.hpp"

namespace verirefine {

struct SplitPart {
  FileId file;
  std::string text;
  /// Names of the declarations in this part, in order (empty for anonymous ones).
  std::vector<std::string> declarations;
};

struct SplitPlan {
  std::vector<SplitPart> parts;
  /// Thin module that imports every part, replacing the original file.
  std::string aggregate;
};

/// "Chapters/Chap01/section01.lean", 2 -> "Chapters/Chap01/section01_part2.lean"
FileId part_file(const FileId& file, int k);
/// Existing part files of `file` in part order.
std::vector<FileId> part_files(const Project& project, const FileId& file);

/// Partitions `text` at declaration boundaries so that each part (header
/// included) stays within `max_lines` where possible; a single oversized
/// declaration gets a part of its own. Part k+1 imports part k; every part
/// repeats the original header and any closing `end` lines. Absent when the
/// file has commands between declarations (splitting would detach them from
/// their context) or fewer than two declarations.
std::optional<SplitPlan> plan_split(const FileId& file, std::string_view text, int max_lines);

/// Writes the parts and replaces `file` with the aggregate.
void apply_split(Project& project, const FileId& file, const SplitPlan& plan);

}  // namespace verirefine
