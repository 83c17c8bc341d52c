#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "verirefine/source.hpp"

namespace verirefine {

class ProjectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The mutable project state: a set of source files addressed by FileId.
/// Backed either by a directory (writes are atomic temp-then-rename) or by
/// memory. Engine bookkeeping lives under `.verirefine/` and is never listed.
class Project {
 public:
  static Project in_memory();
  static Project on_disk(std::filesystem::path root);

  bool exists(const FileId& file) const;
  /// Throws ProjectError when the file is missing.
  std::string read(const FileId& file) const;
  void write(const FileId& file, std::string_view bytes);
  void remove(const FileId& file);

  /// All `.lean` files, sorted.
  std::vector<FileId> files() const;

  const std::optional<std::filesystem::path>& root() const { return root_; }
  /// Directory for engine state; on-disk projects only.
  std::filesystem::path state_dir() const;

 private:
  Project() = default;
  std::filesystem::path path_of(const FileId& file) const;

  std::optional<std::filesystem::path> root_;
  std::map<FileId, std::string> memory_;
};

/// Atomically replaces `path` with `bytes` (write temp, fsync, rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace verirefine
