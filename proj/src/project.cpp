#include "verirefine/project.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace verirefine {

namespace {

constexpr std::string_view kStateDir = ".verirefine";
constexpr std::string_view kLakeConfig = "lakefile.lean";

void check_relative(const FileId& file) {
  if (file.empty() || file.front() == '/' || file.find("..") != std::string::npos) {
    throw ProjectError("invalid project file id '" + file + "'");
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw ProjectError("cannot open '" + tmp.string() + "' for writing");
    std::size_t done = 0;
    while (done < bytes.size()) {
      const auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
      if (n < 0) {
        ::close(fd);
        throw ProjectError("write failed for '" + tmp.string() + "'");
      }
      done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw ProjectError("rename to '" + path.string() + "' failed: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProjectError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Project Project::in_memory() { return Project(); }

Project Project::on_disk(fs::path root) {
  Project p;
  fs::create_directories(root);
  p.root_ = fs::absolute(root);
  return p;
}

fs::path Project::path_of(const FileId& file) const {
  check_relative(file);
  return *root_ / file;
}

bool Project::exists(const FileId& file) const {
  if (!root_) return memory_.count(file) != 0;
  return fs::is_regular_file(path_of(file));
}

std::string Project::read(const FileId& file) const {
  if (!root_) {
    auto it = memory_.find(file);
    if (it == memory_.end()) throw ProjectError("no such project file '" + file + "'");
    return it->second;
  }
  const auto p = path_of(file);
  if (!fs::is_regular_file(p)) throw ProjectError("no such project file '" + file + "'");
  return read_file(p);
}

void Project::write(const FileId& file, std::string_view bytes) {
  check_relative(file);
  if (!root_) {
    memory_[file] = std::string(bytes);
    return;
  }
  write_file_atomic(path_of(file), bytes);
}

void Project::remove(const FileId& file) {
  if (!root_) {
    memory_.erase(file);
    return;
  }
  std::error_code ec;
  fs::remove(path_of(file), ec);
}

std::vector<FileId> Project::files() const {
  std::vector<FileId> out;
  if (!root_) {
    for (const auto& [id, _] : memory_) {
      if (id.size() > 5 && id.compare(id.size() - 5, 5, ".lean") == 0 && id != kLakeConfig) out.push_back(id);
    }
    return out;
  }
  for (auto it = fs::recursive_directory_iterator(*root_); it != fs::recursive_directory_iterator(); ++it) {
    const auto rel = fs::relative(it->path(), *root_).generic_string();
    if (it->is_directory() && (rel == kStateDir || rel.rfind(".", 0) == 0)) {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().extension() == ".lean" && rel != kLakeConfig) out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path Project::state_dir() const {
  if (!root_) throw ProjectError("in-memory project has no state directory");
  return *root_ / kStateDir;
}

}  // namespace verirefine
