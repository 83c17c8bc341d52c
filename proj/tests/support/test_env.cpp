#include "test_env.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace verirefine;

namespace testenv {

fs::path data_dir() {
  if (const char* root = std::getenv("VERIREFINE_ROOT"); root && *root) return fs::path(root) / "data";
  return VERIREFINE_DATA_DIR;
}

fs::path toy_dir() { return data_dir() / "toy"; }
fs::path fixtures_dir() { return data_dir() / "fixtures"; }

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("verirefine-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

RunConfig toy_config(const fs::path& dir) {
  fs::create_directories(dir / "project");
  fs::copy(toy_dir() / "project", dir / "project", fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  auto c = load_run_config(toy_dir() / "config.json");
  c.project = dir / "project";
  return c;
}

std::map<std::string, std::string> project_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  auto p = Project::on_disk(root);
  for (const auto& f : p.files()) out[f] = p.read(f);
  return out;
}

Project toy_memory_project() {
  auto p = Project::in_memory();
  auto disk = Project::on_disk(toy_dir() / "project");
  for (const auto& f : disk.files()) p.write(f, disk.read(f));
  return p;
}

Engine::Engine(Project p, bool keep_events)
    : project(std::move(p)),
      verifier(std::make_shared<SimulatedVerifier>(), keep_events ? &metrics : nullptr),
      kernel(project, verifier, keep_events ? &metrics : nullptr),
      ctx{project, verifier, kernel, operators, keep_events ? &metrics : nullptr, nullptr, std::nullopt, "test", {}} {
  if (keep_events) operators.set_metrics(&metrics);
  metrics.set_run_id("test_run");
}

std::vector<DatasetRecord> toy_records() { return load_dataset(toy_dir() / "dataset.json"); }

std::map<std::string, LemmaMapEntry> toy_lemma_map() { return load_lemma_map(toy_dir() / "lemma_map.json"); }

}  // namespace testenv
