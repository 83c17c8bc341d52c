#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "verirefine/corpus.hpp"
#include "verirefine/engine.hpp"
#include "verirefine/instrumentation.hpp"
#include "verirefine/kernel.hpp"
#include "verirefine/operators.hpp"
#include "verirefine/pipeline.hpp"
#include "verirefine/project.hpp"
#include "verirefine/sim_verifier.hpp"

namespace testenv {

std::filesystem::path data_dir();
std::filesystem::path toy_dir();
std::filesystem::path fixtures_dir();

/// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Copies the toy project template into `dir`/project and returns a config for it.
verirefine::RunConfig toy_config(const std::filesystem::path& dir);

/// Every `.lean` file of an on-disk project, by path.
std::map<std::string, std::string> project_bytes(const std::filesystem::path& root);

/// In-memory project seeded with the toy helper module.
verirefine::Project toy_memory_project();

/// Owns everything an EngineContext points at.
struct Engine {
  verirefine::Project project;
  verirefine::MetricsLog metrics;
  verirefine::Verifier verifier;
  verirefine::Kernel kernel;
  verirefine::OperatorSet operators;
  verirefine::EngineContext ctx;

  explicit Engine(verirefine::Project p, bool keep_events = true);
};

std::vector<verirefine::DatasetRecord> toy_records();
std::map<std::string, verirefine::LemmaMapEntry> toy_lemma_map();

}  // namespace testenv
