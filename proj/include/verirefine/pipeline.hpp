#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "verirefine/accounting.hpp"
#include "verirefine/instrumentation.hpp"
#include "verirefine/stage1.hpp"
#include "verirefine/stage2.hpp"
#include "verirefine/verifier.hpp"

namespace verirefine {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string corpus = "toy";
  std::filesystem::path dataset;
  std::filesystem::path project;
  std::optional<std::filesystem::path> lemma_map;
  /// 1, 2, or 0 for both in order.
  int stage = 0;
  int budget_k = 3;
  int budget_t = 10 * 21 + 9;
  int budget_r = 10;
  int budget_c = 21;
  int split_threshold = 1200;
  bool goal_queries = true;
  /// Imports written at the top of every new section file.
  std::vector<std::string> header_imports = {"Mathlib"};
  AdapterKind adapter = AdapterKind::simulated;
  std::string verifier_command = "lake env lean {file}";
  std::string toolchain_id;
  std::string dependency_revision;
  int verifier_timeout_s = 20 * 60;
  /// "scripted" or "external".
  std::string operators = "scripted";
  /// Operator kind (or "default") -> command template for the external bridge.
  std::map<std::string, std::string> operator_commands;
  int operator_timeout_s = 600;
  std::optional<std::string> run_id;
  /// Stop cleanly after this many items in this invocation (-1: never).
  std::int64_t stop_after = -1;
  /// Kill the process after this many items (crash-injection hook).
  std::int64_t crash_after = -1;
  /// Treat a corrupt checkpoint as absent.
  bool force = false;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);
/// Throws ConfigError on an unusable configuration.
void validate_config(const RunConfig& c);

/// Engine bookkeeping under `<project>/.verirefine/`.
struct StatePaths {
  std::filesystem::path dir;
  std::filesystem::path metrics;
  std::filesystem::path history;
  std::filesystem::path logs;
  std::filesystem::path provenance;

  std::filesystem::path checkpoint(int stage) const;
  std::filesystem::path summary(int stage) const;
};

StatePaths state_paths(const std::filesystem::path& project_root);

struct StageOutcome {
  int stage = 0;
  std::string run_id;
  bool stopped_early = false;
  std::optional<bool> pb;
  QualityMetrics quality;
  MetricsSummary summary;
  std::vector<Stage1Item> statements;
  std::vector<Stage2Item> proofs;
};

/// Runs one stage from its checkpoint as a fresh run id.
StageOutcome run_stage(const RunConfig& config, int stage);
/// Runs the configured stage(s); with stage 0, stage 2 starts only if stage 1
/// finished without stopping early.
std::vector<StageOutcome> run_pipeline(const RunConfig& config);

}  // namespace verirefine
