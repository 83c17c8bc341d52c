#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "verirefine/corpus.hpp"
#include "verirefine/engine.hpp"
#include "verirefine/stage1.hpp"

namespace verirefine {

class AmbiguousTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Stage2Config {
  int max_calls = 10 * 21 + 9;  ///< T
  int retries = 10;             ///< R
  int rounds = 21;              ///< C
  int split_threshold = 1200;
  bool split_enabled = true;
  bool goal_queries = true;
  int header_bound = 64;
  std::string chapters_dir = "Chapters";
  ProofTargetPolicy policy;
  std::int64_t start_index = std::numeric_limits<std::int64_t>::min();

  int attempt_bound() const { return retries * rounds; }
};

struct ProofTask {
  std::int64_t index = 0;
  std::string label;
  std::string reference_proof;
  std::optional<LemmaMapEntry> hints;
  FileId file;
  /// Rank among the dataset records mapped to `file`, by number components.
  std::optional<std::size_t> position;
};

struct HoleTarget {
  FileId file;
  SourceRange range;
  std::string declaration;
};

/// Finds the first hole in the body of the declaration whose docstring label
/// equals the task label, falling back to the declaration at the task's
/// position. Absent when that declaration has no hole. Throws
/// AmbiguousTarget when the label occurs on more than one declaration and
/// MissingTarget when no declaration matches.
std::optional<HoleTarget> locate_target_hole(const FileId& file, std::string_view text, const ProofTask& task);

/// Smallest start position; ties broken by message.
Diagnostic select_error(const DiagnosticSet& diagnostics);

/// Exact signature text (keyword up to the body delimiter) of every declaration.
std::vector<std::string> signature_texts(std::string_view text);

/// Rejects edits that change any declaration signature.
PatchGuard signature_guard();

/// Navigation cues for operator requests: one "- name" line per hint.
std::string render_hints(const LemmaMapEntry& entry);

enum class ProofStatus { solved, unsolved, already_closed, skipped };
std::string_view to_string(ProofStatus s);

struct Stage2Item {
  std::int64_t index = 0;
  std::string label;
  FileId file;
  std::string declaration;
  ProofStatus status = ProofStatus::skipped;
  int attempts = 0;      ///< proof-patch proposals
  int fix_attempts = 0;  ///< compile-error fixes
  int plans = 0;         ///< plan + replan calls
  std::int64_t verifier_calls = 0;
  int budget_used = 0;   ///< t
  std::size_t holes_before = 0;
  std::size_t holes_after = 0;
  std::size_t errors_after = 0;
  /// Non-empty lines of the target declaration after the item.
  int proof_lines = 0;
  std::string note;
};

void to_json(nlohmann::json& j, const Stage2Item& r);

/// Last known diagnostics per file, valid while the file bytes are unchanged.
class DiagnosticCache {
 public:
  void put(const FileId& file, std::string_view bytes, DiagnosticSet ds);
  std::optional<DiagnosticSet> get(const FileId& file, std::string_view bytes) const;

 private:
  std::map<FileId, std::pair<std::uint64_t, DiagnosticSet>> entries_;
};

/// Splits the task's file when it exceeds the threshold, re-verifies the
/// parts and returns the file that holds the target. A split whose parts do
/// not all verify is rolled back.
FileId split_if_large_and_resolve(EngineContext& ctx, const ProofTask& task, const Stage2Config& config,
                                  DiagnosticCache& cache);

/// The file currently holding the task's declaration: the target file or
/// one of its parts.
FileId resolve_task_file(const Project& project, const ProofTask& task);

Stage2Item run_stage2_item(EngineContext& ctx, const ProofTask& task, const Stage2Config& config,
                           DiagnosticCache& cache);

/// Proof tasks in index order for the records selected by the policy.
std::vector<ProofTask> proof_tasks(const std::vector<DatasetRecord>& records,
                                   const std::map<std::string, LemmaMapEntry>& lemma_map,
                                   const Stage2Config& config);

struct Stage2Result {
  std::vector<Stage2Item> items;
  bool stopped_early = false;
};

Stage2Result run_stage2(const std::vector<ProofTask>& tasks, EngineContext& ctx, const Stage2Config& config);

}  // namespace verirefine
