#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace verirefine {

class InstrumentationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Event labels of the metrics stream.
namespace events {
inline constexpr std::string_view run_start = "run_start";
inline constexpr std::string_view run_end = "run_end";
inline constexpr std::string_view item_start = "item_start";
inline constexpr std::string_view item_end = "item_end";
inline constexpr std::string_view lean_check = "lean_check";
inline constexpr std::string_view project_check = "project_check";
inline constexpr std::string_view agent_result = "agent_result";
inline constexpr std::string_view patch_result = "patch_result";
inline constexpr std::string_view split = "split";
inline constexpr std::string_view task_tokens = "task_tokens";
inline constexpr std::string_view warning = "warning";
}  // namespace events

/// Version 1 streams predate explicit lean_check/agent_result events.
inline constexpr int kMetricsSchemaVersion = 2;
inline constexpr std::size_t kHistoryTruncation = 4096;

/// "2026-01-14T17:23:57.451963+00:00"
std::string utc_timestamp();
/// {pipeline}_{stage}_{YYYYMMDDTHHMMSSZ}_{8 hex}
std::string make_run_id(std::string_view pipeline, std::string_view stage);

struct MetricsEvent {
  std::string ts;
  std::string run_id;
  std::string event;
  nlohmann::json data = nlohmann::json::object();
};

void to_json(nlohmann::json& j, const MetricsEvent& e);
/// Throws InstrumentationError unless exactly the four top-level fields are present.
MetricsEvent parse_event(const nlohmann::json& j);

/// Append-only JSONL metrics writer. Each emitted line is flushed before
/// emit returns. With an empty path events are kept in memory only.
class MetricsLog {
 public:
  explicit MetricsLog(std::filesystem::path path = {});

  void set_run_id(std::string run_id) { run_id_ = std::move(run_id); }
  const std::string& run_id() const { return run_id_; }

  void emit(std::string_view event, nlohmann::json data = nlohmann::json::object());

  /// Events emitted through this instance, in order.
  const std::vector<MetricsEvent>& events() const { return events_; }
  std::size_t count(std::string_view event) const;

  /// Called after every emit; used by tests and the crash-injection hook.
  void set_listener(std::function<void(const MetricsEvent&)> listener) { listener_ = std::move(listener); }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::string run_id_;
  std::vector<MetricsEvent> events_;
  std::function<void(const MetricsEvent&)> listener_;
};

/// Reads all complete lines. A trailing line without newline is an in-flight
/// write and is ignored.
std::vector<MetricsEvent> read_metrics(const std::filesystem::path& path);
std::vector<MetricsEvent> read_metrics_text(std::string_view text);

struct Checkpoint {
  std::string key = "next_index";
  std::int64_t cursor = 0;

  bool operator==(const Checkpoint&) const = default;
};

inline constexpr std::string_view kItemCursor = "next_index";
inline constexpr std::string_view kFileCursor = "next_file_index";

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Absent when no checkpoint exists. Throws CheckpointError when the file is
/// not a single-key object with an integer cursor.
std::optional<Checkpoint> read_checkpoint(const std::filesystem::path& path);

struct HistoryRecord {
  std::string ts;
  std::string pipeline;
  std::string run_id;
  std::string lean_file;
  std::string task_id;
  std::string kind;
  std::optional<std::string> summary;
  std::optional<std::string> log_path;
  nlohmann::json payload = nlohmann::json::object();
};

void to_json(nlohmann::json& j, const HistoryRecord& r);
void from_json(const nlohmann::json& j, HistoryRecord& r);

/// Truncates to at most `bound` bytes (on a UTF-8 boundary) plus a marker.
std::string truncate_string(std::string_view s, std::size_t bound);

class HistoryStore {
 public:
  explicit HistoryStore(std::filesystem::path path, std::size_t bound = kHistoryTruncation);

  /// Applies truncation to top-level strings and top-level payload strings.
  void append(HistoryRecord record);
  /// The last `window` records for (lean_file, task_id), oldest first.
  std::vector<HistoryRecord> window(std::string_view lean_file, std::string_view task_id, std::size_t window) const;

 private:
  std::filesystem::path path_;
  std::size_t bound_;
};

/// End-of-run totals; serialized flat, mirroring the run_end payload.
struct MetricsSummary {
  std::string pipeline;
  std::string run_id;
  std::int64_t processed = 0;
  Checkpoint cursor;
  double total_seconds = 0.0;
  /// e.g. total_b_attempts, total_a_attempts, total_c_plans, total_lean_checks.
  std::map<std::string, std::int64_t> counters;
  std::int64_t total_tokens_used = 0;
};

nlohmann::json summary_json(const MetricsSummary& s);
void write_summary(const std::filesystem::path& path, const MetricsSummary& s);

struct TokenBackfillEvent {
  std::string stage;
  std::string task;
  std::int64_t tokens_used_total = 0;
  std::map<std::string, std::int64_t> tokens_used_by_agent;
  std::int64_t log_file_count = 0;
  std::optional<std::string> lean_file;
};

nlohmann::json backfill_data(const TokenBackfillEvent& e);

struct BackfillResult {
  std::vector<TokenBackfillEvent> tasks;
  std::vector<std::string> warnings;
};

/// Scans a per-call log directory. Task, stage and agent come from the log
/// file name (see TranscriptStore); lean_file from the directory manifest.
BackfillResult token_backfill(const std::filesystem::path& log_dir);
/// Emits the backfill as its own run: run_start, task_tokens..., run_end.
void emit_backfill(MetricsLog& log, const BackfillResult& result);

}  // namespace verirefine
