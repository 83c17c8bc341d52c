#include "verirefine/instrumentation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <deque>
#include <random>
#include <sstream>

#include "verirefine/project.hpp"
#include "verirefine/transcript.hpp"

namespace fs = std::filesystem;

namespace verirefine {

using nlohmann::json;

namespace {

std::tm utc_now(long long& micros) {
  const auto now = std::chrono::system_clock::now();
  const auto since = now.time_since_epoch();
  micros = std::chrono::duration_cast<std::chrono::microseconds>(since).count() % 1000000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return tm;
}

}  // namespace

std::string utc_timestamp() {
  long long micros = 0;
  const auto tm = utc_now(micros);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lld+00:00", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, micros);
  return buf;
}

std::string make_run_id(std::string_view pipeline, std::string_view stage) {
  long long micros = 0;
  const auto tm = utc_now(micros);
  char stamp[64];
  std::snprintf(stamp, sizeof stamp, "%04d%02d%02dT%02d%02d%02dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec);
  std::random_device rd;
  char hex[16];
  std::snprintf(hex, sizeof hex, "%08x", static_cast<unsigned>(rd()));
  return std::string(pipeline) + "_" + std::string(stage) + "_" + stamp + "_" + hex;
}

void to_json(json& j, const MetricsEvent& e) {
  j = json{{"ts", e.ts}, {"run_id", e.run_id}, {"event", e.event}, {"data", e.data}};
}

MetricsEvent parse_event(const json& j) {
  if (!j.is_object() || j.size() != 4 || !j.contains("ts") || !j.contains("run_id") || !j.contains("event") ||
      !j.contains("data")) {
    throw InstrumentationError("metrics line must have exactly ts, run_id, event, data");
  }
  MetricsEvent e;
  e.ts = j.at("ts").get<std::string>();
  e.run_id = j.at("run_id").get<std::string>();
  e.event = j.at("event").get<std::string>();
  e.data = j.at("data");
  if (!e.data.is_object()) throw InstrumentationError("metrics data must be an object");
  return e;
}

MetricsLog::MetricsLog(fs::path path) : path_(std::move(path)) {
  if (path_.empty()) return;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw InstrumentationError("cannot open metrics log '" + path_.string() + "'");
}

void MetricsLog::emit(std::string_view event, json data) {
  MetricsEvent e{utc_timestamp(), run_id_, std::string(event), std::move(data)};
  if (out_.is_open()) {
    out_ << json(e).dump() << '\n';
    out_.flush();
    if (!out_) throw InstrumentationError("metrics write failed for '" + path_.string() + "'");
  }
  events_.push_back(std::move(e));
  if (listener_) listener_(events_.back());
}

std::size_t MetricsLog::count(std::string_view event) const {
  return static_cast<std::size_t>(
      std::count_if(events_.begin(), events_.end(), [&](const MetricsEvent& e) { return e.event == event; }));
}

std::vector<MetricsEvent> read_metrics_text(std::string_view text) {
  std::vector<MetricsEvent> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) break;
    ++line_no;
    const auto line = text.substr(start, nl - start);
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(parse_event(json::parse(line)));
    } catch (const json::exception& e) {
      throw InstrumentationError("metrics line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InstrumentationError& e) {
      throw InstrumentationError("metrics line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<MetricsEvent> read_metrics(const fs::path& path) { return read_metrics_text(read_file(path)); }

void write_checkpoint(const fs::path& path, const Checkpoint& checkpoint) {
  write_file_atomic(path, json{{checkpoint.key, checkpoint.cursor}}.dump() + "\n");
}

std::optional<Checkpoint> read_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint '" + path.string() + "' is not valid JSON");
  }
  if (!j.is_object() || j.size() != 1) {
    throw CheckpointError("checkpoint '" + path.string() + "' must hold exactly one key");
  }
  const auto& [key, value] = *j.items().begin();
  if ((key != kItemCursor && key != kFileCursor) || !value.is_number_integer() || value.get<std::int64_t>() < 0) {
    throw CheckpointError("checkpoint '" + path.string() + "' has no valid integer cursor");
  }
  return Checkpoint{key, value.get<std::int64_t>()};
}

void to_json(json& j, const HistoryRecord& r) {
  j = json{{"ts", r.ts},           {"pipeline", r.pipeline}, {"run_id", r.run_id},
           {"lean_file", r.lean_file}, {"task_id", r.task_id}, {"kind", r.kind}};
  if (r.summary) j["summary"] = *r.summary;
  if (r.log_path) j["log_path"] = *r.log_path;
  j["payload"] = r.payload;
}

void from_json(const json& j, HistoryRecord& r) {
  r.ts = j.value("ts", "");
  r.pipeline = j.value("pipeline", "");
  r.run_id = j.value("run_id", "");
  r.lean_file = j.value("lean_file", "");
  r.task_id = j.value("task_id", "");
  r.kind = j.value("kind", "");
  if (j.contains("summary")) r.summary = j.at("summary").get<std::string>();
  if (j.contains("log_path")) r.log_path = j.at("log_path").get<std::string>();
  r.payload = j.value("payload", json::object());
}

std::string truncate_string(std::string_view s, std::size_t bound) {
  if (s.size() <= bound) return std::string(s);
  std::size_t cut = bound;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return std::string(s.substr(0, cut)) + "...[truncated " + std::to_string(s.size() - cut) + " bytes]";
}

HistoryStore::HistoryStore(fs::path path, std::size_t bound) : path_(std::move(path)), bound_(bound) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
}

void HistoryStore::append(HistoryRecord record) {
  if (record.ts.empty()) record.ts = utc_timestamp();
  for (auto* s : {&record.pipeline, &record.run_id, &record.lean_file, &record.task_id, &record.kind}) {
    *s = truncate_string(*s, bound_);
  }
  if (record.summary) record.summary = truncate_string(*record.summary, bound_);
  if (record.log_path) record.log_path = truncate_string(*record.log_path, bound_);
  if (record.payload.is_object()) {
    for (auto& [k, v] : record.payload.items()) {
      if (v.is_string()) v = truncate_string(v.get<std::string>(), bound_);
    }
  }
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << json(record).dump() << '\n';
  if (!out.flush()) throw InstrumentationError("cannot append history '" + path_.string() + "'");
}

std::vector<HistoryRecord> HistoryStore::window(std::string_view lean_file, std::string_view task_id,
                                                std::size_t window) const {
  std::deque<HistoryRecord> last;
  if (!fs::exists(path_) || window == 0) return {};
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = json::parse(line).get<HistoryRecord>();
    if (r.lean_file != lean_file || r.task_id != task_id) continue;
    last.push_back(std::move(r));
    if (last.size() > window) last.pop_front();
  }
  return {last.begin(), last.end()};
}

json summary_json(const MetricsSummary& s) {
  json j{{"pipeline", s.pipeline}};
  if (!s.run_id.empty()) j["run_id"] = s.run_id;
  j[s.cursor.key == kFileCursor ? "processed_files" : "processed_items"] = s.processed;
  j[s.cursor.key] = s.cursor.cursor;
  j["total_seconds"] = s.total_seconds;
  for (const auto& [k, v] : s.counters) j[k] = v;
  j["total_tokens_used"] = s.total_tokens_used;
  return j;
}

void write_summary(const fs::path& path, const MetricsSummary& s) {
  write_file_atomic(path, summary_json(s).dump(2) + "\n");
}

json backfill_data(const TokenBackfillEvent& e) {
  json j{{"stage", e.stage},
         {"task", e.task},
         {"tokens_used_total", e.tokens_used_total},
         {"tokens_used_by_agent", e.tokens_used_by_agent},
         {"log_file_count", e.log_file_count}};
  if (e.lean_file) j["lean_file"] = *e.lean_file;
  return j;
}

BackfillResult token_backfill(const fs::path& log_dir) {
  BackfillResult result;
  if (!fs::is_directory(log_dir)) return result;

  struct ManifestEntry {
    std::string stage, agent, task, lean_file;
  };
  std::map<std::string, ManifestEntry> manifest;
  const auto manifest_path = log_dir / kTranscriptManifest;
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = json::parse(line);
        manifest[j.at("log").get<std::string>()] = {j.value("stage", ""), j.value("agent", ""),
                                                    j.value("task", ""), j.value("lean_file", "")};
      } catch (const json::exception&) {
        result.warnings.push_back("malformed manifest line skipped");
      }
    }
  }

  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(log_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".log") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());

  std::map<std::pair<std::string, std::string>, TokenBackfillEvent> tasks;
  for (const auto& path : logs) {
    const auto file_name = path.filename().string();
    ManifestEntry who;
    if (auto it = manifest.find(file_name); it != manifest.end()) {
      who = it->second;
    } else if (auto parsed = parse_transcript_name(file_name)) {
      who = {parsed->stage, parsed->agent, parsed->task, ""};
    } else {
      result.warnings.push_back("unrecognized log name '" + file_name + "' skipped");
      continue;
    }
    std::string text;
    try {
      text = read_file(path);
    } catch (const ProjectError&) {
      result.warnings.push_back("unreadable log '" + file_name + "' skipped");
      continue;
    }
    auto& t = tasks[{who.stage, who.task}];
    t.stage = who.stage;
    t.task = who.task;
    ++t.log_file_count;
    if (!who.lean_file.empty()) t.lean_file = who.lean_file;
    const auto tokens = parse_token_footer(text).value_or(0);
    t.tokens_used_by_agent[who.agent] += tokens;
    t.tokens_used_total += tokens;
  }
  for (auto& [_, t] : tasks) result.tasks.push_back(std::move(t));
  return result;
}

void emit_backfill(MetricsLog& log, const BackfillResult& result) {
  log.emit(events::run_start, {{"pipeline", "token_backfill"}, {"schema_version", kMetricsSchemaVersion}});
  std::int64_t total = 0;
  for (const auto& w : result.warnings) log.emit(events::warning, {{"message", w}});
  for (const auto& t : result.tasks) {
    log.emit(events::task_tokens, backfill_data(t));
    total += t.tokens_used_total;
  }
  log.emit(events::run_end, {{"pipeline", "token_backfill"},
                             {"tasks", result.tasks.size()},
                             {"total_tokens_used", total}});
}

}  // namespace verirefine
