#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace verirefine {

/// Full transcript of one operator invocation.
struct PerCallLog {
  std::string stdout_section;
  std::string stderr_section;
  std::optional<std::int64_t> tokens_used;
};

/// "STDOUT:\n...\nSTDERR:\n...\n" followed by the two-line footer
/// "tokens used\n12,345\n" when a count is known.
std::string render_log(const PerCallLog& log);

/// Value after the last "tokens used" marker, commas allowed.
std::optional<std::int64_t> parse_token_footer(std::string_view log_text);

std::string format_thousands(std::int64_t n);

struct TranscriptName {
  std::string stage;
  std::string agent;
  std::string task;
  std::int64_t seq = 0;
};

/// "{stage}_agent_{agent}_{task}_{seq:06}.log"
std::string transcript_file_name(const TranscriptName& name);
std::optional<TranscriptName> parse_transcript_name(std::string_view file_name);

inline constexpr std::string_view kTranscriptManifest = "index.jsonl";

/// Directory of per-call logs plus an `index.jsonl` manifest with one line
/// per log. Sequence numbers continue across reopenings.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);

  /// Returns the written log's path. Throws on write failure.
  std::filesystem::path write(std::string_view stage, std::string_view agent, std::string_view task,
                              std::string_view lean_file, const PerCallLog& log);

  const std::filesystem::path& dir() const { return dir_; }
  std::int64_t written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::int64_t next_seq_ = 0;
  std::int64_t written_ = 0;
};

}  // namespace verirefine
