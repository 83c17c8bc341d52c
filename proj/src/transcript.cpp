#include "verirefine/transcript.hpp"

#include <cstdio>
#include <fstream>
#include <regex>

#include <json.hpp>

#include "verirefine/instrumentation.hpp"

namespace fs = std::filesystem;

namespace verirefine {

std::string format_thousands(std::int64_t n) {
  auto digits = std::to_string(n < 0 ? -n : n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return n < 0 ? "-" + out : out;
}

std::string render_log(const PerCallLog& log) {
  std::string out = "STDOUT:\n" + log.stdout_section;
  if (!out.ends_with('\n')) out += '\n';
  out += "STDERR:\n" + log.stderr_section;
  if (!out.ends_with('\n')) out += '\n';
  if (log.tokens_used) out += "tokens used\n" + format_thousands(*log.tokens_used) + "\n";
  return out;
}

std::optional<std::int64_t> parse_token_footer(std::string_view log_text) {
  static const std::regex re(R"(tokens used\s*([0-9][0-9,]*))");
  std::optional<std::int64_t> last;
  for (std::cregex_iterator it(log_text.begin(), log_text.end(), re), end; it != end; ++it) {
    std::string digits;
    for (char c : (*it)[1].str()) {
      if (c != ',') digits += c;
    }
    last = std::stoll(digits);
  }
  return last;
}

std::string transcript_file_name(const TranscriptName& name) {
  char seq[32];
  std::snprintf(seq, sizeof seq, "%06lld", static_cast<long long>(name.seq));
  std::string task = name.task;
  for (auto& c : task) {
    if (c == '/' || c == ' ' || c == '\\') c = '-';
  }
  return name.stage + "_agent_" + name.agent + "_" + task + "_" + seq + ".log";
}

std::optional<TranscriptName> parse_transcript_name(std::string_view file_name) {
  static const std::regex re(R"(^([A-Za-z0-9-]+)_agent_([A-Za-z0-9]+)_(.+)_(\d{6,})\.log$)");
  std::cmatch m;
  if (!std::regex_match(file_name.begin(), file_name.end(), m, re)) return std::nullopt;
  return TranscriptName{m[1].str(), m[2].str(), m[3].str(), std::stoll(m[4].str())};
}

TranscriptStore::TranscriptStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (auto name = parse_transcript_name(entry.path().filename().string())) {
      next_seq_ = std::max(next_seq_, name->seq + 1);
    }
  }
}

fs::path TranscriptStore::write(std::string_view stage, std::string_view agent, std::string_view task,
                                std::string_view lean_file, const PerCallLog& log) {
  const TranscriptName name{std::string(stage), std::string(agent), std::string(task), next_seq_++};
  const auto file = dir_ / transcript_file_name(name);
  {
    std::ofstream out(file, std::ios::binary);
    out << render_log(log);
    if (!out.flush()) throw InstrumentationError("cannot write per-call log '" + file.string() + "'");
  }
  std::ofstream manifest(dir_ / kTranscriptManifest, std::ios::app);
  nlohmann::json line{{"log", file.filename().string()}, {"stage", stage}, {"agent", agent},
                      {"task", task},                    {"lean_file", lean_file}};
  manifest << line.dump() << '\n';
  if (!manifest.flush()) throw InstrumentationError("cannot append transcript manifest");
  ++written_;
  return file;
}

}  // namespace verirefine
