#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace verirefine {

struct ProcessResult {
  bool launched = false;
  bool timed_out = false;
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs `command` through /bin/sh in `cwd`, feeding `input` on stdin and
/// capturing stdout/stderr. The process group is killed on timeout.
ProcessResult run_process(const std::string& command, const std::filesystem::path& cwd,
                          std::string_view input, std::chrono::milliseconds timeout);

/// Substitutes `{key}` placeholders; values are single-quoted for the shell.
std::string expand_command(std::string_view tmpl, const std::map<std::string, std::string>& vars);

std::string shell_quote(std::string_view s);

}  // namespace verirefine
