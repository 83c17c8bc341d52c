#pragma once

#include <chrono>
#include <string>

#include "verirefine/verifier.hpp"

namespace verirefine {

struct ExternalVerifierOptions {
  /// `{file}` expands to the project-relative path, shell-quoted.
  std::string command = "lake env lean {file}";
  std::string toolchain_id = "unknown";
  std::string dependency_revision = "unknown";
  std::chrono::milliseconds timeout{std::chrono::minutes(20)};
};

/// Parses single-file check output of the form
/// `path:line:col: severity: message` (1-based line, 0-based column,
/// optionally `line:col-line:col`) with indented continuation lines.
/// Lines that fit no diagnostic become info diagnostics spanning `whole`.
DiagnosticSet parse_lean_output(std::string_view output, const SourceRange& whole);

class ExternalVerifier : public VerifierAdapter {
 public:
  explicit ExternalVerifier(ExternalVerifierOptions options) : options_(std::move(options)) {}

  VerifierEnvironment environment() const override;
  /// A non-zero exit without any parsed error adds a synthetic error; a
  /// timeout is reported as an error diagnostic, not a launch failure.
  DiagnosticSet check_file(const Project& project, const FileId& file) override;

 private:
  ExternalVerifierOptions options_;
};

}  // namespace verirefine
