#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

#include "verirefine/operators.hpp"

namespace verirefine {

struct ExternalOperatorOptions {
  /// Shell template; {kind}, {agent}, {stage}, {task} and {file} are expanded.
  std::string command;
  std::chrono::milliseconds timeout = std::chrono::seconds(600);
  std::filesystem::path cwd = ".";
};

/// Runs an external command with the request as JSON on stdin. The reply is
/// the last fenced block of stdout (or all of stdout when there is none, for
/// text-only kinds). For patch kinds the block replaces the request's
/// edit range, or the hole when no edit range is given. Each call is
/// recorded as a per-call log when a transcript store is attached.
class ExternalOperator : public Operator {
 public:
  explicit ExternalOperator(ExternalOperatorOptions options) : options_(std::move(options)) {}
  std::string name() const override { return "external"; }
  OperatorResponse run(const OperatorRequest& request, OperatorContext& context) override;

 private:
  ExternalOperatorOptions options_;
};

/// Reply text for a text-only kind: the last fenced block, or stdout with a
/// trailing token footer removed.
std::string reply_text(const std::string& out);

}  // namespace verirefine
