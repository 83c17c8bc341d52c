#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "verirefine/diagnostics.hpp"
#include "verirefine/project.hpp"
#include "verirefine/source.hpp"

namespace verirefine {

class MetricsLog;

/// The toolchain could not be run at all; distinct from a failed check.
class VerificationLaunchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AdapterKind { external, simulated };

std::string_view to_string(AdapterKind k);
AdapterKind adapter_from_string(std::string_view s);

struct VerifierEnvironment {
  std::string toolchain_id;
  std::string dependency_revision;
  AdapterKind adapter = AdapterKind::simulated;
};

void to_json(nlohmann::json& j, const VerifierEnvironment& e);

/// Elaborated goal at a hole: the target and the local context, in order.
struct GoalState {
  std::string goal;
  std::vector<std::pair<std::string, std::string>> context;

  bool operator==(const GoalState&) const = default;
};

void to_json(nlohmann::json& j, const GoalState& g);

struct CheckResult {
  bool ok = false;
  DiagnosticSet diagnostics;
};

class VerifierAdapter {
 public:
  virtual ~VerifierAdapter() = default;

  virtual VerifierEnvironment environment() const = 0;
  /// One single-file check. Throws VerificationLaunchError.
  virtual DiagnosticSet check_file(const Project& project, const FileId& file) = 0;
  /// Absent when unsupported or when the file has errors.
  virtual std::optional<GoalState> goal_at(const Project& project, const FileId& file, const SourceRange& hole) {
    (void)project, (void)file, (void)hole;
    return std::nullopt;
  }
};

/// Front door to an adapter. Every verify_file is one counted verifier call
/// and emits exactly one lean_check event; project checks and goal queries
/// are not counted.
class Verifier {
 public:
  explicit Verifier(std::shared_ptr<VerifierAdapter> adapter, MetricsLog* metrics = nullptr);

  CheckResult verify_file(const Project& project, const FileId& file);
  /// Whole-project build; optionally reports each file's diagnostics.
  CheckResult verify_project(const Project& project, std::map<FileId, DiagnosticSet>* per_file = nullptr);
  std::optional<GoalState> goal_state(const Project& project, const FileId& file, const SourceRange& hole);

  std::size_t calls() const { return calls_; }
  const VerifierEnvironment& environment() const { return env_; }

  void set_metrics(MetricsLog* metrics) { metrics_ = metrics; }
  void set_goal_queries(bool enabled) { goal_queries_ = enabled; }
  /// Observes every counted check (tests use this to audit call accounting).
  void set_observer(std::function<void(const FileId&, const CheckResult&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  std::shared_ptr<VerifierAdapter> adapter_;
  VerifierEnvironment env_;
  MetricsLog* metrics_;
  std::size_t calls_ = 0;
  bool goal_queries_ = true;
  std::function<void(const FileId&, const CheckResult&)> observer_;
};

}  // namespace verirefine
