#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "verirefine/diagnostics.hpp"
#include "verirefine/project.hpp"
#include "verirefine/verifier.hpp"

namespace verirefine {

class MetricsLog;

/// Restoring a snapshot did not reproduce the captured bytes. Fatal.
class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stage { statements = 1, proofs = 2 };

/// (primary, secondary): (errors, localized errors) in stage 1 and
/// (errors, holes) in stage 2.
struct ObjectivePair {
  std::size_t primary = 0;
  std::size_t secondary = 0;

  bool operator==(const ObjectivePair&) const = default;
};

/// Strict lexicographic order: a.primary < b.primary, or equal primaries and
/// a.secondary < b.secondary.
bool prec(const ObjectivePair& a, const ObjectivePair& b);

ObjectivePair stage1_objective(const DiagnosticSet& diagnostics, const Scope& scope);
ObjectivePair stage2_objective(const DiagnosticSet& diagnostics, std::string_view file_text);

void to_json(nlohmann::json& j, const ObjectivePair& p);

/// Replace `range` with `text`. Pure insertions use an empty range.
struct RegionEdit {
  SourceRange range;
  std::string text;
};

struct PatchProposal {
  FileId file;
  std::vector<RegionEdit> edits;
  std::string origin;

  bool empty() const { return edits.empty(); }
};

class PatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies non-overlapping edits. Throws PatchError on overlap or on a range
/// outside the text.
std::string apply_edits(std::string_view text, const std::vector<RegionEdit>& edits);

std::uint64_t fingerprint(std::string_view bytes);

struct Snapshot {
  FileId file;
  bool existed = false;
  std::string bytes;
  std::uint64_t fingerprint = 0;

  static Snapshot capture(const Project& project, const FileId& file);
  /// Makes the file byte-identical to capture time; throws KernelError otherwise.
  void restore(Project& project) const;
};

struct AttemptOutcome {
  bool accepted = false;
  /// False when the proposal was rejected before any verifier call.
  bool verified = false;
  ObjectivePair before;
  ObjectivePair after;
  /// Diagnostics of the committed state after the attempt.
  DiagnosticSet diagnostics_after;
  std::uint64_t snapshot_fingerprint = 0;
  std::string reject_reason;
};

/// Vetoes an applied edit before verification, e.g. a signature change.
/// Returns the reason when the edit must be rejected.
using PatchGuard = std::function<std::optional<std::string>(std::string_view before, std::string_view after)>;

struct AttemptTrace {
  Stage stage;
  const FileId& file;
  const Scope& scope;
  const Snapshot& snapshot;
  const AttemptOutcome& outcome;
  std::string_view committed_bytes;
};

/// Snapshot, apply within scope, verify once, commit on strict improvement,
/// restore otherwise. The only path through which proposals change files.
class Kernel {
 public:
  Kernel(Project& project, Verifier& verifier, MetricsLog* metrics = nullptr)
      : project_(project), verifier_(verifier), metrics_(metrics) {}

  AttemptOutcome try_patch(Stage stage, const FileId& file, const Scope& scope, const PatchProposal& patch,
                           const DiagnosticSet& diagnostics_before, const PatchGuard& guard = {});

  void set_observer(std::function<void(const AttemptTrace&)> observer) { observer_ = std::move(observer); }

  Project& project() { return project_; }
  Verifier& verifier() { return verifier_; }
  MetricsLog* metrics() { return metrics_; }

 private:
  ObjectivePair objective(Stage stage, const DiagnosticSet& ds, const Scope& scope, std::string_view text) const;
  AttemptOutcome reject(Stage stage, const FileId& file, const Scope& scope, const Snapshot& snap,
                        AttemptOutcome out, const PatchProposal& patch, std::string reason);
  void report(Stage stage, const FileId& file, const Scope& scope, const Snapshot& snap, const AttemptOutcome& out,
              const PatchProposal& patch);

  Project& project_;
  Verifier& verifier_;
  MetricsLog* metrics_;
  std::function<void(const AttemptTrace&)> observer_;
};

inline constexpr int kMaxScopeExpansions = 3;

/// Adds the whole lines of the error nearest to the scope (ties go to the
/// earlier error) plus the header. Unchanged when there are no errors.
Scope expand_scope(const Scope& scope, const DiagnosticSet& diagnostics, std::string_view file_text,
                   int header_bound = 64);

}  // namespace verirefine
