#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "verirefine/corpus.hpp"
#include "verirefine/diagnostics.hpp"
#include "verirefine/kernel.hpp"
#include "verirefine/verifier.hpp"

namespace verirefine {

class MetricsLog;
class TranscriptStore;

enum class OperatorKind {
  gen_skeleton,
  repair_patch,
  fix_compile_error,
  plan,
  replan,
  propose_proof_patch,
  split_hint,
};

std::string_view to_string(OperatorKind k);
OperatorKind operator_kind_from_string(std::string_view s);
/// Agent role letter used in metrics and log names: s (skeleton), b (repair),
/// c (planner), a (executor), x (splitter).
std::string_view agent_role(OperatorKind k);

/// Inputs for one operator call. Only the fields meaningful for `kind` are set.
struct OperatorRequest {
  OperatorKind kind = OperatorKind::gen_skeleton;
  std::string stage;
  std::string task_id;
  FileId file;
  std::string file_text;
  /// Where edits are allowed.
  Scope scope;
  /// The region a bridged operator's text replaces.
  std::optional<SourceRange> edit_range;
  DiagnosticSet diagnostics;
  std::optional<DatasetRecord> record;
  std::optional<GoalState> goal;
  std::optional<SourceRange> hole;
  std::string declaration;
  std::string plan;
  std::string reference_proof;
  /// Lemma-map hints, rendered as navigation cues.
  std::string hints;
  int attempt = 0;
  int round = 0;
};

nlohmann::json request_json(const OperatorRequest& r);

struct OperatorResponse {
  bool ok = false;
  std::string error;
  std::optional<PatchProposal> patch;
  /// Skeleton reply or plan text.
  std::string text;
  std::optional<std::int64_t> tokens_used;
  std::optional<std::string> transcript_ref;

  static OperatorResponse failure(std::string why) {
    OperatorResponse r;
    r.error = std::move(why);
    return r;
  }
};

struct OperatorContext {
  TranscriptStore* transcripts = nullptr;
};

class Operator {
 public:
  virtual ~Operator() = default;
  virtual std::string name() const = 0;
  /// Must not touch the project; failures are returned, not thrown.
  virtual OperatorResponse run(const OperatorRequest& request, OperatorContext& context) = 0;
};

/// Registry of operators by kind. Every invoke emits one agent_result event.
class OperatorSet {
 public:
  void bind(OperatorKind kind, std::shared_ptr<Operator> op) { ops_[kind] = std::move(op); }
  /// Binds `op` for every kind not yet bound.
  void bind_default(std::shared_ptr<Operator> op);
  bool has(OperatorKind kind) const { return ops_.count(kind) != 0; }

  void set_metrics(MetricsLog* metrics) { metrics_ = metrics; }
  void set_transcripts(TranscriptStore* store) { context_.transcripts = store; }

  OperatorResponse invoke(const OperatorRequest& request);

  std::int64_t invocations() const { return invocations_; }
  std::int64_t invocations(OperatorKind kind) const;
  std::int64_t tokens_used() const { return tokens_; }

 private:
  std::map<OperatorKind, std::shared_ptr<Operator>> ops_;
  std::map<OperatorKind, std::int64_t> per_kind_;
  MetricsLog* metrics_ = nullptr;
  OperatorContext context_;
  std::int64_t invocations_ = 0;
  std::int64_t tokens_ = 0;
};

/// Contents of the last ``` fenced block, or absent.
std::optional<std::string> last_fenced_block(std::string_view text);

/// Proposal that replaces `range` with `text`.
PatchProposal replace_range(const FileId& file, const SourceRange& range, std::string text, std::string origin);

}  // namespace verirefine
