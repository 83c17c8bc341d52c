#include "verirefine/operators.hpp"

#include <array>
#include <stdexcept>

#include "verirefine/instrumentation.hpp"
#include "verirefine/source.hpp"

namespace verirefine {

namespace {

constexpr std::array<std::pair<OperatorKind, std::string_view>, 7> kNames = {{
    {OperatorKind::gen_skeleton, "gen_skeleton"},
    {OperatorKind::repair_patch, "repair_patch"},
    {OperatorKind::fix_compile_error, "fix_compile_error"},
    {OperatorKind::plan, "plan"},
    {OperatorKind::replan, "replan"},
    {OperatorKind::propose_proof_patch, "propose_proof_patch"},
    {OperatorKind::split_hint, "split_hint"},
}};

nlohmann::json file_snapshot(const std::string& text, bool exists) {
  if (!exists) return {{"exists", false}};
  return {{"exists", true}, {"bytes", text.size()}, {"lines", line_count(text)}};
}

}  // namespace

std::string_view to_string(OperatorKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

OperatorKind operator_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kNames) {
    if (name == s) return kind;
  }
  throw std::invalid_argument("unknown operator kind '" + std::string(s) + "'");
}

std::string_view agent_role(OperatorKind k) {
  switch (k) {
    case OperatorKind::gen_skeleton: return "s";
    case OperatorKind::repair_patch:
    case OperatorKind::fix_compile_error: return "b";
    case OperatorKind::plan:
    case OperatorKind::replan: return "c";
    case OperatorKind::propose_proof_patch: return "a";
    case OperatorKind::split_hint: return "x";
  }
  return "?";
}

nlohmann::json request_json(const OperatorRequest& r) {
  nlohmann::json j{{"kind", to_string(r.kind)},
                   {"stage", r.stage},
                   {"task_id", r.task_id},
                   {"file", r.file},
                   {"file_text", r.file_text},
                   {"scope", r.scope},
                   {"diagnostics", r.diagnostics},
                   {"attempt", r.attempt},
                   {"round", r.round}};
  if (r.edit_range) j["edit_range"] = *r.edit_range;
  if (r.record) j["record"] = *r.record;
  if (r.goal) j["goal"] = *r.goal;
  if (r.hole) j["hole"] = *r.hole;
  if (!r.declaration.empty()) j["declaration"] = r.declaration;
  if (!r.plan.empty()) j["plan"] = r.plan;
  if (!r.reference_proof.empty()) j["reference_proof"] = r.reference_proof;
  if (!r.hints.empty()) j["navigation_cues"] = r.hints;
  return j;
}

void OperatorSet::bind_default(std::shared_ptr<Operator> op) {
  for (const auto& [kind, _] : kNames) {
    if (!ops_.count(kind)) ops_[kind] = op;
  }
}

std::int64_t OperatorSet::invocations(OperatorKind kind) const {
  auto it = per_kind_.find(kind);
  return it == per_kind_.end() ? 0 : it->second;
}

OperatorResponse OperatorSet::invoke(const OperatorRequest& request) {
  OperatorResponse response;
  auto it = ops_.find(request.kind);
  if (it == ops_.end()) {
    response = OperatorResponse::failure("no operator bound for " + std::string(to_string(request.kind)));
  } else {
    try {
      response = it->second->run(request, context_);
    } catch (const std::exception& e) {
      response = OperatorResponse::failure(e.what());
    }
  }
  ++invocations_;
  ++per_kind_[request.kind];
  if (response.tokens_used) tokens_ += *response.tokens_used;

  if (metrics_) {
    nlohmann::json data{{"agent", agent_role(request.kind)},
                        {"kind", to_string(request.kind)},
                        {"task", request.task_id},
                        {"file", request.file},
                        {"attempt", request.attempt},
                        {"round", request.round},
                        {"ok", response.ok},
                        {"snapshot_before", file_snapshot(request.file_text, !request.file.empty())}};
    if (it != ops_.end()) data["operator"] = it->second->name();
    if (!response.error.empty()) data["error"] = response.error;
    if (response.tokens_used) data["tokens_used"] = *response.tokens_used;
    if (response.transcript_ref) data["log_path"] = *response.transcript_ref;
    metrics_->emit(events::agent_result, std::move(data));
  }
  return response;
}

std::optional<std::string> last_fenced_block(std::string_view text) {
  std::optional<std::string> last;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    const auto body = text.find('\n', open);
    if (body == std::string_view::npos) break;
    auto close = text.find("\n```", body);
    if (close == std::string_view::npos) break;
    last = std::string(text.substr(body + 1, close - body - 1));
    pos = close + 4;
  }
  return last;
}

PatchProposal replace_range(const FileId& file, const SourceRange& range, std::string text, std::string origin) {
  return PatchProposal{file, {RegionEdit{range, std::move(text)}}, std::move(origin)};
}

}  // namespace verirefine
