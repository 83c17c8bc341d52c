#include "verirefine/verifier.hpp"

#include "verirefine/instrumentation.hpp"
#include "verirefine/lexer.hpp"

namespace verirefine {

std::string_view to_string(AdapterKind k) { return k == AdapterKind::external ? "external" : "simulated"; }

AdapterKind adapter_from_string(std::string_view s) {
  if (s == "external") return AdapterKind::external;
  if (s == "simulated") return AdapterKind::simulated;
  throw std::invalid_argument("unknown adapter '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const VerifierEnvironment& e) {
  j = nlohmann::json{{"toolchain_id", e.toolchain_id},
                     {"dependency_revision", e.dependency_revision},
                     {"adapter", to_string(e.adapter)}};
}

void to_json(nlohmann::json& j, const GoalState& g) {
  auto ctx = nlohmann::json::array();
  for (const auto& [name, type] : g.context) ctx.push_back({name, type});
  j = nlohmann::json{{"goal", g.goal}, {"context", ctx}};
}

Verifier::Verifier(std::shared_ptr<VerifierAdapter> adapter, MetricsLog* metrics)
    : adapter_(std::move(adapter)), env_(adapter_->environment()), metrics_(metrics) {}

CheckResult Verifier::verify_file(const Project& project, const FileId& file) {
  CheckResult r;
  r.diagnostics = adapter_->check_file(project, file);
  r.ok = err_count(r.diagnostics) == 0;
  ++calls_;
  if (metrics_) {
    const auto holes = project.exists(file) ? count_holes(project.read(file)) : 0;
    metrics_->emit(events::lean_check, {{"file", file},
                                        {"ok", r.ok},
                                        {"errors", err_count(r.diagnostics)},
                                        {"warnings", r.diagnostics.count(Severity::warning)},
                                        {"holes", holes}});
  }
  if (observer_) observer_(file, r);
  return r;
}

CheckResult Verifier::verify_project(const Project& project, std::map<FileId, DiagnosticSet>* per_file) {
  CheckResult r;
  std::size_t failing = 0;
  const auto files = project.files();
  for (const auto& f : files) {
    const auto ds = adapter_->check_file(project, f);
    if (err_count(ds) > 0) ++failing;
    r.diagnostics.append(ds);
    if (per_file) (*per_file)[f] = ds;
  }
  r.ok = err_count(r.diagnostics) == 0;
  if (metrics_) {
    metrics_->emit(events::project_check,
                   {{"ok", r.ok}, {"files", files.size()}, {"failing_files", failing}, {"errors", err_count(r.diagnostics)}});
  }
  return r;
}

std::optional<GoalState> Verifier::goal_state(const Project& project, const FileId& file, const SourceRange& hole) {
  if (!goal_queries_) return std::nullopt;
  return adapter_->goal_at(project, file, hole);
}

}  // namespace verirefine
