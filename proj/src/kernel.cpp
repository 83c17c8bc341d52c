#include "verirefine/kernel.hpp"

#include <algorithm>
#include <limits>

#include "verirefine/instrumentation.hpp"
#include "verirefine/lexer.hpp"
#include "verirefine/outline.hpp"

namespace verirefine {

bool prec(const ObjectivePair& a, const ObjectivePair& b) {
  return a.primary < b.primary || (a.primary == b.primary && a.secondary < b.secondary);
}

ObjectivePair stage1_objective(const DiagnosticSet& diagnostics, const Scope& scope) {
  return {err_count(diagnostics), err_count(localize(diagnostics, scope))};
}

ObjectivePair stage2_objective(const DiagnosticSet& diagnostics, std::string_view file_text) {
  return {err_count(diagnostics), count_holes(file_text)};
}

void to_json(nlohmann::json& j, const ObjectivePair& p) { j = nlohmann::json::array({p.primary, p.secondary}); }

std::string apply_edits(std::string_view text, const std::vector<RegionEdit>& edits) {
  struct Span {
    std::size_t begin, end;
    const std::string* text;
  };
  std::vector<Span> spans;
  spans.reserve(edits.size());
  for (const auto& e : edits) {
    if (e.range.end < e.range.start) throw PatchError("edit range is inverted");
    try {
      spans.push_back({offset_of(text, e.range.start), offset_of(text, e.range.end), &e.text});
    } catch (const TextError& err) {
      throw PatchError(std::string("edit range outside file: ") + err.what());
    }
  }
  std::stable_sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].begin < spans[i - 1].end) throw PatchError("overlapping edits");
  }
  std::string out;
  out.reserve(text.size());
  std::size_t at = 0;
  for (const auto& s : spans) {
    out.append(text.substr(at, s.begin - at));
    out.append(*s.text);
    at = s.end;
  }
  out.append(text.substr(at));
  return out;
}

std::uint64_t fingerprint(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Snapshot Snapshot::capture(const Project& project, const FileId& file) {
  Snapshot s;
  s.file = file;
  s.existed = project.exists(file);
  if (s.existed) s.bytes = project.read(file);
  s.fingerprint = verirefine::fingerprint(s.bytes);
  return s;
}

void Snapshot::restore(Project& project) const {
  if (!existed) {
    project.remove(file);
    if (project.exists(file)) throw KernelError("cannot remove '" + file + "' during restore");
    return;
  }
  project.write(file, bytes);
  if (verirefine::fingerprint(project.read(file)) != fingerprint) {
    throw KernelError("restore of '" + file + "' did not reproduce the snapshot");
  }
}

ObjectivePair Kernel::objective(Stage stage, const DiagnosticSet& ds, const Scope& scope,
                                std::string_view text) const {
  return stage == Stage::statements ? stage1_objective(ds, scope) : stage2_objective(ds, text);
}

void Kernel::report(Stage stage, const FileId& file, const Scope& scope, const Snapshot& snap,
                    const AttemptOutcome& out, const PatchProposal& patch) {
  if (metrics_) {
    nlohmann::json data{{"file", file},         {"stage", static_cast<int>(stage)}, {"origin", patch.origin},
                        {"accepted", out.accepted}, {"verified", out.verified},      {"before", out.before},
                        {"after", out.after}};
    if (!out.reject_reason.empty()) data["reason"] = out.reject_reason;
    metrics_->emit(events::patch_result, std::move(data));
  }
  if (observer_) {
    const auto committed = project_.exists(file) ? project_.read(file) : std::string();
    observer_({stage, file, scope, snap, out, committed});
  }
}

AttemptOutcome Kernel::reject(Stage stage, const FileId& file, const Scope& scope, const Snapshot& snap,
                              AttemptOutcome out, const PatchProposal& patch, std::string reason) {
  out.accepted = false;
  out.reject_reason = std::move(reason);
  report(stage, file, scope, snap, out, patch);
  return out;
}

AttemptOutcome Kernel::try_patch(Stage stage, const FileId& file, const Scope& scope, const PatchProposal& patch,
                                 const DiagnosticSet& diagnostics_before, const PatchGuard& guard) {
  const auto snap = Snapshot::capture(project_, file);
  AttemptOutcome out;
  out.snapshot_fingerprint = snap.fingerprint;
  out.before = objective(stage, diagnostics_before, scope, snap.bytes);
  out.after = out.before;
  out.diagnostics_after = diagnostics_before;

  if (patch.file != file) return reject(stage, file, scope, snap, out, patch, "patch targets another file");
  if (patch.empty()) return reject(stage, file, scope, snap, out, patch, "empty patch");
  for (const auto& e : patch.edits) {
    if (!scope.covers(e.range)) return reject(stage, file, scope, snap, out, patch, "edit outside scope");
  }
  std::string patched;
  try {
    patched = apply_edits(snap.bytes, patch.edits);
  } catch (const PatchError& e) {
    return reject(stage, file, scope, snap, out, patch, e.what());
  }
  if (patched == snap.bytes) return reject(stage, file, scope, snap, out, patch, "no-op patch");
  if (guard) {
    if (auto why = guard(snap.bytes, patched)) return reject(stage, file, scope, snap, out, patch, *why);
  }

  project_.write(file, patched);
  CheckResult check;
  try {
    check = verifier_.verify_file(project_, file);
  } catch (...) {
    snap.restore(project_);
    throw;
  }
  out.verified = true;
  out.after = objective(stage, check.diagnostics, scope, patched);
  if (prec(out.after, out.before)) {
    out.accepted = true;
    out.diagnostics_after = check.diagnostics;
    report(stage, file, scope, snap, out, patch);
    return out;
  }
  snap.restore(project_);
  return reject(stage, file, scope, snap, out, patch, "objective did not improve");
}

Scope expand_scope(const Scope& scope, const DiagnosticSet& diagnostics, std::string_view file_text,
                   int header_bound) {
  const Diagnostic* nearest = nullptr;
  long best = std::numeric_limits<long>::max();
  for (const auto& d : diagnostics) {
    if (d.severity != Severity::error) continue;
    long dist = std::numeric_limits<long>::max() / 2;
    if (scope.empty()) dist = d.range.start.line;
    for (const auto& r : scope.ranges()) {
      const long line = d.range.start.line;
      const long lo = r.start.line;
      const long hi = std::max(r.start.line, r.end.col == 0 ? r.end.line - 1 : r.end.line);
      dist = std::min(dist, line < lo ? lo - line : (line > hi ? line - hi : 0L));
    }
    if (dist < best || (dist == best && nearest && d.range.start < nearest->range.start)) {
      best = dist;
      nearest = &d;
    }
  }
  if (!nearest) return scope;
  const int last = std::max(nearest->range.start.line,
                            nearest->range.end.col == 0 && nearest->range.end.line > nearest->range.start.line
                                ? nearest->range.end.line - 1
                                : nearest->range.end.line);
  return scope.with(SourceRange::lines(nearest->range.start.line, last)).unite(header_scope(file_text, header_bound));
}

}  // namespace verirefine
