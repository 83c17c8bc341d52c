#include "verirefine/stage2.hpp"

#include <algorithm>

#include "verirefine/lexer.hpp"
#include "verirefine/outline.hpp"
#include "verirefine/split.hpp"

namespace verirefine {

namespace {

Scope error_scope(const Diagnostic& d, std::string_view text, int header_bound) {
  const auto ol = outline(text);
  Scope s = header_scope(ol, header_bound);
  if (const auto* decl = declaration_at(ol, d.range.start.line)) return s.with(decl->range());
  const int last = std::max(d.range.start.line, d.range.end.line);
  return s.with(SourceRange::lines(d.range.start.line, last));
}

}  // namespace

std::optional<HoleTarget> locate_target_hole(const FileId& file, std::string_view text, const ProofTask& task) {
  const auto ol = outline(text);
  const Declaration* target = nullptr;
  for (const auto& d : ol.decls) {
    if (!d.tag || d.tag->label != task.label) continue;
    if (target) throw AmbiguousTarget("label '" + task.label + "' appears on more than one declaration");
    target = &d;
  }
  if (!target && task.position && *task.position < ol.decls.size()) {
    const auto& d = ol.decls[*task.position];
    if (!d.tag) target = &d;
  }
  if (!target) throw MissingTarget("no declaration for '" + task.label + "' in " + file);
  if (!target->body_offset) return std::nullopt;
  for (const auto& h : find_holes(text)) {
    const auto off = offset_of(text, h.start);
    if (off >= *target->body_offset && off < target->end_offset) {
      return HoleTarget{file, h, target->name.empty() ? target->kind : target->full_name()};
    }
  }
  return std::nullopt;
}

Diagnostic select_error(const DiagnosticSet& diagnostics) {
  const Diagnostic* best = nullptr;
  for (const auto& d : diagnostics) {
    if (d.severity != Severity::error) continue;
    if (!best || d.range.start < best->range.start ||
        (d.range.start == best->range.start && d.message < best->message)) {
      best = &d;
    }
  }
  if (!best) throw std::invalid_argument("select_error needs at least one error");
  return *best;
}

std::vector<std::string> signature_texts(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& d : outline(text).decls) {
    const auto end = d.body_offset ? *d.body_offset - 2 : d.end_offset;
    out.emplace_back(text.substr(d.keyword_offset, end - d.keyword_offset));
  }
  return out;
}

PatchGuard signature_guard() {
  return [](std::string_view before, std::string_view after) -> std::optional<std::string> {
    if (signature_texts(before) != signature_texts(after)) return "patch changes a declaration signature";
    return std::nullopt;
  };
}

std::string render_hints(const LemmaMapEntry& entry) {
  std::string out = "Relevant declarations:\n";
  for (const auto& h : entry.decl_hints) out += "- " + h + "\n";
  if (entry.notes) out += "Notes: " + *entry.notes + "\n";
  return out;
}

std::string_view to_string(ProofStatus s) {
  switch (s) {
    case ProofStatus::solved: return "solved";
    case ProofStatus::unsolved: return "unsolved";
    case ProofStatus::already_closed: return "already_closed";
    case ProofStatus::skipped: return "skipped";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const Stage2Item& r) {
  j = {{"index", r.index},
       {"label", r.label},
       {"file", r.file},
       {"declaration", r.declaration},
       {"status", to_string(r.status)},
       {"attempts", r.attempts},
       {"fix_attempts", r.fix_attempts},
       {"plans", r.plans},
       {"verifier_calls", r.verifier_calls},
       {"budget_used", r.budget_used},
       {"holes_before", r.holes_before},
       {"holes_after", r.holes_after},
       {"errors_after", r.errors_after},
       {"proof_lines", r.proof_lines}};
  if (!r.note.empty()) j["note"] = r.note;
}

void DiagnosticCache::put(const FileId& file, std::string_view bytes, DiagnosticSet ds) {
  entries_[file] = {fingerprint(bytes), std::move(ds)};
}

std::optional<DiagnosticSet> DiagnosticCache::get(const FileId& file, std::string_view bytes) const {
  auto it = entries_.find(file);
  if (it == entries_.end() || it->second.first != fingerprint(bytes)) return std::nullopt;
  return it->second.second;
}

FileId resolve_task_file(const Project& project, const ProofTask& task) {
  std::vector<FileId> candidates;
  if (project.exists(task.file)) candidates.push_back(task.file);
  for (auto& p : part_files(project, task.file)) candidates.push_back(std::move(p));
  for (const auto& f : candidates) {
    for (const auto& d : outline(project.read(f)).decls) {
      if (d.tag && d.tag->label == task.label) return f;
    }
  }
  if (task.position) {
    std::size_t seen = 0;
    for (const auto& f : candidates) {
      const auto n = outline(project.read(f)).decls.size();
      if (*task.position < seen + n) return f;
      seen += n;
    }
  }
  return task.file;
}

FileId split_if_large_and_resolve(EngineContext& ctx, const ProofTask& task, const Stage2Config& config,
                                  DiagnosticCache& cache) {
  auto& project = ctx.project;
  auto file = resolve_task_file(project, task);
  if (!config.split_enabled || !project.exists(file)) return file;
  const auto text = project.read(file);
  const int lines = line_count(text);
  if (lines <= config.split_threshold) return file;

  const auto plan = plan_split(file, text, config.split_threshold);
  if (!plan) {
    ctx.emit(events::warning, {{"message", "split aborted"}, {"file", file}, {"lines", lines}});
    return file;
  }
  std::vector<Snapshot> snaps{Snapshot::capture(project, file)};
  for (const auto& p : plan->parts) snaps.push_back(Snapshot::capture(project, p.file));
  auto rollback = [&] {
    for (const auto& s : snaps) s.restore(project);
  };
  bool ok = true;
  try {
    apply_split(project, file, *plan);
    for (const auto& p : plan->parts) {
      auto r = ctx.verifier.verify_file(project, p.file);
      ok = ok && r.ok;
      cache.put(p.file, p.text, std::move(r.diagnostics));
    }
  } catch (...) {
    rollback();
    throw;
  }
  ctx.emit(events::split, {{"file", file},
                           {"lines", lines},
                           {"threshold", config.split_threshold},
                           {"parts", plan->parts.size()},
                           {"ok", ok}});
  if (!ok) {
    rollback();
    ctx.emit(events::warning, {{"message", "split parts failed to verify; continuing unsplit"}, {"file", file}});
    return file;
  }
  return resolve_task_file(project, task);
}

Stage2Item run_stage2_item(EngineContext& ctx, const ProofTask& task, const Stage2Config& config,
                           DiagnosticCache& cache) {
  if (config.max_calls < 1 || config.retries < 1 || config.rounds < 1) {
    throw std::invalid_argument("stage 2 budgets must be positive");
  }
  auto& project = ctx.project;
  Stage2Item item;
  item.index = task.index;
  item.label = task.label;
  const auto taskid = std::to_string(task.index);
  const auto guard = signature_guard();

  const auto file = split_if_large_and_resolve(ctx, task, config, cache);
  const auto calls_item = ctx.verifier.calls();
  item.file = file;
  auto done = [&](ProofStatus status, std::string note = {}) {
    item.status = status;
    item.note = std::move(note);
    item.verifier_calls = static_cast<std::int64_t>(ctx.verifier.calls() - calls_item);
    if (project.exists(file)) {
      const auto text = project.read(file);
      item.holes_after = count_holes(text);
      if (auto ds = cache.get(file, text)) item.errors_after = err_count(*ds);
      for (const auto& d : outline(text).decls) {
        if (d.tag && d.tag->label == task.label) {
          item.proof_lines = nonempty_line_count(std::string_view(text).substr(d.begin_offset, d.end_offset - d.begin_offset));
        }
      }
    }
    return item;
  };
  if (!project.exists(file)) return done(ProofStatus::skipped, "target file missing");

  std::string text = project.read(file);
  item.holes_before = count_holes(text);
  int t = 0;
  DiagnosticSet ds;
  if (auto cached = cache.get(file, text)) {
    ds = *cached;
  } else {
    ds = ctx.verifier.verify_file(project, file).diagnostics;
    cache.put(file, text, ds);
    ++t;
  }

  auto commit = [&](const AttemptOutcome& out) {
    if (!out.accepted) return;
    ds = out.diagnostics_after;
    text = project.read(file);
    cache.put(file, text, ds);
  };

  bool closed_something = false;
  while (t < config.max_calls) {
    if (err_count(ds) > 0) {
      const auto d = select_error(ds);
      OperatorRequest rq;
      rq.kind = OperatorKind::fix_compile_error;
      rq.stage = "stage2";
      rq.task_id = taskid;
      rq.file = file;
      rq.file_text = text;
      rq.scope = error_scope(d, text, config.header_bound);
      rq.edit_range = rq.scope.ranges().back();
      rq.diagnostics = DiagnosticSet{d};
      rq.attempt = item.fix_attempts;
      const auto fix = ctx.operators.invoke(rq);
      ++item.fix_attempts;
      ++t;
      nlohmann::json payload{{"ok", fix.ok}, {"error", d.message}};
      if (fix.ok && fix.patch) {
        const auto out = ctx.kernel.try_patch(Stage::proofs, file, rq.scope, *fix.patch, ds, guard);
        payload["accepted"] = out.accepted;
        commit(out);
      }
      ctx.record(file, taskid, "agent_b_fix", payload, fix.transcript_ref);
      continue;
    }

    std::optional<HoleTarget> hole;
    try {
      hole = locate_target_hole(file, text, task);
    } catch (const AmbiguousTarget& e) {
      ctx.emit(events::warning, {{"message", e.what()}, {"index", task.index}});
      return done(ProofStatus::skipped, e.what());
    } catch (const MissingTarget& e) {
      ctx.emit(events::warning, {{"message", e.what()}, {"index", task.index}});
      return done(ProofStatus::skipped, e.what());
    }
    if (!hole) {
      return done(closed_something ? ProofStatus::solved : ProofStatus::already_closed);
    }
    item.declaration = hole->declaration;

    std::optional<GoalState> goal;
    if (config.goal_queries) goal = ctx.verifier.goal_state(project, file, hole->range);

    OperatorRequest base;
    base.stage = "stage2";
    base.task_id = taskid;
    base.file = file;
    base.hole = hole->range;
    base.edit_range = hole->range;
    base.scope = Scope{hole->range};
    base.goal = goal;
    base.declaration = hole->declaration;
    base.reference_proof = task.reference_proof;
    if (task.hints) base.hints = render_hints(*task.hints);

    auto plan_req = base;
    plan_req.kind = OperatorKind::plan;
    plan_req.file_text = text;
    plan_req.diagnostics = ds;
    auto plan = ctx.operators.invoke(plan_req);
    ++item.plans;
    ctx.record(file, taskid, "agent_c_plan", {{"plan", plan.text}, {"plan_raw", plan.text}, {"ok", plan.ok}},
               plan.transcript_ref);

    bool error_fix_needed = false;
    for (int c = 0; c < config.rounds && !error_fix_needed; ++c) {
      for (int r = 0; r < config.retries; ++r) {
        auto rq = base;
        rq.kind = OperatorKind::propose_proof_patch;
        rq.file_text = text;
        rq.diagnostics = ds;
        rq.plan = plan.text;
        rq.round = c;
        rq.attempt = c * config.retries + r;
        const auto q = ctx.operators.invoke(rq);
        ++item.attempts;
        ++t;
        nlohmann::json payload{{"round", c}, {"attempt", rq.attempt}, {"ok", q.ok}};
        if (q.ok && q.patch) {
          const auto out = ctx.kernel.try_patch(Stage::proofs, file, base.scope, *q.patch, ds, guard);
          payload["accepted"] = out.accepted;
          payload["reason"] = out.reject_reason;
          commit(out);
          ctx.record(file, taskid, "agent_a_attempt", payload, q.transcript_ref);
          if (out.accepted) {
            closed_something = true;
            item.budget_used = t;
            if (err_count(ds) > 0) {
              error_fix_needed = true;
              break;
            }
            const auto still = locate_target_hole(file, text, task);
            return done(still ? ProofStatus::unsolved : ProofStatus::solved);
          }
        } else {
          payload["error"] = q.error;
          ctx.record(file, taskid, "agent_a_attempt", payload, q.transcript_ref);
        }
        if (t >= config.max_calls) {
          item.budget_used = t;
          return done(ProofStatus::unsolved, "verifier budget exhausted");
        }
      }
      if (error_fix_needed || c + 1 == config.rounds) break;
      auto re = base;
      re.kind = OperatorKind::replan;
      re.file_text = text;
      re.diagnostics = ds;
      re.plan = plan.text;
      re.round = c + 1;
      plan = ctx.operators.invoke(re);
      ++item.plans;
      ctx.record(file, taskid, "agent_c_replan", {{"plan", plan.text}, {"plan_raw", plan.text}, {"ok", plan.ok}},
                 plan.transcript_ref);
    }
    if (!error_fix_needed) {
      item.budget_used = t;
      return done(ProofStatus::unsolved, "attempt budget exhausted");
    }
  }
  item.budget_used = t;
  return done(ProofStatus::unsolved, "verifier budget exhausted");
}

std::vector<ProofTask> proof_tasks(const std::vector<DatasetRecord>& records,
                                   const std::map<std::string, LemmaMapEntry>& lemma_map,
                                   const Stage2Config& config) {
  Stage1Config layout;
  layout.chapters_dir = config.chapters_dir;
  std::map<FileId, std::vector<const DatasetRecord*>> by_file;
  for (const auto& r : records) by_file[target_file(r, layout)].push_back(&r);
  for (auto& [_, rs] : by_file) {
    std::stable_sort(rs.begin(), rs.end(), [](const DatasetRecord* a, const DatasetRecord* b) {
      return a->number_components < b->number_components;
    });
  }

  std::vector<ProofTask> tasks;
  for (const auto& r : records) {
    if (!is_proof_target(r, config.policy)) continue;
    ProofTask t;
    t.index = r.index;
    t.label = r.label;
    t.reference_proof = r.proof;
    t.file = target_file(r, layout);
    const auto& siblings = by_file[t.file];
    const auto at = std::find(siblings.begin(), siblings.end(), &r);
    t.position = static_cast<std::size_t>(at - siblings.begin());
    if (auto it = lemma_map.find(r.label); it != lemma_map.end()) {
      t.hints = it->second;
    } else if (auto jt = lemma_map.find(std::to_string(r.index)); jt != lemma_map.end()) {
      t.hints = jt->second;
    }
    tasks.push_back(std::move(t));
  }
  std::sort(tasks.begin(), tasks.end(), [](const ProofTask& a, const ProofTask& b) { return a.index < b.index; });
  return tasks;
}

Stage2Result run_stage2(const std::vector<ProofTask>& tasks, EngineContext& ctx, const Stage2Config& config) {
  Stage2Result result;
  DiagnosticCache cache;
  std::map<FileId, DiagnosticSet> per_file;
  ctx.verifier.verify_project(ctx.project, &per_file);
  for (auto& [f, ds] : per_file) cache.put(f, ctx.project.read(f), std::move(ds));

  for (const auto& task : tasks) {
    if (task.index < config.start_index) continue;
    ctx.emit(events::item_start, {{"stage", 2}, {"index", task.index}, {"label", task.label}, {"file", task.file}});
    auto item = run_stage2_item(ctx, task, config, cache);
    ctx.emit(events::item_end, {{"stage", 2},
                                {"index", item.index},
                                {"label", item.label},
                                {"file", item.file},
                                {"status", to_string(item.status)},
                                {"attempts", item.attempts},
                                {"fix_attempts", item.fix_attempts},
                                {"plans", item.plans},
                                {"verifier_calls", item.verifier_calls},
                                {"holes_before", item.holes_before},
                                {"holes_after", item.holes_after},
                                {"errors_after", item.errors_after},
                                {"proof_lines", item.proof_lines}});
    ctx.record(item.file, std::to_string(item.index), "item_end", item);
    result.items.push_back(std::move(item));
    if (ctx.checkpoint) write_checkpoint(*ctx.checkpoint, {std::string(kItemCursor), task.index + 1});
    if (ctx.should_stop && ctx.should_stop()) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace verirefine
