#include "verirefine/stage1.hpp"

#include <chrono>
#include <cstdio>
#include <regex>

#include "verirefine/outline.hpp"

namespace verirefine {

namespace {

std::string two_digits(std::int64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(n < 0 ? 0 : n));
  return buf;
}

std::optional<std::int64_t> last_number(std::string_view s) {
  std::optional<std::int64_t> out;
  for (std::size_t i = 0; i < s.size();) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    std::int64_t v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) v = v * 10 + (s[i++] - '0');
    out = v;
  }
  return out;
}

std::optional<SourceRange> declaration_range(std::string_view text, std::int64_t index, int fallback_line) {
  const auto ol = outline(text);
  for (const auto& d : ol.decls) {
    if (d.tag && d.tag->index == index) return d.range();
  }
  const int n = line_count(text);
  if (fallback_line >= n) return std::nullopt;
  return SourceRange::lines(fallback_line, n - 1);
}

std::string declaration_name(std::string_view text, std::int64_t index) {
  for (const auto& d : outline(text).decls) {
    if (d.tag && d.tag->index == index) {
      return d.name.empty() ? d.kind + "@" + std::to_string(index) : d.full_name();
    }
  }
  return "item@" + std::to_string(index);
}

}  // namespace

void to_json(nlohmann::json& j, const ProvenanceMap& m) {
  j = nlohmann::json::object();
  for (const auto& [decl, spans] : m.entries) {
    auto arr = nlohmann::json::array();
    for (const auto& s : spans) arr.push_back({{"index", s.index}, {"begin", s.begin}, {"end", s.end}});
    j[decl] = std::move(arr);
  }
}

void from_json(const nlohmann::json& j, ProvenanceMap& m) {
  m.entries.clear();
  for (const auto& [decl, spans] : j.items()) {
    for (const auto& s : spans) {
      m.add(decl, {s.at("index").get<std::int64_t>(), s.at("begin").get<std::size_t>(), s.at("end").get<std::size_t>()});
    }
  }
}

ProvenanceMap load_provenance(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return nlohmann::json::parse(read_file(path)).get<ProvenanceMap>();
}

void save_provenance(const std::filesystem::path& path, const ProvenanceMap& m) {
  write_file_atomic(path, nlohmann::json(m).dump(2) + "\n");
}

std::string_view to_string(ItemStatus s) {
  switch (s) {
    case ItemStatus::compiled: return "compiled";
    case ItemStatus::restored_failed: return "restored_failed";
    case ItemStatus::skipped: return "skipped";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const Stage1Item& r) {
  j = {{"index", r.index},         {"label", r.label},           {"file", r.file},
       {"declaration", r.declaration}, {"status", to_string(r.status)}, {"b_attempts", r.b_attempts},
       {"verifier_calls", r.verifier_calls}};
  if (!r.note.empty()) j["note"] = r.note;
}

FileId target_file(const DatasetRecord& record, const Stage1Config& config) {
  const auto section = last_number(record.context.section_number).value_or(0);
  return config.chapters_dir + "/Chap" + two_digits(record.context.chapter_number) + "/section" +
         two_digits(section) + ".lean";
}

std::string gen_stub(const DatasetRecord& record, const std::string& name, const std::string& type_text,
                     const Stage1Config& config) {
  const auto it = config.stub_policy.find(record.env);
  if (it == config.stub_policy.end()) throw Stage1Error("no stub template for env '" + record.env + "'");
  const auto& kind = it->second;
  std::string decl;
  if (kind == "example") {
    decl = "example : " + type_text + " := by sorry";
  } else if (kind == "def") {
    decl = "def " + name + " : " + type_text + " := sorry";
  } else if (kind == "theorem" || kind == "lemma" || kind == "abbrev" || kind == "instance") {
    decl = kind + " " + name + " : " + type_text + " := by sorry";
  } else {
    throw Stage1Error("unknown stub kind '" + kind + "'");
  }
  return provenance_docstring(record.index, record.label) + "\n" + decl;
}

std::optional<std::pair<std::string, std::string>> parse_skeleton_reply(std::string_view reply) {
  static const std::regex re(R"(^\s*([A-Za-z_][A-Za-z0-9_'.]*)\s*:\s*(\S.*?)\s*$)");
  for (auto line : split_lines(reply)) {
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::cmatch m;
    if (!std::regex_match(line.begin(), line.end(), m, re)) return std::nullopt;
    static const std::set<std::string> keywords = {"theorem", "lemma",    "def",       "abbrev",
                                                   "example", "instance", "structure", "class"};
    if (keywords.count(m[1].str())) return std::nullopt;
    return std::make_pair(m[1].str(), m[2].str());
  }
  return std::nullopt;
}

std::string new_file_header(const Project& project, const FileId& file, const Stage1Config& config) {
  std::string header;
  for (const auto& m : config.header_imports) header += "import " + m + "\n";
  if (config.chain_imports) {
    const auto prefix = config.chapters_dir + "/";
    for (const auto& f : project.files()) {
      if (f.rfind(prefix, 0) == 0 && f < file) header += "import " + module_name(f) + "\n";
    }
  }
  return header;
}

Stage1Result run_stage1(const std::vector<DatasetRecord>& records, EngineContext& ctx, const Stage1Config& config,
                        ProvenanceMap provenance) {
  if (config.max_repairs < 0) throw Stage1Error("repair budget must be non-negative");
  Stage1Result result;
  result.provenance = std::move(provenance);
  auto& project = ctx.project;

  for (const auto& rec : records) {
    if (rec.index < config.start_index) continue;
    Stage1Item item;
    item.index = rec.index;
    item.label = rec.label;
    item.file = target_file(rec, config);
    const auto& file = item.file;
    const auto task = std::to_string(rec.index);
    const auto calls_before = ctx.verifier.calls();
    ctx.emit(events::item_start, {{"stage", 1}, {"index", rec.index}, {"label", rec.label}, {"file", file}});

    const auto snap = Snapshot::capture(project, file);
    auto finish = [&](ItemStatus status, std::string note) {
      item.status = status;
      item.note = std::move(note);
      item.verifier_calls = ctx.verifier.calls() - calls_before;
      ctx.emit(events::item_end, {{"stage", 1},
                                  {"index", rec.index},
                                  {"label", rec.label},
                                  {"file", file},
                                  {"status", to_string(status)},
                                  {"b_attempts", item.b_attempts},
                                  {"verifier_calls", item.verifier_calls}});
      ctx.record(file, task, "item_end", item);
      result.items.push_back(item);
      if (config.provenance_path) save_provenance(*config.provenance_path, result.provenance);
      if (ctx.checkpoint) write_checkpoint(*ctx.checkpoint, {std::string(kItemCursor), rec.index + 1});
    };

    if (!config.stub_policy.count(rec.env)) {
      finish(ItemStatus::skipped, "no stub template for env '" + rec.env + "'");
      if (ctx.should_stop && ctx.should_stop()) {
        result.stopped_early = true;
        break;
      }
      continue;
    }

    std::string prefix = snap.existed ? snap.bytes : new_file_header(project, file, config);
    OperatorRequest sk;
    sk.kind = OperatorKind::gen_skeleton;
    sk.stage = "stage1";
    sk.task_id = task;
    sk.file = file;
    sk.file_text = prefix;
    sk.record = rec;
    const auto reply = ctx.operators.invoke(sk);
    ctx.record(file, task, "agent_s_skeleton", {{"ok", reply.ok}, {"reply", reply.text}, {"error", reply.error}},
               reply.transcript_ref);
    if (!reply.ok) {
      finish(ItemStatus::restored_failed, "skeleton operator failed: " + reply.error);
      if (ctx.should_stop && ctx.should_stop()) {
        result.stopped_early = true;
        break;
      }
      continue;
    }

    std::string decl_text;
    if (auto parsed = parse_skeleton_reply(reply.text)) {
      decl_text = gen_stub(rec, parsed->first, parsed->second, config);
    } else {
      decl_text = provenance_docstring(rec.index, rec.label) + "\n" + reply.text;
    }
    while (!decl_text.empty() && decl_text.back() == '\n') decl_text.pop_back();

    if (!prefix.empty() && prefix.back() != '\n') prefix += '\n';
    if (!prefix.empty()) prefix += '\n';
    const int insert_line = line_count(prefix);
    std::string text = prefix + decl_text + "\n";

    bool restored = false;
    try {
      project.write(file, text);
      auto ds = ctx.verifier.verify_file(project, file).diagnostics;

      auto base_scope = [&](std::string_view t) {
        Scope s = header_scope(t, config.header_bound);
        if (auto r = declaration_range(t, rec.index, insert_line)) s = s.with(*r);
        return s;
      };
      Scope scope = base_scope(text);
      int expansions = 0;

      while (err_count(ds) > 0 && item.b_attempts < config.max_repairs) {
        ++item.b_attempts;
        while (err_count(localize(ds, scope)) == 0 && expansions < kMaxScopeExpansions) {
          scope = expand_scope(scope, ds, text, config.header_bound);
          ++expansions;
        }
        if (err_count(localize(ds, scope)) == 0) continue;

        OperatorRequest rq;
        rq.kind = OperatorKind::repair_patch;
        rq.stage = "stage1";
        rq.task_id = task;
        rq.file = file;
        rq.file_text = text;
        rq.scope = scope;
        rq.edit_range = declaration_range(text, rec.index, insert_line);
        rq.diagnostics = ds;
        rq.record = rec;
        rq.attempt = item.b_attempts - 1;
        const auto fix = ctx.operators.invoke(rq);
        nlohmann::json payload{{"attempt", item.b_attempts}, {"ok", fix.ok}};
        if (!fix.ok || !fix.patch) {
          payload["error"] = fix.error;
          ctx.record(file, task, "agent_b_repair", payload, fix.transcript_ref);
          continue;
        }
        const auto out = ctx.kernel.try_patch(Stage::statements, file, scope, *fix.patch, ds);
        payload["accepted"] = out.accepted;
        payload["reason"] = out.reject_reason;
        ctx.record(file, task, "agent_b_repair", payload, fix.transcript_ref);
        if (out.accepted) {
          ds = out.diagnostics_after;
          text = project.read(file);
          scope = base_scope(text);
          expansions = 0;
        }
      }

      if (err_count(ds) > 0) {
        snap.restore(project);
        restored = true;
      }
    } catch (...) {
      snap.restore(project);
      throw;
    }

    if (restored) {
      finish(ItemStatus::restored_failed, "errors remain after repair budget");
    } else {
      item.declaration = declaration_name(project.read(file), rec.index);
      result.provenance.add(item.declaration, {rec.index, 0, rec.content.size()});
      finish(ItemStatus::compiled, {});
    }
    if (ctx.should_stop && ctx.should_stop()) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace verirefine
