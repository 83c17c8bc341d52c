#include "verirefine/scripted_operators.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "verirefine/lexer.hpp"
#include "verirefine/outline.hpp"
#include "verirefine/sim_verifier.hpp"

namespace verirefine {

namespace {

std::string slug(std::string_view label) {
  auto colon = label.find(':');
  if (colon != std::string_view::npos) label.remove_prefix(colon + 1);
  std::string out;
  for (char c : label) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out = "stmt_" + out;
  return out;
}

std::optional<std::string> quoted_name(const std::string& message, std::string_view prefix) {
  if (message.rfind(prefix, 0) != 0) return std::nullopt;
  const auto close = message.find('\'', prefix.size());
  if (close == std::string::npos) return std::nullopt;
  return message.substr(prefix.size(), close - prefix.size());
}

bool term_position(std::string_view text, std::size_t offset) {
  auto before = text.substr(0, offset);
  while (!before.empty() && std::isspace(static_cast<unsigned char>(before.back()))) before.remove_suffix(1);
  return before.size() >= 2 && before.substr(before.size() - 2) == ":=";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

class RepairPlanner {
 public:
  RepairPlanner(const OperatorRequest& req, const Project* project)
      : req_(req), project_(project), text_(req.file_text), outline_(outline(text_)) {
    has_mathlib_ = std::find(outline_.imports.begin(), outline_.imports.end(), "Mathlib") != outline_.imports.end();
  }

  std::optional<PatchProposal> fix(const Diagnostic& d) {
    if (auto name = quoted_name(d.message, "unknown identifier '")) return fix_unknown(d, *name);
    if (d.message == "unexpected token; expected command") {
      return edit(SourceRange::lines(d.range.start.line, d.range.start.line), "");
    }
    if (d.message.rfind("declaration body expected", 0) == 0) {
      const auto* decl = declaration_at(outline_, d.range.start.line);
      if (!decl) return std::nullopt;
      const auto lines = split_lines(text_);
      const int last = decl->last_line;
      return edit({{last, static_cast<int>(lines[last].size())}, {last, static_cast<int>(lines[last].size())}},
                  " := by sorry");
    }
    if (auto name = quoted_name(d.message, "'"); name && d.message.find("has already been declared") != std::string::npos) {
      const auto dot = name->rfind('.');
      const auto shortname = dot == std::string::npos ? *name : name->substr(dot + 1);
      return edit(d.range, shortname + "_" + std::to_string(d.range.start.line + 1));
    }
    if (const auto* decl = declaration_at(outline_, d.range.start.line); decl && decl->body_offset) {
      const auto off = offset_of(text_, d.range.start);
      if (off < *decl->body_offset) return std::nullopt;
      auto body_end = decl->end_offset;
      while (body_end > *decl->body_offset && std::isspace(static_cast<unsigned char>(text_[body_end - 1]))) --body_end;
      const auto body = std::string_view(text_).substr(*decl->body_offset, body_end - *decl->body_offset);
      if (trim(body) == "sorry" || trim(body) == "by sorry") return std::nullopt;
      return edit({pos_of(text_, *decl->body_offset), pos_of(text_, body_end)}, " by sorry");
    }
    return std::nullopt;
  }

 private:
  PatchProposal edit(const SourceRange& r, std::string text) const {
    return replace_range(req_.file, r, std::move(text), "scripted-repair");
  }

  std::optional<PatchProposal> insert_import(const std::string& module) const {
    int after = -1;
    for (int i = 0; i < static_cast<int>(outline_.lines.size()); ++i) {
      if (outline_.lines[i] == LineKind::import) after = i;
    }
    const SourcePos at{after + 1, 0};
    if (after + 1 >= line_count(text_) && !text_.empty() && text_.back() != '\n') return std::nullopt;
    return edit({at, at}, "import " + module + "\n");
  }

  bool imports(const std::string& module) const {
    return std::find(outline_.imports.begin(), outline_.imports.end(), module) != outline_.imports.end();
  }

  std::optional<PatchProposal> fix_unknown(const Diagnostic& d, const std::string& name) {
    if (requires_mathlib(name) && !has_mathlib_) return insert_import("Mathlib");

    std::set<std::string> known;
    for (const auto& decl : outline_.decls) {
      known.insert(decl.name);
      known.insert(decl.full_name());
    }
    if (project_) {
      const auto self = module_name(req_.file);
      for (const auto& f : project_->files()) {
        if (f == req_.file) continue;
        const auto other = outline(project_->read(f));
        const auto mod = module_name(f);
        const bool cyclic = std::find(other.imports.begin(), other.imports.end(), self) != other.imports.end();
        for (const auto& decl : other.decls) {
          if ((decl.name == name || decl.full_name() == name) && !imports(mod) && !cyclic) return insert_import(mod);
          if (imports(mod)) {
            known.insert(decl.name);
            known.insert(decl.full_name());
          }
        }
      }
    }
    for (auto& w : builtin_vocabulary(has_mathlib_)) known.insert(std::move(w));
    if (const auto* decl = declaration_at(outline_, d.range.start.line)) {
      const std::string_view body(text_.data() + decl->keyword_offset, decl->end_offset - decl->keyword_offset);
      const std::string s(body);
      for (const auto& t : tokenize(s, classify(s), 0, s.size())) {
        if (t.kind == Token::Kind::ident && t.text != name) known.emplace(t.text);
      }
    }
    known.erase("");

    const std::size_t limit = std::max<std::size_t>(1, name.size() / 3);
    std::optional<std::string> best;
    std::size_t best_d = limit + 1;
    for (const auto& k : known) {
      const auto dist = edit_distance(name, k);
      if (dist > 0 && dist < best_d) {
        best_d = dist;
        best = k;
      }
    }
    if (!best) return std::nullopt;
    return edit(d.range, *best);
  }

  const OperatorRequest& req_;
  const Project* project_;
  const std::string& text_;
  FileOutline outline_;
  bool has_mathlib_ = false;
};

std::vector<std::string> hint_names(std::string_view hints) {
  std::vector<std::string> out;
  for (auto line : split_lines(hints)) {
    const auto t = trim(line);
    if (t.rfind("- ", 0) == 0) out.push_back(trim(t.substr(2)));
  }
  return out;
}

void push_unique(std::vector<std::string>& v, std::string s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(std::move(s));
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

OperatorResponse ScriptedSkeleton::run(const OperatorRequest& request, OperatorContext&) {
  if (!request.record) return OperatorResponse::failure("skeleton request without a record");
  const auto& rec = *request.record;
  std::string name = slug(rec.label);
  std::string type = "True";
  if (auto it = rec.extras.find("lean"); it != rec.extras.end() && it->is_object()) {
    name = it->value("name", name);
    type = it->value("type", type);
    type = it->value("draft_type", type);
  }
  OperatorResponse r;
  r.ok = true;
  r.text = name + " : " + type;
  return r;
}

OperatorResponse ScriptedRepair::run(const OperatorRequest& request, OperatorContext&) {
  std::vector<Diagnostic> errors;
  for (const auto& d : request.diagnostics) {
    if (d.severity == Severity::error && (request.scope.empty() || request.scope.intersects(d.range))) {
      errors.push_back(d);
    }
  }
  if (errors.empty()) {
    for (const auto& d : request.diagnostics) {
      if (d.severity == Severity::error) errors.push_back(d);
    }
  }
  if (errors.empty()) return OperatorResponse::failure("no errors to repair");
  std::sort(errors.begin(), errors.end());

  RepairPlanner planner(request, project_);
  for (const auto& d : errors) {
    std::optional<PatchProposal> patch;
    try {
      patch = planner.fix(d);
    } catch (const TextError&) {
      continue;
    }
    if (patch) {
      OperatorResponse r;
      r.ok = true;
      r.patch = std::move(patch);
      return r;
    }
  }
  return OperatorResponse::failure("no repair found");
}

OperatorResponse ScriptedPlanner::run(const OperatorRequest& request, OperatorContext&) {
  OperatorResponse r;
  r.ok = true;
  r.text = "Plan (round " + std::to_string(request.round) + ")";
  if (!request.declaration.empty()) r.text += " for " + request.declaration;
  r.text += ":\n";
  const auto cands = proof_candidates(request);
  for (std::size_t i = 0; i < cands.size(); ++i) r.text += std::to_string(i + 1) + ". " + cands[i] + "\n";
  return r;
}

std::vector<std::string> proof_candidates(const OperatorRequest& request) {
  std::vector<std::string> out;
  if (request.goal) {
    const auto target = normalize_ws(request.goal->goal);
    for (const auto& [name, type] : request.goal->context) {
      if (normalize_ws(type) == target) push_unique(out, "exact " + name);
    }
  }
  for (const char* t : {"trivial", "rfl", "norm_num", "decide"}) push_unique(out, t);
  static const std::regex lean_ref(R"(\\lean\{([^}]*)\})");
  for (auto it = std::sregex_iterator(request.reference_proof.begin(), request.reference_proof.end(), lean_ref);
       it != std::sregex_iterator(); ++it) {
    const auto term = trim((*it)[1].str());
    if (!term.empty()) push_unique(out, "exact " + term);
  }
  for (const auto& h : hint_names(request.hints)) {
    push_unique(out, "exact " + h);
    push_unique(out, "apply " + h);
  }
  return out;
}

OperatorResponse ScriptedProver::run(const OperatorRequest& request, OperatorContext&) {
  if (!request.hole) return OperatorResponse::failure("no target hole");
  const auto cands = proof_candidates(request);
  auto tactic = cands[static_cast<std::size_t>(std::max(0, request.attempt)) % cands.size()];
  const auto off = offset_of(request.file_text, request.hole->start);
  if (term_position(request.file_text, off)) tactic = "by " + tactic;
  OperatorResponse r;
  r.ok = true;
  r.patch = replace_range(request.file, *request.hole, tactic, "scripted-prover");
  return r;
}

OperatorResponse AdversarialOperator::run(const OperatorRequest& request, OperatorContext&) {
  OperatorResponse r;
  switch (mode_) {
    case AdversaryMode::failing:
      return OperatorResponse::failure("adversary refuses");
    case AdversaryMode::garbage:
      r.ok = true;
      r.text = "%% not a declaration (";
      r.patch = PatchProposal{request.file, {}, "adversary"};
      return r;
    case AdversaryMode::foreign_file:
      r.ok = true;
      r.text = "other : True";
      r.patch = replace_range(request.file + ".other", {}, "x", "adversary");
      return r;
    case AdversaryMode::noop:
    case AdversaryMode::breaking:
      break;
  }
  r.ok = true;
  r.text = "bad_name : Undefined_Type_Zz";
  SourceRange target = request.hole ? *request.hole
                       : request.scope.empty() ? SourceRange{}
                                               : request.scope.ranges().front();
  if (mode_ == AdversaryMode::noop) {
    std::string same;
    try {
      same = std::string(text_in(request.file_text, target));
    } catch (const TextError&) {
      target = {};
    }
    r.patch = replace_range(request.file, target, same, "adversary");
  } else {
    const SourceRange at = request.hole ? *request.hole : SourceRange{target.start, target.start};
    r.patch = replace_range(request.file, at, request.hole ? "exact undefined_thing_zz" : "undefined_thing_zz ",
                            "adversary");
  }
  return r;
}

OperatorResponse RandomOperator::run(const OperatorRequest& request, OperatorContext&) {
  static const std::vector<std::string> names = {"foo", "bar_baz", "lemma1", "x"};
  static const std::vector<std::string> types = {"True",  "1 + 1 = 2", "∀ n : ℕ, n = n", "Foo bar",
                                                 "x = x", "(",         "Nat",            "2 + 2 = 5"};
  static const std::vector<std::string> tactics = {"rfl",    "trivial", "norm_num", "simp",    "exact foo",
                                                   "intro x", "sorry",  "exact h",  "decide", "bogus_tac"};
  static const std::vector<std::string> tokens = {"x", "Nat", "ℝ", "foo", "True", "h", ":=", "(", "sorry", "\n"};
  auto pick = [&](const std::vector<std::string>& v) { return v[rng_() % v.size()]; };

  OperatorResponse r;
  r.ok = true;
  if (request.kind == OperatorKind::gen_skeleton) {
    r.text = pick(names) + " : " + pick(types);
    return r;
  }
  if (request.kind == OperatorKind::plan || request.kind == OperatorKind::replan ||
      request.kind == OperatorKind::split_hint) {
    r.text = "random plan " + std::to_string(rng_() % 100);
    return r;
  }
  const auto& text = request.file_text;
  if (request.hole && rng_() % 2 == 0) {
    r.patch = replace_range(request.file, *request.hole, pick(tactics), "random");
    return r;
  }
  if (request.scope.empty()) {
    r.patch = replace_range(request.file, {}, pick(tokens) + " ", "random");
    return r;
  }
  const auto& range = request.scope.ranges()[rng_() % request.scope.ranges().size()];
  auto clamp = [&](SourcePos p) {
    try {
      return offset_of(text, p);
    } catch (const TextError&) {
      return text.size();
    }
  };
  const auto b = clamp(range.start);
  const auto e = std::max(b, clamp(range.end));
  auto boundary = [&](std::size_t o) {
    while (o > b && o < text.size() && (static_cast<unsigned char>(text[o]) & 0xC0) == 0x80) --o;
    return o;
  };
  const auto at = boundary(b + rng_() % (e - b + 1));
  switch (rng_() % 3) {
    case 0:
      r.patch = replace_range(request.file, {pos_of(text, at), pos_of(text, at)}, pick(tokens) + " ", "random");
      break;
    case 1: {
      const auto end = boundary(std::min(e, at + 1 + rng_() % 10));
      r.patch = replace_range(request.file, {pos_of(text, at), pos_of(text, end)}, "", "random");
      break;
    }
    default:
      r.patch = replace_range(request.file, {pos_of(text, at), pos_of(text, at)}, pick(tactics), "random");
      break;
  }
  return r;
}

void bind_scripted(OperatorSet& set, const Project* project) {
  set.bind(OperatorKind::gen_skeleton, std::make_shared<ScriptedSkeleton>());
  auto repair = std::make_shared<ScriptedRepair>(project);
  set.bind(OperatorKind::repair_patch, repair);
  set.bind(OperatorKind::fix_compile_error, repair);
  auto planner = std::make_shared<ScriptedPlanner>();
  set.bind(OperatorKind::plan, planner);
  set.bind(OperatorKind::replan, planner);
  set.bind(OperatorKind::split_hint, planner);
  set.bind(OperatorKind::propose_proof_patch, std::make_shared<ScriptedProver>());
}

}  // namespace verirefine
