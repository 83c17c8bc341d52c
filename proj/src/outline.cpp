#include "verirefine/outline.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include "verirefine/lexer.hpp"

namespace verirefine {

namespace {

constexpr std::array<std::string_view, 10> kDeclKeywords = {
    "theorem", "lemma", "def", "abbrev", "example", "instance", "structure", "class", "inductive", "axiom"};

constexpr std::array<std::string_view, 8> kModifiers = {
    "private", "protected", "noncomputable", "partial", "unsafe", "nonrec", "scoped", "local"};

constexpr std::array<std::string_view, 16> kCommands = {
    "variable", "attribute", "notation", "infix",  "infixl", "infixr", "prefix", "postfix",
    "macro",    "syntax",    "mutual",   "export", "omit",   "include", "deriving", "opaque"};

template <std::size_t N>
bool one_of(std::string_view word, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), word) != set.end();
}

std::string_view first_word(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return line.substr(0, i);
}

std::string_view skip_word(std::string_view line) {
  auto w = first_word(line);
  line.remove_prefix(w.size());
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
  return line;
}

// Strips leading `@[...]` attributes and modifiers; returns the rest.
std::string_view strip_decl_prefix(std::string_view line) {
  while (true) {
    if (line.rfind("@[", 0) == 0) {
      auto close = line.find(']');
      if (close == std::string_view::npos) return {};
      line.remove_prefix(close + 1);
      while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
      continue;
    }
    auto w = first_word(line);
    if (!w.empty() && one_of(w, kModifiers)) {
      line = skip_word(line);
      continue;
    }
    return line;
  }
}

LineKind classify_code_line(std::string_view line) {
  auto w = first_word(line);
  if (w == "import") return LineKind::import;
  if (w == "open") return LineKind::open;
  if (w == "namespace") return LineKind::namespace_open;
  if (w == "section") return LineKind::section_open;
  if (w == "end") return LineKind::end;
  if (w == "set_option" || w == "universe") return LineKind::option;
  if (w == "noncomputable" && first_word(skip_word(line)) == "section") return LineKind::section_open;
  const auto rest = strip_decl_prefix(line);
  if (one_of(first_word(rest), kDeclKeywords)) return LineKind::decl_start;
  if (line.rfind("@[", 0) == 0 && rest.empty()) return LineKind::attribute;
  if (one_of(w, kCommands) || (!w.empty() && w.front() == '#')) return LineKind::command;
  return LineKind::continuation;
}

bool is_boundary(LineKind k) {
  return k != LineKind::blank && k != LineKind::comment && k != LineKind::continuation;
}

struct LineSpan {
  std::size_t begin;
  std::size_t end;  // excluding '\n'
};

std::vector<LineSpan> line_spans(std::string_view text) {
  std::vector<LineSpan> spans;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      spans.push_back({start, text.size()});
      break;
    }
    spans.push_back({start, nl});
    start = nl + 1;
  }
  return spans;
}

bool is_opener(std::string_view t) { return t == "(" || t == "[" || t == "{" || t == "⟨"; }
bool is_closer(std::string_view t) { return t == ")" || t == "]" || t == "}" || t == "⟩"; }

}  // namespace

bool is_header_kind(LineKind k) {
  return k == LineKind::import || k == LineKind::open || k == LineKind::namespace_open ||
         k == LineKind::section_open || k == LineKind::option;
}

std::string provenance_docstring(std::int64_t index, std::string_view label) {
  return "/-- [" + std::to_string(index) + "] " + std::string(label) + " -/";
}

std::optional<ProvenanceTag> parse_provenance_tag(std::string_view first_line) {
  static const std::regex re(R"(^\s*/--\s*\[(-?\d+)\]\s*(.*?)\s*(-/\s*)?$)");
  std::cmatch m;
  if (!std::regex_match(first_line.begin(), first_line.end(), m, re)) return std::nullopt;
  return ProvenanceTag{std::stoll(m[1].str()), m[2].str()};
}

std::string normalize_ws(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

FileOutline outline(std::string_view text) {
  FileOutline out;
  const auto classes = classify(text);
  const auto spans = line_spans(text);
  out.lines.reserve(spans.size());

  for (const auto& span : spans) {
    const auto line = text.substr(span.begin, span.end - span.begin);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
      out.lines.push_back(LineKind::blank);
      continue;
    }
    const auto pos = span.begin + first;
    const auto cls = classes[pos];
    if (cls == CharClass::comment) {
      const bool fresh = pos == 0 || classes[pos - 1] == CharClass::code;
      const bool doc = first == 0 && fresh && line.substr(first).rfind("/--", 0) == 0;
      out.lines.push_back(doc ? LineKind::doc_start : LineKind::comment);
    } else if (cls == CharClass::string || first != 0) {
      out.lines.push_back(LineKind::continuation);
    } else {
      out.lines.push_back(classify_code_line(line));
    }
  }

  for (int i = 0; i < static_cast<int>(out.lines.size()); ++i) {
    const auto k = out.lines[i];
    if (k == LineKind::blank || k == LineKind::comment) continue;
    if (!is_header_kind(k)) break;
    out.header_last_line = i;
  }

  std::vector<std::pair<LineKind, std::string>> scopes;
  auto current_prefix = [&] {
    std::string prefix;
    for (const auto& [kind, name] : scopes) {
      if (kind != LineKind::namespace_open || name.empty()) continue;
      if (!prefix.empty()) prefix += '.';
      prefix += name;
    }
    return prefix;
  };

  int pending_first = -1;
  std::optional<Declaration> open_decl;
  int last_code_line = -1;

  auto close_decl = [&] {
    if (!open_decl) return;
    auto& d = *open_decl;
    d.last_line = std::max(last_code_line, d.keyword_line);
    d.end_offset = d.last_line + 1 < static_cast<int>(spans.size()) ? spans[d.last_line + 1].begin : text.size();
    // Signature and body delimiter from the declaration's code tokens.
    const auto tokens = tokenize(text, classes, d.keyword_offset, d.end_offset);
    int depth = 0;
    std::size_t sig_end = d.end_offset;
    for (const auto& t : tokens) {
      if (t.kind == Token::Kind::symbol && is_opener(t.text)) ++depth;
      if (t.kind == Token::Kind::symbol && is_closer(t.text)) depth = std::max(0, depth - 1);
      if (depth == 0 && t.kind == Token::Kind::symbol && t.text == ":=") {
        sig_end = t.offset;
        d.body_offset = t.offset + 2;
        break;
      }
    }
    d.signature = normalize_ws(text.substr(d.keyword_offset, sig_end - d.keyword_offset));
    out.decls.push_back(std::move(d));
    open_decl.reset();
  };

  for (int i = 0; i < static_cast<int>(out.lines.size()); ++i) {
    const auto k = out.lines[i];
    const auto& span = spans[i];
    const auto line = text.substr(span.begin, span.end - span.begin);
    if (is_boundary(k)) close_decl();

    switch (k) {
      case LineKind::doc_start:
      case LineKind::attribute:
        if (pending_first < 0) pending_first = i;
        break;
      case LineKind::decl_start: {
        Declaration d;
        d.first_line = pending_first >= 0 ? pending_first : i;
        d.keyword_line = i;
        d.begin_offset = spans[d.first_line].begin;
        auto rest = strip_decl_prefix(line);
        d.keyword_offset = span.begin + (line.size() - rest.size());
        d.kind = std::string(first_word(rest));
        const auto after = skip_word(rest);
        const auto name = first_word(after);
        const bool anonymous =
            d.kind == "example" || name.empty() || name.front() == ':' || name.front() == '(' ||
            name.front() == '[' || name.front() == '{';
        if (!anonymous) {
          // Names end at binder or type punctuation.
          auto stop = name.find_first_of(":([{");
          d.name = std::string(name.substr(0, stop));
        }
        d.namespace_prefix = current_prefix();
        if (const int pf = pending_first; pf >= 0 && out.lines[pf] == LineKind::doc_start) {
          const auto& ds = spans[pf];
          d.tag = parse_provenance_tag(text.substr(ds.begin, ds.end - ds.begin));
        }
        pending_first = -1;
        open_decl = std::move(d);
        last_code_line = i;
        break;
      }
      case LineKind::continuation:
        if (open_decl) {
          last_code_line = i;
        } else if (i > out.header_last_line) {
          out.body_command_lines.push_back(i);
        }
        break;
      case LineKind::blank:
      case LineKind::comment:
        break;
      case LineKind::import: {
        pending_first = -1;
        const auto tokens = tokenize(text, classes, span.begin, span.end);
        for (std::size_t t = 1; t < tokens.size(); ++t) {
          if (tokens[t].kind == Token::Kind::ident) out.imports.emplace_back(tokens[t].text);
        }
        if (i > out.header_last_line) out.body_command_lines.push_back(i);
        break;
      }
      case LineKind::namespace_open:
      case LineKind::section_open: {
        pending_first = -1;
        auto rest = skip_word(line);
        if (k == LineKind::section_open && first_word(line) == "noncomputable") rest = skip_word(rest);
        scopes.emplace_back(k, std::string(first_word(rest)));
        if (i > out.header_last_line) out.body_command_lines.push_back(i);
        break;
      }
      case LineKind::end:
        pending_first = -1;
        if (!scopes.empty()) scopes.pop_back();
        out.body_command_lines.push_back(i);
        break;
      case LineKind::open:
      case LineKind::option:
      case LineKind::command:
        pending_first = -1;
        if (i > out.header_last_line) out.body_command_lines.push_back(i);
        break;
    }
  }
  close_decl();
  return out;
}

Scope header_scope(const FileOutline& o, int bound) {
  const int last = std::min(o.header_last_line, bound - 1);
  if (last < 0) return {};
  // Only the lines up to the last header line that falls inside the bound.
  int capped = -1;
  for (int i = 0; i <= last; ++i) {
    if (is_header_kind(o.lines[i])) capped = i;
  }
  if (capped < 0) return {};
  return Scope{SourceRange::lines(0, capped)};
}

Scope header_scope(std::string_view text, int bound) { return header_scope(outline(text), bound); }

const Declaration* declaration_at(const FileOutline& o, int line) {
  for (const auto& d : o.decls) {
    if (d.first_line <= line && line <= d.last_line) return &d;
  }
  return nullptr;
}

std::string module_name(const FileId& file) {
  std::string m = file;
  if (m.size() > 5 && m.compare(m.size() - 5, 5, ".lean") == 0) m.resize(m.size() - 5);
  std::replace(m.begin(), m.end(), '/', '.');
  return m;
}

FileId module_file(std::string_view module) {
  std::string f(module);
  std::replace(f.begin(), f.end(), '.', '/');
  return f + ".lean";
}

}  // namespace verirefine
