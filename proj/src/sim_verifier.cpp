#include "verirefine/sim_verifier.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string_view>
#include <unordered_set>

#include "verirefine/lexer.hpp"
#include "verirefine/outline.hpp"

namespace verirefine {

namespace {

using Words = std::vector<std::string>;

const std::unordered_set<std::string_view> kKeywords = {
    "by",   "fun",   "let",   "have", "show",  "from",  "at",    "if",     "then",     "else",
    "match", "with", "do",    "return", "in",  "Type", "Prop",  "Sort",   "sorry",    "admit",
    "this", "calc",  "using", "only", "where", "deriving", "instance", "theorem", "lemma", "def",
    "abbrev", "example", "structure", "class", "inductive", "axiom", "extends", "mut", "open"};

const std::unordered_set<std::string_view> kPrelude = {
    "True",      "False",     "Nat",        "Int",        "Bool",     "String",      "List",
    "Option",    "Prod",      "Sum",        "Unit",       "Eq",       "Ne",          "And",
    "Or",        "Not",       "Iff",        "Exists",     "id",       "trivial",     "rfl",
    "absurd",    "congrArg",  "Function",   "Decidable",  "Classical", "HEq",        "true",
    "false",     "Subtype",   "Fin",        "Array",      "Char",     "Float",       "True.intro",
    "And.intro", "Or.inl",    "Or.inr",     "Iff.intro",  "Eq.symm",  "Eq.trans",    "Nat.succ",
    "Nat.zero",  "Nat.le",    "Nat.lt",     "id",         "inferInstance"};

const std::unordered_set<std::string_view> kPreludeRoots = {
    "Nat", "Int", "List", "Bool", "Option", "Eq", "Ne", "And", "Or", "Iff", "Not", "Function",
    "Classical", "Prod", "Sum", "Fin", "String", "Array", "Exists", "True", "False"};

const std::unordered_set<std::string_view> kMathlib = {
    "Real",        "Rat",         "Complex",     "Set",        "Finset",      "Filter",       "Metric",
    "Topology",    "MeasureTheory", "Matrix",    "abs",        "Continuous",  "ContinuousOn", "Differentiable",
    "DifferentiableAt", "deriv",  "Monotone",    "StrictMono", "Antitone",    "Convex",       "ConvexOn",
    "ConcaveOn",   "IsOpen",      "IsClosed",    "IsCompact",  "sSup",        "sInf",         "iSup",
    "iInf",        "BddAbove",    "BddBelow",    "Tendsto",    "Summable",    "HasSum",       "Finite",
    "Infinite",    "max",         "min",         "Even",       "Odd",         "Prime",        "Irrational",
    "Group",       "CommGroup",   "Ring",        "CommRing",   "Field",       "Module",       "LinearOrder",
    "NormedAddCommGroup", "InnerProductSpace", "MetricSpace", "TopologicalSpace", "dist", "norm", "inner",
    "Subgroup",    "Ideal",       "Polynomial",  "LinearMap",  "ENNReal",     "NNReal",       "EReal",
    "upperBounds", "lowerBounds", "IsLUB",       "IsGLB",      "IsLeast",     "IsGreatest",   "atTop",
    "nhds",        "Dvd",         "Finset.sum",  "Finset.range", "Set.univ",  "Real.sqrt",    "Nat.Prime",
    "add_comm",    "mul_comm",    "add_zero",    "zero_add",   "mul_one",     "one_mul",      "le_refl",
    "le_of_lt",    "lt_irrefl",   "pow_pos",     "sq_nonneg",  "abs_nonneg",  "add_pos",      "mul_pos"};

const std::unordered_set<std::string_view> kMathlibRoots = {
    "Real", "Rat", "Complex", "Set", "Finset", "Filter", "Metric", "Topology", "MeasureTheory", "Matrix",
    "Polynomial", "Ideal", "Subgroup", "LinearMap", "Continuous", "Monotone", "Convex", "ConvexOn", "IsOpen",
    "IsClosed", "IsCompact", "BddAbove", "BddBelow", "Summable", "HasSum", "Finite", "Even", "Odd", "Prime"};

const std::unordered_set<std::string_view> kMathlibSymbols = {"ℝ", "ℕ", "ℤ", "ℚ", "ℂ"};

const std::unordered_set<std::string_view> kBinderSymbols = {"∀", "∃", "λ", "∑", "∏", "⋃", "⋂", "Σ", "Π"};

const std::unordered_set<std::string_view> kTactics = {
    "exact", "apply", "intro", "intros", "rfl", "trivial", "assumption", "constructor",
    "decide", "norm_num", "simp", "linarith", "omega", "sorry", "admit"};

const std::set<std::string_view> kBuiltinModules = {"Mathlib", "Init", "Std", "Lean"};

bool is_opener(std::string_view t) { return t == "(" || t == "[" || t == "{" || t == "⟨" || t == "⦃"; }
bool is_closer(std::string_view t) { return t == ")" || t == "]" || t == "}" || t == "⟩" || t == "⦄"; }
bool is_ident_word(std::string_view w) {
  if (w.empty()) return false;
  const auto c = static_cast<unsigned char>(w.front());
  return std::isalpha(c) || c == '_' || c >= 0xC0;
}

std::string join_words(const Words& ws) {
  std::string out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const bool tight = i == 0 || is_opener(ws[i - 1]) || is_closer(ws[i]) || ws[i] == ",";
    if (!tight) out += ' ';
    out += ws[i];
  }
  return out;
}

// Index one past the balanced group that opens at `i`.
std::size_t group_end(const Words& ws, std::size_t i) {
  int depth = 0;
  for (std::size_t j = i; j < ws.size(); ++j) {
    if (is_opener(ws[j])) ++depth;
    if (is_closer(ws[j]) && --depth == 0) return j + 1;
  }
  return ws.size();
}

Words strip_parens(Words ws) {
  while (ws.size() >= 2 && ws.front() == "(" && group_end(ws, 0) == ws.size()) {
    ws = Words(ws.begin() + 1, ws.end() - 1);
  }
  return ws;
}

// Top-level atoms: single tokens or balanced groups.
std::vector<Words> atoms_of(const Words& ws) {
  std::vector<Words> out;
  for (std::size_t i = 0; i < ws.size();) {
    const auto j = is_opener(ws[i]) ? group_end(ws, i) : i + 1;
    out.emplace_back(ws.begin() + static_cast<long>(i), ws.begin() + static_cast<long>(j));
    i = j;
  }
  return out;
}

std::optional<std::size_t> top_level(const Words& ws, std::string_view sym) {
  int depth = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (is_opener(ws[i])) ++depth;
    if (is_closer(ws[i])) --depth;
    if (depth == 0 && ws[i] == sym) return i;
  }
  return std::nullopt;
}

// Pattern match with single-atom variables, consistent across occurrences.
bool match_words(const Words& pattern, const Words& target, const std::set<std::string>& vars,
                 std::map<std::string, Words>& bind) {
  const auto pa = atoms_of(strip_parens(pattern));
  const auto ta = atoms_of(strip_parens(target));
  if (pa.size() != ta.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const auto& p = pa[i];
    const auto& t = ta[i];
    if (p.size() == 1 && vars.count(p[0])) {
      auto [it, fresh] = bind.emplace(p[0], strip_parens(t));
      if (!fresh && it->second != strip_parens(t)) return false;
      continue;
    }
    if (p.size() > 1 && t.size() > 1) {
      if (!match_words(p, t, vars, bind)) return false;
      continue;
    }
    if (p != t) return false;
  }
  return true;
}

bool same_type(const Words& a, const Words& b) {
  std::map<std::string, Words> bind;
  return match_words(a, b, {}, bind);
}

Words substitute(const Words& ws, const std::string& name, const Words& value) {
  Words out;
  const bool wrap = value.size() > 1 && !(is_opener(value.front()) && group_end(value, 0) == value.size());
  for (const auto& w : ws) {
    if (w != name) {
      out.push_back(w);
      continue;
    }
    if (wrap) out.push_back("(");
    out.insert(out.end(), value.begin(), value.end());
    if (wrap) out.push_back(")");
  }
  return out;
}

// Integer evaluation of + - * ^ over literals.
class Arith {
 public:
  explicit Arith(const Words& ws) : ws_(ws) {}
  std::optional<long long> run() {
    auto v = sum();
    if (!v || pos_ != ws_.size()) return std::nullopt;
    return v;
  }

 private:
  std::optional<long long> sum() {
    auto v = product();
    while (v && pos_ < ws_.size() && (ws_[pos_] == "+" || ws_[pos_] == "-")) {
      const bool plus = ws_[pos_++] == "+";
      auto r = product();
      if (!r) return std::nullopt;
      v = plus ? *v + *r : *v - *r;
    }
    return v;
  }
  std::optional<long long> product() {
    auto v = power();
    while (v && pos_ < ws_.size() && ws_[pos_] == "*") {
      ++pos_;
      auto r = power();
      if (!r) return std::nullopt;
      v = *v * *r;
    }
    return v;
  }
  std::optional<long long> power() {
    auto v = unary();
    if (v && pos_ < ws_.size() && ws_[pos_] == "^") {
      ++pos_;
      auto e = power();
      if (!e || *e < 0 || *e > 20) return std::nullopt;
      long long r = 1;
      for (long long i = 0; i < *e; ++i) r *= *v;
      return r;
    }
    return v;
  }
  std::optional<long long> unary() {
    if (pos_ >= ws_.size()) return std::nullopt;
    if (ws_[pos_] == "-") {
      ++pos_;
      auto v = unary();
      return v ? std::optional<long long>(-*v) : std::nullopt;
    }
    if (ws_[pos_] == "(") {
      ++pos_;
      auto v = sum();
      if (!v || pos_ >= ws_.size() || ws_[pos_] != ")") return std::nullopt;
      ++pos_;
      return v;
    }
    const auto& w = ws_[pos_];
    if (w.size() > 12 || w.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    ++pos_;
    return std::stoll(w);
  }

  const Words& ws_;
  std::size_t pos_ = 0;
};

std::optional<bool> evaluate_comparison(const Words& goal) {
  static const std::vector<std::string> ops = {"=", "≠", "!=", "<", "≤", "<=", ">", "≥", ">="};
  for (const auto& op : ops) {
    const auto at = top_level(goal, op);
    if (!at) continue;
    const auto l = Arith(Words(goal.begin(), goal.begin() + static_cast<long>(*at))).run();
    const auto r = Arith(Words(goal.begin() + static_cast<long>(*at) + 1, goal.end())).run();
    if (!l || !r) return std::nullopt;
    if (op == "=") return *l == *r;
    if (op == "≠" || op == "!=") return *l != *r;
    if (op == "<") return *l < *r;
    if (op == "≤" || op == "<=") return *l <= *r;
    if (op == ">") return *l > *r;
    return *l >= *r;
  }
  return std::nullopt;
}

bool closes_by_rfl(const Words& goal) {
  for (const auto* rel : {"=", "↔"}) {
    if (auto at = top_level(goal, rel)) {
      const Words l(goal.begin(), goal.begin() + static_cast<long>(*at));
      const Words r(goal.begin() + static_cast<long>(*at) + 1, goal.end());
      if (same_type(l, r)) return true;
      if (std::string_view(rel) == "=") {
        const auto lv = Arith(l).run();
        const auto rv = Arith(r).run();
        if (lv && rv && *lv == *rv) return true;
      }
    }
  }
  return false;
}

struct Binder {
  std::string name;
  Words type;
  bool explicit_ = true;
};

struct DeclInfo {
  std::string kind;
  std::vector<Binder> binders;
  Words type;
};

struct Env {
  std::map<std::string, DeclInfo> decls;
  std::set<std::string> namespaces;
  std::set<FileId> loaded;
  bool mathlib = false;

  void add(const std::string& full, DeclInfo info) {
    for (auto dot = full.find('.'); dot != std::string::npos; dot = full.find('.', dot + 1)) {
      namespaces.insert(full.substr(0, dot));
    }
    decls[full] = std::move(info);
  }
};

struct Goal {
  std::vector<std::pair<std::string, Words>> hyps;
  Words target;
};

GoalState to_state(const Goal& g) {
  GoalState s;
  s.goal = join_words(g.target);
  for (const auto& [n, t] : g.hyps) s.context.emplace_back(n, join_words(t));
  return s;
}

class FileElaborator {
 public:
  FileElaborator(const Project& project, FileId file, Env& env, bool report, std::set<FileId>& visiting)
      : project_(project), file_(std::move(file)), env_(env), report_(report), visiting_(visiting) {}

  SimElaboration run() {
    text_ = project_.read(file_);
    classes_ = classify(text_);
    outline_ = outline(text_);
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (text_[i] == '\n') line_starts_.push_back(i + 1);
    }
    line_starts_.insert(line_starts_.begin(), 0);

    visiting_.insert(file_);
    process_imports();
    walk();
    visiting_.erase(file_);
    return std::move(result_);
  }

 private:
  SourceRange range_of(std::size_t begin, std::size_t end) const {
    return {pos_at(begin), pos_at(end)};
  }
  SourcePos pos_at(std::size_t offset) const {
    const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
    const auto line = static_cast<int>(it - line_starts_.begin()) - 1;
    return {line, static_cast<int>(offset - line_starts_[static_cast<std::size_t>(line)])};
  }
  SourceRange token_range(const Token& t) const { return range_of(t.offset, t.offset + t.text.size()); }
  std::size_t line_begin(int line) const { return line_starts_[static_cast<std::size_t>(line)]; }
  std::size_t line_end(int line) const {
    const auto next = static_cast<std::size_t>(line) + 1;
    return next < line_starts_.size() ? line_starts_[next] - 1 : text_.size();
  }

  void error(const SourceRange& r, std::string message) {
    if (report_) result_.diagnostics.add({r, Severity::error, std::move(message)});
  }
  void warning(const SourceRange& r, std::string message) {
    if (report_) result_.diagnostics.add({r, Severity::warning, std::move(message)});
  }

  std::vector<Token> tokens_between(std::size_t begin, std::size_t end) const {
    return tokenize(text_, classes_, begin, end);
  }

  Words words_between(const std::vector<Token>& ts, std::size_t b, std::size_t e) const {
    Words out;
    for (auto i = b; i < e && i < ts.size(); ++i) out.emplace_back(ts[i].text);
    return out;
  }

  void process_imports() {
    for (int line = 0; line < static_cast<int>(outline_.lines.size()); ++line) {
      if (outline_.lines[line] != LineKind::import) continue;
      const auto ts = tokens_between(line_begin(line), line_end(line));
      for (std::size_t i = 1; i < ts.size(); ++i) {
        if (ts[i].kind != Token::Kind::ident) continue;
        const std::string module(ts[i].text);
        const auto root = module.substr(0, module.find('.'));
        if (kBuiltinModules.count(root)) {
          if (root == "Mathlib") env_.mathlib = true;
          continue;
        }
        const auto target = module_file(module);
        if (!project_.exists(target)) {
          error(token_range(ts[i]), "unknown module prefix '" + module + "'");
          continue;
        }
        if (visiting_.count(target)) {
          error(token_range(ts[i]), "import cycle detected at '" + module + "'");
          continue;
        }
        if (env_.loaded.count(target)) continue;
        env_.loaded.insert(target);
        FileElaborator sub(project_, target, env_, false, visiting_);
        sub.run();
      }
    }
  }

  // Namespace prefixes to try, innermost first.
  std::vector<std::string> prefixes(const std::string& ns) const {
    std::vector<std::string> out;
    std::string cur = ns;
    while (!cur.empty()) {
      out.push_back(cur + ".");
      const auto dot = cur.rfind('.');
      cur = dot == std::string::npos ? "" : cur.substr(0, dot);
    }
    out.emplace_back("");
    for (const auto& o : opened_) out.push_back(o + ".");
    return out;
  }

  std::optional<std::string> lookup(std::string_view name) const {
    for (const auto& p : prefixes(ns_)) {
      const auto full = p + std::string(name);
      if (env_.decls.count(full)) return full;
    }
    return std::nullopt;
  }

  bool known_root(std::string_view name) const {
    if (kPrelude.count(name) || kPreludeRoots.count(name)) return true;
    if (env_.mathlib && (kMathlib.count(name) || kMathlibRoots.count(name))) return true;
    for (const auto& p : prefixes(ns_)) {
      const auto full = p + std::string(name);
      if (env_.decls.count(full) || env_.namespaces.count(full)) return true;
    }
    return false;
  }

  bool resolves(std::string_view name, const std::vector<std::string>& bound) const {
    if (kKeywords.count(name) || name == "_") return true;
    if (std::find(bound.begin(), bound.end(), name) != bound.end()) return true;
    if (known_root(name)) return true;
    // Dotted access: some leading segment must resolve.
    for (auto dot = name.find('.'); dot != std::string_view::npos; dot = name.find('.', dot + 1)) {
      const auto head = name.substr(0, dot);
      if (std::find(bound.begin(), bound.end(), head) != bound.end() || known_root(head)) return true;
    }
    return false;
  }

  // Checks identifiers in ts[b, e) and returns names bound by binder syntax.
  void check_term(const std::vector<Token>& ts, std::size_t b, std::size_t e, std::vector<std::string> bound) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& t = ts[i];
      const bool binder_kw = (t.kind == Token::Kind::symbol && kBinderSymbols.count(t.text)) ||
                             (t.kind == Token::Kind::ident && t.text == "fun");
      if (binder_kw) {
        i = bind_span(ts, i + 1, e, bound) - 1;
        continue;
      }
      if (t.kind == Token::Kind::ident && (t.text == "let" || t.text == "have") && i + 1 < e &&
          ts[i + 1].kind == Token::Kind::ident) {
        bound.emplace_back(ts[i + 1].text);
        ++i;
        continue;
      }
      // Set-builder {x | p} and {x : T | p}.
      if (t.text == "{" && i + 2 < e && ts[i + 1].kind == Token::Kind::ident &&
          (ts[i + 2].text == "|" || ts[i + 2].text == ":")) {
        bound.emplace_back(ts[i + 1].text);
        ++i;
        continue;
      }
      if (t.kind == Token::Kind::symbol && kMathlibSymbols.count(t.text) && !env_.mathlib) {
        error(token_range(t), "unknown identifier '" + std::string(t.text) + "'");
        continue;
      }
      if (t.kind != Token::Kind::ident) continue;
      if (!resolves(t.text, bound)) error(token_range(t), "unknown identifier '" + std::string(t.text) + "'");
    }
  }

  // Binder list after ∀/∃/fun up to `,`/`=>`/`↦`; returns the index after it.
  std::size_t bind_span(const std::vector<Token>& ts, std::size_t i, std::size_t e, std::vector<std::string>& bound) {
    bool names = true;
    int depth = 0;
    std::size_t type_start = 0;
    for (; i < e; ++i) {
      const auto& t = ts[i];
      if (depth == 0 && (t.text == "," || t.text == "=>" || t.text == "↦")) return i + 1;
      if (is_opener(t.text)) {
        ++depth;
        names = true;
        continue;
      }
      if (is_closer(t.text)) {
        if (!names && type_start) check_term(ts, type_start, i, bound);
        --depth;
        names = true;
        type_start = 0;
        continue;
      }
      if (names && t.kind == Token::Kind::ident) {
        bound.emplace_back(t.text);
        continue;
      }
      if (names) {
        names = false;
        type_start = t.text == ":" ? i + 1 : i;
        if (depth == 0) {
          // Type or binder predicate at top level runs to the separator.
          std::size_t j = i;
          int d = 0;
          for (; j < e; ++j) {
            if (is_opener(ts[j].text)) ++d;
            if (is_closer(ts[j].text)) --d;
            if (d == 0 && (ts[j].text == "," || ts[j].text == "=>" || ts[j].text == "↦")) break;
          }
          check_term(ts, type_start, j, bound);
          return j < e ? j + 1 : e;
        }
      }
    }
    return e;
  }

  // Parses `binders : type` in ts[b, e). Reports unknown names when checking.
  void parse_signature(const std::vector<Token>& ts, std::size_t b, std::size_t e, DeclInfo& info,
                       std::vector<std::string>& bound, bool check) {
    std::size_t i = b;
    while (i < e && is_opener(ts[i].text) && ts[i].text != "⟨") {
      const bool explicit_ = ts[i].text == "(";
      const bool inst = ts[i].text == "[";
      int depth = 0;
      std::size_t close = i;
      std::optional<std::size_t> colon;
      for (std::size_t j = i; j < e; ++j) {
        if (is_opener(ts[j].text)) ++depth;
        if (is_closer(ts[j].text) && --depth == 0) {
          close = j;
          break;
        }
        if (depth == 1 && ts[j].text == ":" && !colon) colon = j;
      }
      if (close == i) close = e;
      if (colon) {
        if (check) check_term(ts, *colon + 1, close, bound);
        const auto type = words_between(ts, *colon + 1, close);
        for (std::size_t j = i + 1; j < *colon; ++j) {
          if (ts[j].kind != Token::Kind::ident) continue;
          info.binders.push_back({std::string(ts[j].text), type, explicit_});
          bound.emplace_back(ts[j].text);
        }
      } else {
        if (check) check_term(ts, i + 1, close, bound);
        const auto type = words_between(ts, i + 1, close);
        info.binders.push_back({inst ? "inst✝" : "x✝", type, explicit_});
      }
      i = close + 1;
    }
    if (i < e && ts[i].text == ":") ++i;
    if (check) check_term(ts, i, e, bound);
    info.type = words_between(ts, i, e);
  }

  void walk() {
    std::size_t next_decl = 0;
    for (int line = 0; line < static_cast<int>(outline_.lines.size()); ++line) {
      const auto kind = outline_.lines[line];
      if (next_decl < outline_.decls.size() && outline_.decls[next_decl].keyword_line == line) {
        const auto& d = outline_.decls[next_decl++];
        ns_ = d.namespace_prefix;
        declaration(d);
        line = d.last_line;
        continue;
      }
      if (kind == LineKind::open) {
        for (const auto& t : tokens_between(line_begin(line), line_end(line))) {
          if (t.kind == Token::Kind::ident && t.text != "open" && t.text != "scoped") opened_.emplace_back(t.text);
        }
      } else if (kind == LineKind::command) {
        const auto ts = tokens_between(line_begin(line), line_end(line));
        if (!ts.empty() && ts[0].text == "variable") {
          DeclInfo info;
          std::vector<std::string> bound = variable_names();
          parse_signature(ts, 1, ts.size(), info, bound, report_);
          variables_.insert(variables_.end(), info.binders.begin(), info.binders.end());
        }
      } else if (kind == LineKind::continuation && line > outline_.header_last_line) {
        const auto ts = tokens_between(line_begin(line), line_end(line));
        if (!ts.empty()) error(range_of(ts.front().offset, line_end(line)), "unexpected token; expected command");
      }
    }
  }

  std::vector<std::string> variable_names() const {
    std::vector<std::string> out;
    for (const auto& v : variables_) out.push_back(v.name);
    return out;
  }

  void declaration(const Declaration& d) {
    const auto ts = tokens_between(d.keyword_offset, d.end_offset);
    if (ts.empty()) return;
    std::size_t sig_begin = 1;
    std::optional<std::size_t> name_token;
    if (!d.name.empty() && ts.size() > 1 && ts[1].text == d.name) {
      name_token = 1;
      sig_begin = 2;
    }
    const bool inductive_like = d.kind == "structure" || d.kind == "class" || d.kind == "inductive";

    std::size_t sig_end = ts.size();
    std::size_t body_begin = ts.size();
    for (std::size_t i = sig_begin; i < ts.size(); ++i) {
      if (d.body_offset && ts[i].offset + 2 == *d.body_offset && ts[i].text == ":=") {
        sig_end = i;
        body_begin = i + 1;
        break;
      }
      if (inductive_like && (ts[i].text == "where" || ts[i].text == "|")) {
        sig_end = i;
        body_begin = ts[i].text == "where" ? i + 1 : i;
        break;
      }
    }

    const auto full = d.full_name();
    if (report_ && !full.empty() && env_.decls.count(full)) {
      const auto& at = name_token ? ts[*name_token] : ts[0];
      error(token_range(at), "'" + full + "' has already been declared");
    }

    DeclInfo info;
    info.kind = d.kind;
    auto bound = variable_names();
    parse_signature(ts, sig_begin, sig_end, info, bound, report_);

    bool has_hole = false;
    for (auto i = body_begin; i < ts.size(); ++i) has_hole |= ts[i].kind == Token::Kind::ident && ts[i].text == kHoleToken;

    if (report_) {
      if (inductive_like) {
        members(d, ts, body_begin, bound);
      } else if (body_begin < ts.size()) {
        body(d, ts, body_begin, info, bound);
      } else if (d.kind != "axiom" && d.kind != "opaque") {
        error(token_range(ts[0]), "declaration body expected (missing ':=')");
      }
      if (has_hole) warning(token_range(name_token ? ts[*name_token] : ts[0]), "declaration uses 'sorry'");
    }

    if (!full.empty()) {
      if (inductive_like) register_members(full, ts, body_begin, d.kind);
      env_.add(full, std::move(info));
    }
  }

  void register_members(const std::string& full, const std::vector<Token>& ts, std::size_t b, const std::string& kind) {
    if (kind != "inductive") env_.add(full + ".mk", {});
    for (auto i = b; i < ts.size(); ++i) {
      const bool line_start = pos_at(ts[i].offset).col == first_col(ts[i].offset);
      if (ts[i].kind != Token::Kind::ident) continue;
      if (kind == "inductive" ? (i > 0 && ts[i - 1].text == "|")
                              : (line_start && i + 1 < ts.size() && ts[i + 1].text == ":")) {
        env_.add(full + "." + std::string(ts[i].text), {});
      }
    }
  }

  int first_col(std::size_t offset) const {
    const auto line = pos_at(offset).line;
    const auto b = line_begin(line);
    int col = 0;
    while (b + static_cast<std::size_t>(col) < text_.size() && (text_[b + col] == ' ' || text_[b + col] == '\t')) ++col;
    return col;
  }

  void members(const Declaration& d, const std::vector<Token>& ts, std::size_t b, std::vector<std::string> bound) {
    bound.push_back(d.name);
    for (auto i = b; i < ts.size(); ++i) {
      if (ts[i].kind == Token::Kind::ident && i + 1 < ts.size() && ts[i + 1].text == ":" &&
          (d.kind == "inductive" ? ts[i - 1].text == "|"
                                 : pos_at(ts[i].offset).col == first_col(ts[i].offset))) {
        bound.emplace_back(ts[i].text);
        continue;
      }
      if (ts[i].kind == Token::Kind::ident && i > 0 && ts[i - 1].text == "|") {
        bound.emplace_back(ts[i].text);
        continue;
      }
      check_term(ts, i, i + 1, bound);
    }
  }

  Goal initial_goal(const DeclInfo& info) const {
    Goal g;
    for (const auto& v : variables_) g.hyps.emplace_back(v.name, v.type);
    for (const auto& b : info.binders) g.hyps.emplace_back(b.name, b.type);
    g.target = info.type;
    return g;
  }

  void record_hole(const Token& t, const Goal& g) {
    if (report_) result_.goals.push_back({token_range(t), to_state(g)});
  }

  void body(const Declaration& d, const std::vector<Token>& ts, std::size_t b, const DeclInfo& info,
            const std::vector<std::string>& bound) {
    auto goal = initial_goal(info);
    if (b < ts.size() && ts[b].text == "by") {
      tactics(ts, b, goal, bound);
      return;
    }
    check_term(ts, b, ts.size(), bound);
    if (b + 1 == ts.size() && ts[b].text == kHoleToken) {
      record_hole(ts[b], goal);
      return;
    }
    const bool proof = d.kind == "theorem" || d.kind == "lemma" || d.kind == "example";
    if (proof) {
      if (auto msg = exact_mismatch(words_between(ts, b, ts.size()), goal)) {
        error(range_of(ts[b].offset, ts.back().offset + ts.back().text.size()), *msg);
      }
      return;
    }
    literal_mismatch(ts, b, info);
  }

  void literal_mismatch(const std::vector<Token>& ts, std::size_t b, const DeclInfo& info) {
    if (b + 1 != ts.size() || info.type.size() != 1) return;
    static const std::set<std::string> numeric = {"ℕ", "ℤ", "ℚ", "ℝ", "ℂ", "Nat", "Int", "Rat", "Real", "Complex"};
    static const std::set<std::string> known = {"ℕ", "ℤ", "ℚ", "ℝ", "ℂ", "Nat", "Int", "Rat", "Real",
                                                "Complex", "String", "Bool", "Prop"};
    const auto& ty = info.type[0];
    if (!known.count(ty)) return;
    const auto& t = ts[b];
    std::optional<std::string> lit_type;
    if (t.kind == Token::Kind::number) {
      if (!numeric.count(ty)) lit_type = "Nat";
    } else if (t.kind == Token::Kind::string) {
      if (ty != "String") lit_type = "String";
    } else if (t.text == "true" || t.text == "false") {
      if (ty != "Bool") lit_type = "Bool";
    }
    if (lit_type) {
      error(token_range(t), "type mismatch\n  " + std::string(t.text) + "\nhas type\n  " + *lit_type +
                                " : Type\nbut is expected to have type\n  " + ty + " : Type");
    }
  }

  // Type of a term, when computable. Pattern variables are returned in `vars`.
  std::optional<Words> type_of(const Words& term, const Goal& g, std::set<std::string>& vars) const {
    const auto atoms = atoms_of(strip_parens(term));
    if (atoms.empty() || atoms[0].size() != 1) return std::nullopt;
    const auto& head = atoms[0][0];
    if (atoms.size() == 1 && (head == "trivial" || head == "True.intro")) return Words{"True"};
    for (auto it = g.hyps.rbegin(); it != g.hyps.rend(); ++it) {
      if (it->first != head) continue;
      Words ty = it->second;
      for (std::size_t k = 1; k < atoms.size(); ++k) {
        const auto arrow = top_level(ty, "→");
        if (!arrow) return std::nullopt;
        ty = Words(ty.begin() + static_cast<long>(*arrow) + 1, ty.end());
      }
      return ty;
    }
    const auto full = lookup(head);
    if (!full) return std::nullopt;
    const auto& info = env_.decls.at(*full);
    if (info.type.empty()) return std::nullopt;
    std::vector<const Binder*> explicit_binders;
    for (const auto& b : info.binders) {
      if (b.explicit_) {
        explicit_binders.push_back(&b);
      } else {
        vars.insert(b.name);
      }
    }
    if (atoms.size() - 1 != explicit_binders.size()) return std::nullopt;
    Words ty = info.type;
    for (std::size_t k = 0; k < explicit_binders.size(); ++k) ty = substitute(ty, explicit_binders[k]->name, atoms[k + 1]);
    return ty;
  }

  std::optional<std::string> exact_mismatch(const Words& term, const Goal& g) const {
    if (term.size() == 1 && term[0] == "rfl") {
      if (closes_by_rfl(g.target)) return std::nullopt;
      return "type mismatch\n  rfl\nhas type\n  ?a = ?a : Prop\nbut is expected to have type\n  " +
             join_words(g.target) + " : Prop";
    }
    std::set<std::string> vars;
    const auto ty = type_of(term, g, vars);
    if (!ty) return std::nullopt;
    std::map<std::string, Words> bind;
    if (match_words(*ty, g.target, vars, bind)) return std::nullopt;
    return "type mismatch\n  " + join_words(term) + "\nhas type\n  " + join_words(*ty) +
           " : Prop\nbut is expected to have type\n  " + join_words(g.target) + " : Prop";
  }

  bool in_hyps(const Goal& g) const {
    return std::any_of(g.hyps.begin(), g.hyps.end(), [&](const auto& h) { return same_type(h.second, g.target); });
  }

  // Peels one binder off the goal; false when there is nothing to introduce.
  bool intro(Goal& g, const std::string& name) const {
    auto& t = g.target;
    t = strip_parens(t);
    if (!t.empty() && t[0] == "∀") {
      const auto comma = top_level(t, ",");
      if (!comma) return false;
      Words head(t.begin() + 1, t.begin() + static_cast<long>(*comma));
      Words body(t.begin() + static_cast<long>(*comma) + 1, t.end());
      head = strip_parens(head);
      std::vector<std::string> names;
      std::size_t i = 0;
      while (i < head.size() && is_ident_word(head[i])) names.push_back(head[i++]);
      if (names.empty()) return false;
      Words type;
      Words pred;
      if (i < head.size() && head[i] == ":") {
        type.assign(head.begin() + static_cast<long>(i) + 1, head.end());
      } else if (i < head.size()) {
        pred.assign(head.begin() + static_cast<long>(i), head.end());
      }
      const auto var = names.front();
      Words rest;
      if (names.size() > 1) {
        rest.push_back("∀");
        rest.insert(rest.end(), names.begin() + 1, names.end());
        if (!type.empty()) {
          rest.push_back(":");
          rest.insert(rest.end(), type.begin(), type.end());
        }
        rest.push_back(",");
      }
      if (!pred.empty()) {
        rest.push_back(var);
        rest.insert(rest.end(), pred.begin(), pred.end());
        rest.push_back("→");
      }
      rest.insert(rest.end(), body.begin(), body.end());
      g.hyps.emplace_back(name, type.empty() ? Words{"?"} : type);
      t = substitute(rest, var, Words{name});
      return true;
    }
    if (!t.empty() && t[0] == "¬") {
      g.hyps.emplace_back(name, Words(t.begin() + 1, t.end()));
      t = Words{"False"};
      return true;
    }
    if (auto arrow = top_level(t, "→")) {
      g.hyps.emplace_back(name, strip_parens(Words(t.begin(), t.begin() + static_cast<long>(*arrow))));
      t = Words(t.begin() + static_cast<long>(*arrow) + 1, t.end());
      return true;
    }
    return false;
  }

  void tactics(const std::vector<Token>& ts, std::size_t by, Goal goal, std::vector<std::string> bound) {
    // Steps: a token that starts a line at or left of the block column, or follows `;`.
    std::vector<std::pair<std::size_t, std::size_t>> steps;
    const std::size_t first = by + 1;
    if (first >= ts.size()) {
      error(token_range(ts[by]), "expected tactic sequence");
      return;
    }
    const int block_col = pos_at(ts[first].offset).col;
    std::size_t start = first;
    int depth = 0;
    for (std::size_t i = first; i < ts.size(); ++i) {
      const auto& t = ts[i];
      const auto p = pos_at(t.offset);
      const bool new_line = i > first && p.line != pos_at(ts[i - 1].offset).line;
      if (depth == 0 && i > start && new_line && p.col <= block_col) {
        steps.emplace_back(start, i);
        start = i;
      }
      if (depth == 0 && (t.text == ";" || t.text == "<;>")) {
        if (i > start) steps.emplace_back(start, i);
        start = i + 1;
        continue;
      }
      if (is_opener(t.text)) ++depth;
      if (is_closer(t.text)) depth = std::max(0, depth - 1);
    }
    if (start < ts.size()) steps.emplace_back(start, ts.size());

    std::vector<Goal> goals{std::move(goal)};
    for (auto [b, e] : steps) {
      if (b < e && (ts[b].text == "·" || ts[b].text == ".")) ++b;
      if (b >= e) continue;
      const auto& tac = ts[b];
      const std::string name(tac.text);
      const auto step_range = range_of(tac.offset, ts[e - 1].offset + ts[e - 1].text.size());
      if (tac.kind != Token::Kind::ident || !kTactics.count(name)) {
        error(token_range(tac), "unknown tactic '" + name + "'");
        return;
      }
      if (goals.empty()) {
        error(step_range, "no goals to be proved");
        return;
      }
      auto& g = goals.front();
      std::vector<std::string> scope = bound;
      for (const auto& h : g.hyps) scope.push_back(h.first);

      if (name == "sorry" || name == "admit") {
        record_hole(tac, g);
        goals.erase(goals.begin());
      } else if (name == "intro" || name == "intros") {
        std::vector<std::string> names;
        for (auto i = b + 1; i < e; ++i) {
          if (ts[i].kind == Token::Kind::ident) names.emplace_back(ts[i].text);
        }
        if (name == "intros" && names.empty()) {
          int k = 0;
          while (intro(g, "a" + std::to_string(k) + "✝")) ++k;
        } else {
          if (names.empty()) names.emplace_back("a✝");
          for (const auto& n : names) {
            if (!intro(g, n)) {
              error(step_range, "no additional binders to introduce");
              return;
            }
            bound.push_back(n);
          }
        }
      } else if (name == "exact" || name == "apply") {
        if (b + 1 >= e) {
          error(step_range, "expected term");
          return;
        }
        const auto before = result_.diagnostics.size();
        check_term(ts, b + 1, e, scope);
        if (result_.diagnostics.size() != before) return;
        const auto term = words_between(ts, b + 1, e);
        if (std::find(term.begin(), term.end(), std::string(kHoleToken)) != term.end()) {
          for (auto i = b + 1; i < e; ++i) {
            if (ts[i].text == kHoleToken) record_hole(ts[i], g);
          }
          goals.erase(goals.begin());
          continue;
        }
        if (name == "exact") {
          if (auto msg = exact_mismatch(term, g)) {
            error(range_of(ts[b + 1].offset, ts[e - 1].offset + ts[e - 1].text.size()), *msg);
            return;
          }
          goals.erase(goals.begin());
        } else {
          std::set<std::string> vars;
          const auto ty = type_of(term, g, vars);
          std::map<std::string, Words> bind;
          if (!ty || match_words(*ty, g.target, vars, bind)) {
            goals.erase(goals.begin());
          } else if (auto arrow = top_level(*ty, "→");
                     arrow && match_words(Words(ty->begin() + static_cast<long>(*arrow) + 1, ty->end()), g.target,
                                          vars, bind)) {
            g.target = strip_parens(Words(ty->begin(), ty->begin() + static_cast<long>(*arrow)));
          } else {
            error(step_range, "apply failed: could not unify the conclusion of '" + join_words(term) +
                                  "' with the goal " + join_words(g.target));
            return;
          }
        }
      } else if (name == "rfl") {
        if (!closes_by_rfl(g.target)) {
          error(step_range, "The rfl tactic failed. The goal is not a reflexive relation:\n⊢ " + join_words(g.target));
          return;
        }
        goals.erase(goals.begin());
      } else if (name == "trivial") {
        if (!(same_type(g.target, {"True"}) || closes_by_rfl(g.target) || in_hyps(g))) {
          error(step_range, "trivial failed to close the goal\n⊢ " + join_words(g.target));
          return;
        }
        goals.erase(goals.begin());
      } else if (name == "assumption") {
        if (!in_hyps(g)) {
          error(step_range, "assumption failed: no hypothesis matches\n⊢ " + join_words(g.target));
          return;
        }
        goals.erase(goals.begin());
      } else if (name == "constructor") {
        auto t = strip_parens(g.target);
        if (same_type(t, {"True"})) {
          goals.erase(goals.begin());
        } else if (auto at = top_level(t, "∧")) {
          Goal l = g, r = g;
          l.target = strip_parens(Words(t.begin(), t.begin() + static_cast<long>(*at)));
          r.target = strip_parens(Words(t.begin() + static_cast<long>(*at) + 1, t.end()));
          goals.erase(goals.begin());
          goals.insert(goals.begin(), {l, r});
        } else if (auto iff = top_level(t, "↔")) {
          const Words a(t.begin(), t.begin() + static_cast<long>(*iff));
          const Words c(t.begin() + static_cast<long>(*iff) + 1, t.end());
          Goal l = g, r = g;
          l.target = a;
          l.target.push_back("→");
          l.target.insert(l.target.end(), c.begin(), c.end());
          r.target = c;
          r.target.push_back("→");
          r.target.insert(r.target.end(), a.begin(), a.end());
          goals.erase(goals.begin());
          goals.insert(goals.begin(), {l, r});
        } else {
          error(step_range, "constructor failed: target is not an inductive type with one constructor\n⊢ " +
                                join_words(g.target));
          return;
        }
      } else {
        // decide, norm_num, simp, linarith, omega: closed-form arithmetic,
        // reflexivity, or a matching hypothesis.
        const auto value = evaluate_comparison(strip_parens(g.target));
        const bool closes = (value && *value) || same_type(g.target, {"True"}) || closes_by_rfl(g.target) ||
                            (name != "decide" && in_hyps(g));
        if (!closes) {
          error(step_range, name + " failed to prove the goal\n⊢ " + join_words(g.target));
          return;
        }
        goals.erase(goals.begin());
      }
    }
    if (!goals.empty()) {
      std::string msg = "unsolved goals";
      for (const auto& g : goals) {
        for (const auto& [n, t] : g.hyps) msg += "\n" + n + " : " + join_words(t);
        msg += "\n⊢ " + join_words(g.target);
      }
      error(token_range(ts[by]), msg);
    }
  }

  const Project& project_;
  FileId file_;
  Env& env_;
  bool report_;
  std::set<FileId>& visiting_;
  std::string text_;
  std::vector<CharClass> classes_;
  FileOutline outline_;
  std::vector<std::size_t> line_starts_;
  std::string ns_;
  std::vector<std::string> opened_;
  std::vector<Binder> variables_;
  SimElaboration result_;
};

}  // namespace

SimElaboration simulate_check(const Project& project, const FileId& file) {
  Env env;
  std::set<FileId> visiting;
  env.loaded.insert(file);
  FileElaborator elab(project, file, env, true, visiting);
  auto r = elab.run();
  r.diagnostics = r.diagnostics.normalized();
  return r;
}

std::vector<std::string> builtin_vocabulary(bool with_mathlib) {
  std::set<std::string> names(kPrelude.begin(), kPrelude.end());
  if (with_mathlib) {
    names.insert(kMathlib.begin(), kMathlib.end());
    names.insert(kMathlibSymbols.begin(), kMathlibSymbols.end());
  }
  return {names.begin(), names.end()};
}

bool requires_mathlib(std::string_view name) {
  if (kMathlibSymbols.count(name) || kMathlib.count(name)) return true;
  const auto dot = name.find('.');
  return dot != std::string_view::npos && kMathlibRoots.count(name.substr(0, dot));
}

VerifierEnvironment SimulatedVerifier::environment() const {
  return {options_.toolchain_id, options_.dependency_revision, AdapterKind::simulated};
}

DiagnosticSet SimulatedVerifier::check_file(const Project& project, const FileId& file) {
  if (!project.exists(file)) throw VerificationLaunchError("no such file '" + file + "'");
  return simulate_check(project, file).diagnostics;
}

std::optional<GoalState> SimulatedVerifier::goal_at(const Project& project, const FileId& file,
                                                    const SourceRange& hole) {
  if (!options_.goal_queries || !project.exists(file)) return std::nullopt;
  const auto r = simulate_check(project, file);
  if (err_count(r.diagnostics) > 0) return std::nullopt;
  for (const auto& g : r.goals) {
    if (g.hole.start == hole.start) return g.state;
  }
  return std::nullopt;
}

}  // namespace verirefine
