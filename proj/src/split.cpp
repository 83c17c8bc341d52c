#include "verirefine/split.hpp"

#include <algorithm>
#include <regex>

#include "verirefine/outline.hpp"

namespace verirefine {

FileId part_file(const FileId& file, int k) {
  auto stem = file;
  if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".lean") stem.resize(stem.size() - 5);
  return stem + "_part" + std::to_string(k) + ".lean";
}

std::vector<FileId> part_files(const Project& project, const FileId& file) {
  std::vector<std::pair<int, FileId>> found;
  auto stem = file.substr(0, file.size() - std::min<std::size_t>(5, file.size()));
  for (const auto& f : project.files()) {
    if (f.rfind(stem + "_part", 0) != 0) continue;
    const auto rest = f.substr(stem.size() + 5);
    static const std::regex digits(R"(^(\d+)\.lean$)");
    std::smatch m;
    if (std::regex_match(rest, m, digits)) found.emplace_back(std::stoi(m[1].str()), f);
  }
  std::sort(found.begin(), found.end());
  std::vector<FileId> out;
  for (auto& [_, f] : found) out.push_back(std::move(f));
  return out;
}

std::optional<SplitPlan> plan_split(const FileId& file, std::string_view text, int max_lines) {
  const auto ol = outline(text);
  if (ol.decls.size() < 2) return std::nullopt;
  const auto lines = split_lines(text);
  const int n = static_cast<int>(lines.size());

  // Trailing `end` lines close header namespaces/sections and are repeated.
  int trailer = n;
  for (int i = n - 1; i >= 0; --i) {
    const auto k = ol.lines[i];
    if (k == LineKind::blank || k == LineKind::comment) continue;
    if (k != LineKind::end) break;
    trailer = i;
  }
  if (trailer <= ol.decls.back().last_line) trailer = n;
  for (int line : ol.body_command_lines) {
    if (line < trailer) return std::nullopt;
  }

  auto join = [&](int from, int to) {
    std::string s;
    for (int i = from; i < to; ++i) {
      s.append(lines[i]);
      s += '\n';
    }
    return s;
  };
  const int body_start = ol.header_last_line + 1;
  const std::string header = join(0, body_start);
  const std::string tail = join(trailer, n);
  const int header_lines = body_start + (n - trailer);

  int last_import = -1;
  for (int i = 0; i < body_start; ++i) {
    if (ol.lines[i] == LineKind::import) last_import = i;
  }

  struct Chunk {
    int from, to;
    std::string name;
  };
  std::vector<Chunk> chunks;
  for (std::size_t i = 0; i < ol.decls.size(); ++i) {
    const int from = i == 0 ? body_start : ol.decls[i].first_line;
    const int to = i + 1 < ol.decls.size() ? ol.decls[i + 1].first_line : trailer;
    chunks.push_back({from, to, ol.decls[i].full_name()});
  }

  std::vector<std::vector<const Chunk*>> groups;
  int used = 0;
  for (const auto& c : chunks) {
    const int size = c.to - c.from;
    if (groups.empty() || used + size + header_lines + 1 > max_lines) {
      groups.emplace_back();
      used = 0;
    }
    groups.back().push_back(&c);
    used += size;
  }
  if (groups.size() < 2) return std::nullopt;

  SplitPlan plan;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    SplitPart part;
    part.file = part_file(file, static_cast<int>(g) + 1);
    std::string head = header;
    if (g > 0) {
      const auto imp = "import " + module_name(part_file(file, static_cast<int>(g))) + "\n";
      head = join(0, last_import + 1) + imp + join(last_import + 1, body_start);
    }
    std::string body;
    for (const auto* c : groups[g]) {
      body += join(c->from, c->to);
      part.declarations.push_back(c->name);
    }
    part.text = head + body + tail;
    plan.parts.push_back(std::move(part));
  }
  for (const auto& p : plan.parts) plan.aggregate += "import " + module_name(p.file) + "\n";
  return plan;
}

void apply_split(Project& project, const FileId& file, const SplitPlan& plan) {
  for (const auto& p : plan.parts) project.write(p.file, p.text);
  project.write(file, plan.aggregate);
}

}  // namespace verirefine
