#include "verirefine/external_verifier.hpp"

#include <regex>

#include "verirefine/process.hpp"

namespace verirefine {

DiagnosticSet parse_lean_output(std::string_view output, const SourceRange& whole) {
  static const std::regex head(
      R"(^(.*?):(\d+):(\d+)(?:-(\d+):(\d+))?: (error|warning|info|information)(?:\([^)]*\))?: ?(.*)$)");
  DiagnosticSet out;
  std::optional<Diagnostic> current;
  auto flush = [&] {
    if (current) out.add(std::move(*current));
    current.reset();
  };

  for (auto line : split_lines(output)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::cmatch m;
    if (std::regex_match(line.begin(), line.end(), m, head)) {
      flush();
      Diagnostic d;
      d.range.start = {std::stoi(m[2].str()) - 1, std::stoi(m[3].str())};
      d.range.end = m[4].matched ? SourcePos{std::stoi(m[4].str()) - 1, std::stoi(m[5].str())} : d.range.start;
      const auto sev = m[6].str();
      d.severity = sev == "information" ? Severity::info : severity_from_string(sev);
      d.message = m[7].str();
      current = std::move(d);
      continue;
    }
    if (current) {
      current->message += "\n";
      current->message += line;
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    out.add({whole, Severity::info, std::string(line)});
  }
  flush();
  return out;
}

VerifierEnvironment ExternalVerifier::environment() const {
  return {options_.toolchain_id, options_.dependency_revision, AdapterKind::external};
}

DiagnosticSet ExternalVerifier::check_file(const Project& project, const FileId& file) {
  if (!project.root()) throw VerificationLaunchError("external verifier needs an on-disk project");
  const auto text = project.read(file);
  const auto whole = full_range(text);
  const auto command = expand_command(options_.command, {{"file", file}});
  const auto r = run_process(command, *project.root(), {}, options_.timeout);
  if (!r.launched) throw VerificationLaunchError("cannot launch '" + command + "': " + r.err);

  auto ds = parse_lean_output(r.out + (r.out.empty() || r.out.back() == '\n' ? "" : "\n") + r.err, whole);
  if (r.timed_out) {
    ds.add({whole, Severity::error, "verification timed out"});
  } else if (r.exit_code != 0 && err_count(ds) == 0) {
    ds.add({whole, Severity::error, "toolchain exited with status " + std::to_string(r.exit_code)});
  }
  return ds;
}

}  // namespace verirefine
