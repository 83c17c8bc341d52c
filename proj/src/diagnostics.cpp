#include "verirefine/diagnostics.hpp"

#include <algorithm>
#include <stdexcept>

namespace verirefine {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::error:
      return "error";
    case Severity::warning:
      return "warning";
    case Severity::info:
      return "info";
  }
  return "error";
}

Severity severity_from_string(std::string_view s) {
  if (s == "error") return Severity::error;
  if (s == "warning") return Severity::warning;
  if (s == "info" || s == "information") return Severity::info;
  throw std::invalid_argument("unknown severity '" + std::string(s) + "'");
}

void DiagnosticSet::append(const DiagnosticSet& other) {
  items_.insert(items_.end(), other.items_.begin(), other.items_.end());
}

DiagnosticSet DiagnosticSet::normalized() const {
  auto items = items_;
  std::sort(items.begin(), items.end());
  return DiagnosticSet(std::move(items));
}

std::size_t DiagnosticSet::count(Severity s) const {
  return static_cast<std::size_t>(
      std::count_if(items_.begin(), items_.end(), [s](const Diagnostic& d) { return d.severity == s; }));
}

bool operator==(const DiagnosticSet& a, const DiagnosticSet& b) {
  return a.normalized().items_ == b.normalized().items_;
}

std::size_t err_count(const DiagnosticSet& diagnostics) { return diagnostics.count(Severity::error); }

Scope::Scope(std::vector<SourceRange> ranges) {
  std::sort(ranges.begin(), ranges.end());
  for (const auto& r : ranges) {
    if (!ranges_.empty()) {
      auto& last = ranges_.back();
      // A point range at last.end is not covered by the half-open `last`, so
      // it stays separate.
      const bool touching = r.start == last.end && !r.empty();
      if (r.start < last.end || touching || (last.empty() && r.start == last.start)) {
        last.end = std::max(last.end, r.end);
        continue;
      }
    }
    ranges_.push_back(r);
  }
}

Scope Scope::unite(const Scope& other) const {
  auto all = ranges_;
  all.insert(all.end(), other.ranges_.begin(), other.ranges_.end());
  return Scope(std::move(all));
}

Scope Scope::with(const SourceRange& r) const {
  auto all = ranges_;
  all.push_back(r);
  return Scope(std::move(all));
}

bool Scope::intersects(const SourceRange& r) const {
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [&](const SourceRange& s) { return verirefine::intersects(s, r); });
}

bool Scope::covers(const SourceRange& r) const {
  return std::any_of(ranges_.begin(), ranges_.end(), [&](const SourceRange& s) {
    // Insertion at the end of a range is an edit of that range.
    if (r.empty()) return s.start <= r.start && r.start <= s.end;
    return s.contains(r);
  });
}

DiagnosticSet localize(const DiagnosticSet& diagnostics, const Scope& scope) {
  DiagnosticSet out;
  for (const auto& d : diagnostics) {
    if (scope.intersects(d.range)) out.add(d);
  }
  return out;
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
  j = {{"range", d.range}, {"severity", to_string(d.severity)}, {"message", d.message}};
}

void from_json(const nlohmann::json& j, Diagnostic& d) {
  d.range = j.at("range").get<SourceRange>();
  d.severity = severity_from_string(j.at("severity").get<std::string>());
  d.message = j.at("message").get<std::string>();
}

void to_json(nlohmann::json& j, const DiagnosticSet& ds) {
  j = nlohmann::json::array();
  for (const auto& d : ds) j.push_back(d);
}

void from_json(const nlohmann::json& j, DiagnosticSet& ds) {
  ds = DiagnosticSet(j.get<std::vector<Diagnostic>>());
}

void to_json(nlohmann::json& j, const Scope& s) { j = s.ranges(); }

void from_json(const nlohmann::json& j, Scope& s) { s = Scope(j.get<std::vector<SourceRange>>()); }

}  // namespace verirefine
