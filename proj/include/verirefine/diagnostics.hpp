#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "verirefine/source.hpp"

namespace verirefine {

enum class Severity { error, warning, info };

std::string_view to_string(Severity s);
/// Throws std::invalid_argument for anything outside the three-value set.
Severity severity_from_string(std::string_view s);

struct Diagnostic {
  SourceRange range;
  Severity severity = Severity::error;
  std::string message;

  auto operator<=>(const Diagnostic&) const = default;
};

/// Finite multiset of diagnostics. Duplicates are kept; equality ignores
/// ordering.
class DiagnosticSet {
 public:
  DiagnosticSet() = default;
  DiagnosticSet(std::initializer_list<Diagnostic> items) : items_(items) {}
  explicit DiagnosticSet(std::vector<Diagnostic> items) : items_(std::move(items)) {}

  void add(Diagnostic d) { items_.push_back(std::move(d)); }
  void append(const DiagnosticSet& other);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<Diagnostic>& items() const { return items_; }

  /// Sorted by (range, severity, message).
  DiagnosticSet normalized() const;

  std::size_t count(Severity s) const;

  friend bool operator==(const DiagnosticSet& a, const DiagnosticSet& b);

 private:
  std::vector<Diagnostic> items_;
};

/// Number of error-severity items, counted with multiplicity.
std::size_t err_count(const DiagnosticSet& diagnostics);

/// A finite union of ranges within one file. Construction normalizes:
/// ranges are sorted and overlapping or touching ranges are merged.
class Scope {
 public:
  Scope() = default;
  explicit Scope(std::vector<SourceRange> ranges);
  Scope(std::initializer_list<SourceRange> ranges) : Scope(std::vector<SourceRange>(ranges)) {}

  const std::vector<SourceRange>& ranges() const { return ranges_; }
  bool empty() const { return ranges_.empty(); }

  Scope unite(const Scope& other) const;
  Scope with(const SourceRange& r) const;
  bool intersects(const SourceRange& r) const;
  /// True iff `r` lies inside a single range of the scope.
  bool covers(const SourceRange& r) const;

  friend bool operator==(const Scope&, const Scope&) = default;

 private:
  std::vector<SourceRange> ranges_;
};

/// Diagnostics whose range intersects some range of `scope`.
DiagnosticSet localize(const DiagnosticSet& diagnostics, const Scope& scope);

void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);
void to_json(nlohmann::json& j, const DiagnosticSet& ds);
void from_json(const nlohmann::json& j, DiagnosticSet& ds);
void to_json(nlohmann::json& j, const Scope& s);
void from_json(const nlohmann::json& j, Scope& s);

}  // namespace verirefine
