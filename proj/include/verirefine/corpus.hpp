#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace verirefine {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SectionContext {
  std::int64_t chapter_number = 0;
  std::string chapter;
  std::string section_number;
  std::string section;
  std::string subsection_number;
  std::string subsection;

  bool operator==(const SectionContext&) const = default;
};

struct DatasetRecord {
  std::int64_t index = 0;
  std::string label;
  std::string env;
  std::vector<std::int64_t> number_components;
  std::vector<std::string> extracted_labels;
  SectionContext context;
  std::string content;
  std::vector<std::string> dependencies;
  std::string proof;
  /// Keys outside the known schema, kept verbatim for round-trips.
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const DatasetRecord&) const = default;
};

void to_json(nlohmann::json& j, const SectionContext& c);
void from_json(const nlohmann::json& j, SectionContext& c);
void to_json(nlohmann::json& j, const DatasetRecord& r);

/// Parses one record; `position` is only used in error messages.
DatasetRecord parse_record(const nlohmann::json& j, std::size_t position);

/// Records sorted by index. Throws DatasetError on a malformed container,
/// duplicate index, or missing required field.
std::vector<DatasetRecord> parse_dataset(const nlohmann::json& doc);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

struct ProofTargetPolicy {
  std::set<std::string> target_envs = {"theorem", "lemma", "proposition", "corollary"};
  bool require_reference_proof = true;
};

bool is_proof_target(const DatasetRecord& record, const ProofTargetPolicy& policy = {});

struct LemmaMapEntry {
  std::string problem_id;
  std::vector<std::string> decl_hints;
  std::optional<std::string> notes;
};

void to_json(nlohmann::json& j, const LemmaMapEntry& e);

/// Accepts either an array of entries or an object keyed by problem id.
std::map<std::string, LemmaMapEntry> parse_lemma_map(const nlohmann::json& doc);
std::map<std::string, LemmaMapEntry> load_lemma_map(const std::filesystem::path& path);

}  // namespace verirefine
