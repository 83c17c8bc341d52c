#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "verirefine/corpus.hpp"
#include "verirefine/engine.hpp"

namespace verirefine {

class Stage1Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dataset index plus a byte span of that record's content.
struct ProvenanceSpan {
  std::int64_t index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  auto operator<=>(const ProvenanceSpan&) const = default;
};

/// Declaration name -> source spans it was compiled from.
struct ProvenanceMap {
  std::map<std::string, std::set<ProvenanceSpan>> entries;

  void add(const std::string& decl, const ProvenanceSpan& span) { entries[decl].insert(span); }
  bool operator==(const ProvenanceMap&) const = default;
};

void to_json(nlohmann::json& j, const ProvenanceMap& m);
void from_json(const nlohmann::json& j, ProvenanceMap& m);
ProvenanceMap load_provenance(const std::filesystem::path& path);
void save_provenance(const std::filesystem::path& path, const ProvenanceMap& m);

enum class ItemStatus { compiled, restored_failed, skipped };
std::string_view to_string(ItemStatus s);

struct Stage1Config {
  int max_repairs = 3;
  int header_bound = 64;
  std::string chapters_dir = "Chapters";
  /// Modules every new section file imports.
  std::vector<std::string> header_imports = {"Mathlib"};
  /// New section files also import every earlier chapter file.
  bool chain_imports = true;
  /// env tag -> stub keyword (theorem, lemma, def, abbrev, example, instance).
  std::map<std::string, std::string> stub_policy = {
      {"theorem", "theorem"},  {"proposition", "theorem"}, {"corollary", "theorem"}, {"claim", "theorem"},
      {"lemma", "lemma"},      {"definition", "def"},      {"def", "def"},           {"abbrev", "abbrev"},
      {"notation", "abbrev"},  {"example", "example"},     {"remark", "example"},    {"instance", "instance"}};
  /// Items with a smaller dataset index are skipped (resume cursor).
  std::int64_t start_index = std::numeric_limits<std::int64_t>::min();
  /// When set, the provenance map is saved after every item, before the checkpoint.
  std::optional<std::filesystem::path> provenance_path;
};

struct Stage1Item {
  std::int64_t index = 0;
  std::string label;
  FileId file;
  std::string declaration;
  ItemStatus status = ItemStatus::skipped;
  int b_attempts = 0;
  std::int64_t verifier_calls = 0;
  std::string note;
};

void to_json(nlohmann::json& j, const Stage1Item& r);

struct Stage1Result {
  std::vector<Stage1Item> items;
  ProvenanceMap provenance;
  bool stopped_early = false;
};

/// Chapters/Chap{NN}/section{MM}.lean from the record's context; the last
/// integer group of the section number is used, and an empty or non-numeric
/// section number maps to section00.
FileId target_file(const DatasetRecord& record, const Stage1Config& config = {});

/// The six stub shapes, keyed by the record's env through the stub policy,
/// preceded by the provenance docstring. Throws Stage1Error for an env with
/// no template.
std::string gen_stub(const DatasetRecord& record, const std::string& name, const std::string& type_text,
                     const Stage1Config& config = {});

/// "name : type" on the first non-empty line; absent for anything else.
std::optional<std::pair<std::string, std::string>> parse_skeleton_reply(std::string_view reply);

/// Header written into a section file that does not exist yet.
std::string new_file_header(const Project& project, const FileId& file, const Stage1Config& config);

/// Compiles records in increasing index order. `provenance` is extended in
/// place so a resumed run keeps earlier entries.
Stage1Result run_stage1(const std::vector<DatasetRecord>& records, EngineContext& ctx, const Stage1Config& config,
                        ProvenanceMap provenance = {});

}  // namespace verirefine
