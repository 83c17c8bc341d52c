#include "verirefine/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace verirefine {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 9> kRecordKeys = {
    "index", "label", "env", "number_components", "extracted_labels", "context", "content", "dependencies", "proof"};

std::string where(std::size_t position) { return "record " + std::to_string(position); }

template <typename T>
T field(const json& j, const char* key, std::size_t position, bool required, T fallback = T{}) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw DatasetError(where(position) + ": missing required field '" + key + "'");
    return fallback;
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DatasetError(where(position) + ": field '" + key + "' has the wrong type");
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DatasetError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

void to_json(json& j, const SectionContext& c) {
  j = json{{"chapter_number", c.chapter_number},
           {"chapter", c.chapter},
           {"section_number", c.section_number},
           {"section", c.section},
           {"subsection_number", c.subsection_number},
           {"subsection", c.subsection}};
}

void from_json(const json& j, SectionContext& c) {
  c.chapter_number = j.at("chapter_number").get<std::int64_t>();
  c.chapter = j.value("chapter", "");
  // Section numbers are strings in the schema but some extractors emit ints.
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    return it->get<std::string>();
  };
  c.section_number = str("section_number");
  c.section = j.value("section", "");
  c.subsection_number = str("subsection_number");
  c.subsection = j.value("subsection", "");
}

void to_json(json& j, const DatasetRecord& r) {
  j = json{{"index", r.index},
           {"label", r.label},
           {"env", r.env},
           {"number_components", r.number_components},
           {"extracted_labels", r.extracted_labels},
           {"context", r.context},
           {"content", r.content},
           {"dependencies", r.dependencies},
           {"proof", r.proof}};
  for (const auto& [k, v] : r.extras.items()) j[k] = v;
}

DatasetRecord parse_record(const json& j, std::size_t position) {
  if (!j.is_object()) throw DatasetError(where(position) + ": not an object");
  DatasetRecord r;
  r.index = field<std::int64_t>(j, "index", position, true);
  r.label = field<std::string>(j, "label", position, true);
  r.env = field<std::string>(j, "env", position, true);
  r.number_components = field<std::vector<std::int64_t>>(j, "number_components", position, false);
  r.extracted_labels = field<std::vector<std::string>>(j, "extracted_labels", position, false);
  if (!j.contains("context")) throw DatasetError(where(position) + ": missing required field 'context'");
  try {
    r.context = j.at("context").get<SectionContext>();
  } catch (const json::exception& e) {
    throw DatasetError(where(position) + ": bad context: " + e.what());
  }
  r.content = field<std::string>(j, "content", position, true);
  if (r.content.empty()) throw DatasetError(where(position) + ": empty content");
  r.dependencies = field<std::vector<std::string>>(j, "dependencies", position, false);
  r.proof = field<std::string>(j, "proof", position, false);
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(kRecordKeys.begin(), kRecordKeys.end(), [&](const char* key) { return k == key; }) ==
        kRecordKeys.end()) {
      r.extras[k] = v;
    }
  }
  return r;
}

std::vector<DatasetRecord> parse_dataset(const json& doc) {
  if (!doc.is_array()) throw DatasetError("dataset must be a JSON array of records");
  std::vector<DatasetRecord> records;
  records.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) records.push_back(parse_record(doc[i], i));
  std::stable_sort(records.begin(), records.end(),
                   [](const DatasetRecord& a, const DatasetRecord& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].index == records[i - 1].index) {
      throw DatasetError("duplicate index " + std::to_string(records[i].index));
    }
  }
  return records;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) { return parse_dataset(read_json(path)); }

bool is_proof_target(const DatasetRecord& record, const ProofTargetPolicy& policy) {
  if (!policy.target_envs.count(record.env)) return false;
  return !policy.require_reference_proof || !record.proof.empty();
}

void to_json(json& j, const LemmaMapEntry& e) {
  j = json{{"problem_id", e.problem_id}, {"decl_hints", e.decl_hints}};
  if (e.notes) j["notes"] = *e.notes;
}

std::map<std::string, LemmaMapEntry> parse_lemma_map(const json& doc) {
  std::map<std::string, LemmaMapEntry> out;
  auto parse_entry = [&](const json& j, const std::string& fallback_id, std::size_t position) {
    if (!j.is_object()) throw DatasetError("lemma map entry " + std::to_string(position) + ": not an object");
    LemmaMapEntry e;
    if (j.contains("problem_id")) {
      e.problem_id = j.at("problem_id").get<std::string>();
    } else if (!fallback_id.empty()) {
      e.problem_id = fallback_id;
    } else {
      throw DatasetError("lemma map entry " + std::to_string(position) + ": missing problem_id");
    }
    const auto hints = j.find("decl_hints");
    if (hints == j.end() || !hints->is_array()) {
      throw DatasetError("lemma map entry '" + e.problem_id + "': decl_hints must be a list");
    }
    for (const auto& h : *hints) {
      if (!h.is_string()) throw DatasetError("lemma map entry '" + e.problem_id + "': non-string hint");
      e.decl_hints.push_back(h.get<std::string>());
    }
    if (j.contains("notes") && j.at("notes").is_string()) e.notes = j.at("notes").get<std::string>();
    out[e.problem_id] = std::move(e);
  };

  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) parse_entry(doc[i], "", i);
  } else if (doc.is_object() && doc.contains("problem_id")) {
    parse_entry(doc, "", 0);
  } else if (doc.is_object()) {
    std::size_t i = 0;
    for (const auto& [k, v] : doc.items()) parse_entry(v, k, i++);
  } else {
    throw DatasetError("lemma map must be an array or object");
  }
  return out;
}

std::map<std::string, LemmaMapEntry> load_lemma_map(const std::filesystem::path& path) {
  return parse_lemma_map(read_json(path));
}

}  // namespace verirefine
