#include "verirefine/accounting.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "verirefine/project.hpp"

namespace verirefine {

namespace {

bool in(const std::set<std::string>& ids, const MetricsEvent& e) { return ids.count(e.run_id) != 0; }

std::optional<int> parse_stage(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (!v.is_string()) return std::nullopt;
  auto s = v.get<std::string>();
  if (s == "statements" || s == "skeleton") return 1;
  if (s == "proofs" || s == "final") return 2;
  if (s.rfind("stage", 0) == 0) s = s.substr(5);
  if (s.size() == 1 && (s[0] == '1' || s[0] == '2')) return s[0] - '0';
  return std::nullopt;
}

std::optional<int> run_stage(const std::vector<MetricsEvent>& events, const std::string& run_id) {
  bool legacy_items = false;
  for (const auto& e : events) {
    if (e.run_id != run_id) continue;
    if (e.event == events::run_start && e.data.contains("stage")) return parse_stage(e.data["stage"]);
    if (e.event == events::item_end) {
      if (e.data.contains("stage")) return parse_stage(e.data["stage"]);
      if (e.data.contains("b_attempts")) legacy_items = true;
    }
  }
  if (legacy_items) return 1;
  return std::nullopt;
}

std::int64_t legacy_reconstruction(const std::vector<MetricsEvent>& events, const std::string& run_id) {
  const auto stage = run_stage(events, run_id);
  bool has_items = false;
  std::int64_t total = 0;
  for (const auto& e : events) {
    if (e.run_id != run_id || e.event != events::item_end) continue;
    has_items = true;
    total += 1 + e.data.value("b_attempts", std::int64_t{0});
  }
  if (has_items && stage && *stage != 1) {
    throw AccountingError("run '" + run_id + "' uses the version-1 schema, which is only defined for statement runs");
  }
  return total;
}

template <class F>
std::int64_t count_calls(const std::vector<MetricsEvent>& events, const std::set<std::string>& run_ids,
                         std::string_view label, F legacy) {
  std::int64_t total = 0;
  for (const auto& id : run_ids) {
    if (schema_version(events, id) < 2) {
      total += legacy(id);
      continue;
    }
    for (const auto& e : events) {
      if (e.run_id == id && e.event == label) ++total;
    }
  }
  return total;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt2(const std::optional<double>& v) { return v ? fixed2(*v) : "n/a"; }

std::string alpha_label(double a) { return "cost_" + fixed2(a); }

}  // namespace

std::vector<std::string> run_ids_of(const std::vector<MetricsEvent>& events) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : events) {
    if (seen.insert(e.run_id).second) out.push_back(e.run_id);
  }
  return out;
}

int schema_version(const std::vector<MetricsEvent>& events, const std::string& run_id) {
  for (const auto& e : events) {
    if (e.run_id != run_id || e.event != events::run_start) continue;
    if (!e.data.contains("schema_version")) return 1;
    const auto& v = e.data["schema_version"];
    if (!v.is_number_integer()) throw AccountingError("run '" + run_id + "' has a non-integer schema_version");
    const int version = v.get<int>();
    if (version < 1 || version > kMetricsSchemaVersion) {
      throw AccountingError("run '" + run_id + "' uses unknown schema version " + std::to_string(version));
    }
    return version;
  }
  return 1;
}

std::int64_t count_verifier_calls(const std::vector<MetricsEvent>& events, const std::set<std::string>& run_ids) {
  return count_calls(events, run_ids, events::lean_check,
                     [&](const std::string& id) { return legacy_reconstruction(events, id); });
}

std::int64_t count_oracle_calls(const std::vector<MetricsEvent>& events, const std::set<std::string>& run_ids) {
  return count_calls(events, run_ids, events::agent_result,
                     [&](const std::string& id) { return legacy_reconstruction(events, id); });
}

double cost_alpha(std::int64_t verifier_calls, std::int64_t oracle_calls, double alpha) {
  // Work in hundredths of an alpha step so two-decimal alphas stay exact.
  const auto alpha_hundredths = std::llround(alpha * 100.0);
  if (std::fabs(alpha * 100.0 - static_cast<double>(alpha_hundredths)) < 1e-9) {
    const auto hundredths = verifier_calls * 100 + alpha_hundredths * oracle_calls;
    return static_cast<double>(hundredths) / 100.0;
  }
  return static_cast<double>(verifier_calls) + alpha * static_cast<double>(oracle_calls);
}

std::string fixed2(double v) {
  const double scaled = std::round(v * 100.0 + (v >= 0 ? 1e-9 : -1e-9));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", scaled / 100.0);
  return buf;
}

std::optional<double> QualityMetrics::scc() const {
  if (blocks == 0) return std::nullopt;
  return 100.0 * static_cast<double>(compiled) / static_cast<double>(blocks);
}

std::optional<double> QualityMetrics::arr() const {
  if (compiled == 0) return std::nullopt;
  return static_cast<double>(total_b_attempts) / static_cast<double>(compiled);
}

std::optional<double> QualityMetrics::psr() const {
  if (evaluated == 0) return std::nullopt;
  return 100.0 * static_cast<double>(closed) / static_cast<double>(evaluated);
}

QualityMetrics compute_metrics(const std::vector<MetricsEvent>& events, const std::set<std::string>& run_ids) {
  QualityMetrics q;
  for (const auto& e : events) {
    if (!in(run_ids, e)) continue;
    if (e.event == events::project_check) q.pb = e.data.value("ok", false);
    if (e.event != events::item_end) continue;
    const auto stage = e.data.contains("stage") ? parse_stage(e.data["stage"])
                       : e.data.contains("b_attempts") ? std::optional<int>(1)
                                                        : std::nullopt;
    const auto status = e.data.value("status", std::string());
    if (stage == 1) {
      ++q.blocks;
      if (status == "compiled") {
        ++q.compiled;
        q.total_b_attempts += e.data.value("b_attempts", std::int64_t{0});
      }
    } else if (stage == 2) {
      if (status != "solved" && status != "unsolved") continue;
      ++q.evaluated;
      if (status == "solved" && e.data.value("errors_after", std::int64_t{0}) == 0) ++q.closed;
    }
  }
  return q;
}

QualityMetrics compute_metrics(const std::vector<BlockOutcome>& blocks, const std::vector<HoleOutcome>& holes,
                               std::optional<bool> pb) {
  QualityMetrics q;
  q.pb = pb;
  for (const auto& b : blocks) {
    ++q.blocks;
    if (b.compiled) {
      ++q.compiled;
      q.total_b_attempts += b.b_attempts;
    }
  }
  for (const auto& h : holes) {
    if (!h.evaluated) continue;
    ++q.evaluated;
    if (h.closed) ++q.closed;
  }
  return q;
}

std::optional<double> AccountingRow::calls_per_solved() const {
  if (solved == 0) return std::nullopt;
  return static_cast<double>(verifier_calls) / static_cast<double>(solved);
}

std::optional<double> AccountingRow::calls_per_target() const {
  if (targets == 0) return std::nullopt;
  return static_cast<double>(oracle_calls) / static_cast<double>(targets);
}

std::optional<double> AccountingRow::tokens_per_solved() const {
  if (!tokens || solved == 0) return std::nullopt;
  return static_cast<double>(*tokens) / static_cast<double>(solved);
}

nlohmann::json row_json(const AccountingRow& row, const std::vector<double>& alphas) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json { return v ? nlohmann::json(fixed2(*v)) : "n/a"; };
  nlohmann::json j{{"corpus", row.corpus},
                   {"stage", row.stage},
                   {"targets", row.targets},
                   {"solved", row.solved},
                   {"verifier_calls", row.verifier_calls},
                   {"oracle_calls", row.oracle_calls},
                   {"calls_per_solved", opt(row.calls_per_solved())},
                   {"calls_per_target", opt(row.calls_per_target())},
                   {"tokens", row.tokens ? nlohmann::json(*row.tokens) : nlohmann::json("n/a")},
                   {"tokens_per_solved", row.tokens_per_solved()
                                             ? nlohmann::json(std::llround(*row.tokens_per_solved()))
                                             : nlohmann::json("n/a")},
                   {"pb", row.quality.pb ? nlohmann::json(*row.quality.pb) : nlohmann::json("n/a")},
                   {"scc", opt(row.quality.scc())},
                   {"arr", opt(row.quality.arr())},
                   {"psr", opt(row.quality.psr())}};
  for (double a : alphas) j[alpha_label(a)] = fixed2(cost_alpha(row.verifier_calls, row.oracle_calls, a));
  return j;
}

AccountingRow account(const std::string& corpus, int stage, const std::vector<MetricsEvent>& events) {
  AccountingRow row;
  row.corpus = corpus;
  row.stage = stage;
  std::set<std::string> ids;
  for (const auto& id : run_ids_of(events)) {
    if (run_stage(events, id) == stage) ids.insert(id);
  }
  row.verifier_calls = count_verifier_calls(events, ids);
  row.oracle_calls = count_oracle_calls(events, ids);
  row.quality = compute_metrics(events, ids);
  if (stage == 1) {
    row.targets = row.quality.blocks;
    row.solved = row.quality.compiled;
  } else {
    row.targets = row.quality.evaluated;
    row.solved = row.quality.closed;
  }

  std::int64_t backfilled = 0, direct = 0;
  bool have_backfill = false, have_direct = false;
  for (const auto& e : events) {
    if (e.event == events::task_tokens && e.data.contains("stage") && parse_stage(e.data["stage"]) == stage) {
      have_backfill = true;
      backfilled += e.data.value("tokens_used_total", std::int64_t{0});
    }
    if (e.event == events::agent_result && ids.count(e.run_id) && e.data.contains("tokens_used")) {
      have_direct = true;
      direct += e.data["tokens_used"].get<std::int64_t>();
    }
  }
  if (have_backfill) {
    row.tokens = backfilled;
  } else if (have_direct) {
    row.tokens = direct;
  }
  return row;
}

std::string report_csv(const std::vector<AccountingRow>& rows, const std::vector<double>& alphas) {
  std::ostringstream out;
  out << "corpus,stage,targets,solved,verifier_calls,oracle_calls,calls_per_solved,calls_per_target,tokens,"
         "tokens_per_solved";
  for (double a : alphas) out << ',' << alpha_label(a);
  out << ",pb,scc,arr,psr\n";
  for (const auto& r : rows) {
    out << csv_field(r.corpus) << ',' << r.stage << ',' << r.targets << ',' << r.solved << ',' << r.verifier_calls
        << ',' << r.oracle_calls << ',' << opt2(r.calls_per_solved()) << ',' << opt2(r.calls_per_target()) << ','
        << (r.tokens ? std::to_string(*r.tokens) : "n/a") << ','
        << (r.tokens_per_solved() ? std::to_string(std::llround(*r.tokens_per_solved())) : "n/a");
    for (double a : alphas) out << ',' << fixed2(cost_alpha(r.verifier_calls, r.oracle_calls, a));
    out << ',' << (r.quality.pb ? (*r.quality.pb ? "true" : "false") : "n/a") << ',' << opt2(r.quality.scc()) << ','
        << opt2(r.quality.arr()) << ',' << opt2(r.quality.psr()) << '\n';
  }
  return out.str();
}

std::string problems_csv(const std::vector<MetricsEvent>& events) {
  std::map<std::int64_t, const MetricsEvent*> last;
  for (const auto& e : events) {
    if (e.event != events::item_end || !e.data.contains("stage") || parse_stage(e.data["stage"]) != 2) continue;
    last[e.data.value("index", std::int64_t{0})] = &e;
  }
  std::ostringstream out;
  out << "index,label,file,status,attempts,verifier_calls,proof_lines,outcome\n";
  for (const auto& [index, e] : last) {
    const auto& d = e->data;
    const auto status = d.value("status", std::string());
    const auto attempts = d.value("attempts", std::int64_t{0});
    std::string outcome = "open";
    if (status == "solved") outcome = attempts <= 1 ? "first_attempt" : "repaired";
    if (status == "already_closed") outcome = "already_closed";
    if (status == "skipped") outcome = "skipped";
    out << index << ',' << csv_field(d.value("label", std::string())) << ','
        << csv_field(d.value("file", std::string())) << ',' << status << ',' << attempts << ','
        << d.value("verifier_calls", std::int64_t{0}) << ',' << d.value("proof_lines", std::int64_t{0}) << ','
        << outcome << '\n';
  }
  return out.str();
}

std::vector<AccountingInput> load_accounting_manifest(const std::filesystem::path& path) {
  const auto doc = nlohmann::json::parse(read_file(path));
  if (!doc.is_array()) throw AccountingError("accounting manifest must be a JSON array");
  std::vector<AccountingInput> out;
  for (const auto& j : doc) {
    AccountingInput in;
    in.corpus = j.at("corpus").get<std::string>();
    in.stage = j.at("stage").get<int>();
    for (const auto& m : j.at("metrics")) in.metrics.push_back(path.parent_path() / m.get<std::string>());
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<AccountingRow> account_all(const std::vector<AccountingInput>& inputs) {
  std::vector<AccountingRow> rows;
  for (const auto& in : inputs) {
    std::vector<MetricsEvent> events;
    for (const auto& p : in.metrics) {
      auto part = read_metrics(p);
      events.insert(events.end(), part.begin(), part.end());
    }
    rows.push_back(account(in.corpus, in.stage, events));
  }
  return rows;
}

}  // namespace verirefine
