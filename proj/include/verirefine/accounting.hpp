#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "verirefine/instrumentation.hpp"

namespace verirefine {

class AccountingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<double> kDefaultAlphas = {0.05, 0.10, 0.25};

/// Run ids in order of first appearance.
std::vector<std::string> run_ids_of(const std::vector<MetricsEvent>& events);

/// Schema version declared by the run's run_start event; 1 when absent.
/// Throws AccountingError for versions this build does not know.
int schema_version(const std::vector<MetricsEvent>& events, const std::string& run_id);

/// Verifier calls over the given runs: lean_check events, or for version-1
/// statement runs |items| + sum of b_attempts.
std::int64_t count_verifier_calls(const std::vector<MetricsEvent>& events, const std::set<std::string>& run_ids);
/// Oracle calls: agent_result events, with the same legacy reconstruction.
std::int64_t count_oracle_calls(const std::vector<MetricsEvent>& events, const std::set<std::string>& run_ids);

double cost_alpha(std::int64_t verifier_calls, std::int64_t oracle_calls, double alpha);

/// Two decimals, half away from zero.
std::string fixed2(double v);

struct QualityMetrics {
  std::optional<bool> pb;
  std::int64_t blocks = 0;
  std::int64_t compiled = 0;
  std::int64_t total_b_attempts = 0;
  std::int64_t evaluated = 0;
  std::int64_t closed = 0;

  /// Percentages; absent on an empty denominator.
  std::optional<double> scc() const;
  std::optional<double> arr() const;
  std::optional<double> psr() const;
};

/// Replays item_end and project_check events of the given runs.
QualityMetrics compute_metrics(const std::vector<MetricsEvent>& events, const std::set<std::string>& run_ids);

/// Item outcome views used when metrics are computed straight from results.
struct BlockOutcome {
  bool compiled = false;
  int b_attempts = 0;
};
struct HoleOutcome {
  bool evaluated = false;
  bool closed = false;
};
QualityMetrics compute_metrics(const std::vector<BlockOutcome>& blocks, const std::vector<HoleOutcome>& holes,
                               std::optional<bool> pb);

struct AccountingRow {
  std::string corpus;
  int stage = 0;
  std::int64_t targets = 0;
  std::int64_t solved = 0;
  std::int64_t verifier_calls = 0;
  std::int64_t oracle_calls = 0;
  std::optional<std::int64_t> tokens;
  QualityMetrics quality;

  std::optional<double> calls_per_solved() const;
  std::optional<double> calls_per_target() const;
  std::optional<double> tokens_per_solved() const;
};

nlohmann::json row_json(const AccountingRow& row, const std::vector<double>& alphas = kDefaultAlphas);

/// Aggregates every run in `events` (run-id union, no deduplication).
/// Tokens come from task_tokens events when present, else from the
/// tokens_used fields of agent_result events.
AccountingRow account(const std::string& corpus, int stage, const std::vector<MetricsEvent>& events);

std::string report_csv(const std::vector<AccountingRow>& rows, const std::vector<double>& alphas = kDefaultAlphas);

/// Per-problem rows for a proof stage: index, label, status, attempts,
/// verifier calls, length proxy (non-empty proof lines), outcome category.
std::string problems_csv(const std::vector<MetricsEvent>& events);

struct AccountingInput {
  std::string corpus;
  int stage = 0;
  std::vector<std::filesystem::path> metrics;
};

/// Manifest: [{"corpus": ..., "stage": 1|2, "metrics": [paths relative to the manifest]}].
std::vector<AccountingInput> load_accounting_manifest(const std::filesystem::path& path);
std::vector<AccountingRow> account_all(const std::vector<AccountingInput>& inputs);

}  // namespace verirefine
