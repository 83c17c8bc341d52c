#include <gtest/gtest.h>

#include "test_env.hpp"
#include "verirefine/accounting.hpp"

using namespace verirefine;

namespace {

MetricsEvent ev(std::string run, std::string_view name, nlohmann::json data) {
  return {"2026-01-14T00:00:00+00:00", std::move(run), std::string(name), std::move(data)};
}

std::vector<MetricsEvent> legacy_run(const std::string& run, const std::vector<int>& b) {
  std::vector<MetricsEvent> out{ev(run, events::run_start, {{"pipeline", "skeleton"}})};
  for (std::size_t i = 0; i < b.size(); ++i)
    out.push_back(ev(run, events::item_end,
                     {{"index", i}, {"status", "compiled"}, {"b_attempts", b[i]}}));
  out.push_back(ev(run, events::run_end, nlohmann::json::object()));
  return out;
}

}  // namespace

TEST(Cost, ExactTwoDecimals) {
  EXPECT_EQ(fixed2(cost_alpha(628, 1263, 0.10)), "754.30");
  EXPECT_EQ(fixed2(cost_alpha(628, 1263, 0.25)), "943.75");
  EXPECT_EQ(fixed2(cost_alpha(283, 339, 0.25)), "367.75");
  EXPECT_DOUBLE_EQ(cost_alpha(41, 0, 0.25), 41.0);
  EXPECT_DOUBLE_EQ(cost_alpha(41, 7, 0.0), 41.0);
}

TEST(Cost, Rounding) {
  EXPECT_EQ(fixed2(628.0 / 339.0), "1.85");
  EXPECT_EQ(fixed2(1263.0 / 339.0), "3.73");
  EXPECT_EQ(fixed2(0.125), "0.13");
}

TEST(Accounting, LegacyStatementRunsReconstructCalls) {
  const auto events = legacy_run("r1", {0, 2, 1});
  EXPECT_EQ(schema_version(events, "r1"), 1);
  EXPECT_EQ(count_verifier_calls(events, {"r1"}), 6);
  EXPECT_EQ(count_oracle_calls(events, {"r1"}), 6);
  const auto row = account("c", 1, events);
  EXPECT_EQ(row.verifier_calls, 6);
  EXPECT_EQ(row.quality.total_b_attempts, 3);
  ASSERT_TRUE(row.quality.arr());
  EXPECT_DOUBLE_EQ(*row.quality.arr(), 1.0);
}

TEST(Accounting, ExplicitEventsAreCounted) {
  std::vector<MetricsEvent> events{ev("r2", events::run_start, {{"schema_version", 2}, {"stage", 2}})};
  for (int i = 0; i < 5; ++i) events.push_back(ev("r2", events::lean_check, {{"file", "A.lean"}}));
  for (int i = 0; i < 3; ++i) events.push_back(ev("r2", events::agent_result, {{"kind", "plan"}, {"tokens_used", 10}}));
  EXPECT_EQ(count_verifier_calls(events, {"r2"}), 5);
  EXPECT_EQ(count_oracle_calls(events, {"r2"}), 3);
  const auto row = account("c", 2, events);
  ASSERT_TRUE(row.tokens);
  EXPECT_EQ(*row.tokens, 30);
}

TEST(Accounting, UnknownSchemaIsRejected) {
  std::vector<MetricsEvent> events{ev("r3", events::run_start, {{"schema_version", 7}})};
  EXPECT_THROW(schema_version(events, "r3"), AccountingError);
}

TEST(Accounting, EmptyDenominatorsAreUndefined) {
  QualityMetrics q;
  EXPECT_FALSE(q.scc());
  EXPECT_FALSE(q.arr());
  EXPECT_FALSE(q.psr());
  AccountingRow row;
  EXPECT_FALSE(row.calls_per_solved());
  EXPECT_FALSE(row.calls_per_target());
}

TEST(Accounting, AlreadyClosedHolesAreNotEvaluated) {
  const auto q = compute_metrics({}, {{true, true}, {true, false}, {false, true}}, true);
  EXPECT_EQ(q.evaluated, 2);
  EXPECT_EQ(q.closed, 1);
  ASSERT_TRUE(q.psr());
  EXPECT_DOUBLE_EQ(*q.psr(), 50.0);
}

TEST(Accounting, FixtureReportRows) {
  const auto rows = account_all(load_accounting_manifest(testenv::fixtures_dir() / "manifest.json"));
  const auto csv = report_csv(rows);
  EXPECT_NE(csv.find("real_analysis,1,416,416,592,592,1.42,1.42"), std::string::npos) << csv;
  EXPECT_NE(csv.find("754.30"), std::string::npos);
  EXPECT_NE(csv.find("367.75"), std::string::npos);
}
