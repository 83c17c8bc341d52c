// Acceptance checks: prints one PASS/FAIL line per criterion, exits non-zero
// when any criterion fails.

#include <cctype>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "test_env.hpp"
#include "verirefine/accounting.hpp"
#include "verirefine/lexer.hpp"
#include "verirefine/pipeline.hpp"
#include "verirefine/scripted_operators.hpp"
#include "verirefine/stage1.hpp"
#include "verirefine/stage2.hpp"
#include "verirefine/transcript.hpp"

namespace fs = std::filesystem;
using namespace verirefine;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Signature changes seen by the independent extractor in accepted proof patches.
struct SignatureWatch {
  std::int64_t proof_patches = 0;
  std::int64_t changes = 0;

  void observe(const AttemptTrace& t) {
    if (t.stage != Stage::proofs || !t.outcome.accepted) return;
    ++proof_patches;
    if (oracle::signatures(t.snapshot.bytes) != oracle::signatures(t.committed_bytes)) ++changes;
  }
};

SignatureWatch g_signatures;

// ---------------------------------------------------------------------------
// Randomized scripted runs: acceptance and rollback fidelity.

struct FidelityStats {
  int runs = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t acceptance_violations = 0;
  std::int64_t rollback_violations = 0;
  std::vector<std::string> examples;
  double seconds = 0;
};

void mutate_draft(DatasetRecord& r, std::mt19937_64& rng) {
  auto& lean = r.extras["lean"];
  std::string type = lean.value("draft_type", lean.value("type", std::string("True")));
  std::vector<std::size_t> letters;
  for (std::size_t i = 0; i < type.size(); ++i)
    if (std::isalpha(static_cast<unsigned char>(type[i]))) letters.push_back(i);
  if (letters.empty()) return;
  type[letters[rng() % letters.size()]] = static_cast<char>('a' + rng() % 26);
  lean["draft_type"] = type;
}

FidelityStats randomized_runs(int count) {
  FidelityStats st;
  const auto t0 = Clock::now();
  const auto all = testenv::toy_records();
  const auto lemma_map = testenv::toy_lemma_map();
  const std::vector<AdversaryMode> modes = {AdversaryMode::noop, AdversaryMode::failing, AdversaryMode::breaking,
                                            AdversaryMode::garbage, AdversaryMode::foreign_file};
  const std::vector<OperatorKind> kinds = {OperatorKind::gen_skeleton,        OperatorKind::repair_patch,
                                           OperatorKind::fix_compile_error,   OperatorKind::plan,
                                           OperatorKind::replan,              OperatorKind::propose_proof_patch};
  for (int seed = 0; seed < count; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919 + 17);
    std::vector<DatasetRecord> records;
    for (const auto& r : all)
      if (rng() % 100 < 30) records.push_back(r);
    if (records.size() < 3) records.assign(all.begin(), all.begin() + 3);
    for (auto& r : records)
      if (rng() % 100 < 30) mutate_draft(r, rng);

    testenv::Engine eng(testenv::toy_memory_project(), false);
    bind_scripted(eng.operators, &eng.project);
    for (auto kind : kinds) {
      const auto roll = rng() % 100;
      if (roll < 35) eng.operators.bind(kind, std::make_shared<RandomOperator>(rng()));
      else if (roll < 50) eng.operators.bind(kind, std::make_shared<AdversarialOperator>(modes[rng() % modes.size()]));
    }

    SimulatedVerifier fresh;
    eng.kernel.set_observer([&](const AttemptTrace& t) {
      g_signatures.observe(t);
      auto note = [&](const std::string& what) {
        if (st.examples.size() < 5) st.examples.push_back("seed " + std::to_string(seed) + ": " + what);
      };
      if (!t.outcome.accepted) {
        ++st.rejected;
        const bool exists = eng.project.exists(t.file);
        if (exists != t.snapshot.existed || t.committed_bytes != t.snapshot.bytes ||
            fingerprint(t.committed_bytes) != t.snapshot.fingerprint) {
          ++st.rollback_violations;
          note("rejected attempt changed " + t.file);
        }
        return;
      }
      ++st.accepted;
      const auto& before = t.outcome.before;
      const auto& after = t.outcome.after;
      bool ok = prec(after, before) && after.primary <= before.primary;
      // Recheck both states from scratch.
      auto copy = eng.project;
      const auto now = fresh.check_file(copy, t.file);
      if (t.snapshot.existed) copy.write(t.file, t.snapshot.bytes);
      else copy.remove(t.file);
      const auto then = t.snapshot.existed ? fresh.check_file(copy, t.file) : DiagnosticSet{};
      ok = ok && err_count(now) == after.primary && err_count(then) == before.primary;
      if (t.stage == Stage::proofs) {
        ok = ok && oracle::count_holes(t.committed_bytes) == after.secondary &&
             oracle::count_holes(t.snapshot.bytes) == before.secondary;
      } else {
        ok = ok && err_count(localize(now, t.scope)) == after.secondary;
      }
      if (!ok) {
        ++st.acceptance_violations;
        note("accepted (" + std::to_string(before.primary) + "," + std::to_string(before.secondary) + ") -> (" +
             std::to_string(after.primary) + "," + std::to_string(after.secondary) + ") in " + t.file);
      }
    });

    Stage1Config s1;
    s1.header_imports = {"Mathlib", "Toy.Basic"};
    run_stage1(records, eng.ctx, s1);
    Stage2Config s2;
    s2.retries = 2;
    s2.rounds = 2;
    s2.max_calls = 6;
    run_stage2(proof_tasks(records, lemma_map, s2), eng.ctx, s2);
    ++st.runs;
  }
  st.seconds = seconds_since(t0);
  return st;
}

// ---------------------------------------------------------------------------
// Budgets under adversarial operators.

struct ItemCalls {
  std::int64_t lean_checks = 0;
  std::int64_t proposals = 0;
};

// Per item index: lean_check and proof-proposal events between item_start and item_end.
std::map<std::int64_t, ItemCalls> per_item_calls(const std::vector<MetricsEvent>& events) {
  std::map<std::int64_t, ItemCalls> out;
  std::optional<std::int64_t> current;
  for (const auto& e : events) {
    if (e.event == events::item_start) current = e.data.value("index", std::int64_t{-1});
    else if (e.event == events::item_end) current.reset();
    else if (current && e.event == events::lean_check) ++out[*current].lean_checks;
    else if (current && e.event == events::agent_result && e.data.value("kind", "") == "propose_proof_patch")
      ++out[*current].proposals;
  }
  return out;
}

Verdict budget_bounds() {
  const auto records = testenv::toy_records();
  const auto lemma_map = testenv::toy_lemma_map();
  std::int64_t violations = 0, items = 0;
  std::int64_t max_s1 = 0, max_s2_calls = 0, max_s2_attempts = 0;
  std::ostringstream why;

  struct Adversary {
    std::string name;
    std::function<std::shared_ptr<Operator>()> make;
  };
  const std::vector<Adversary> adversaries = {
      {"failing", [] { return std::make_shared<AdversarialOperator>(AdversaryMode::failing); }},
      {"noop", [] { return std::make_shared<AdversarialOperator>(AdversaryMode::noop); }},
      {"breaking", [] { return std::make_shared<AdversarialOperator>(AdversaryMode::breaking); }},
      {"garbage", [] { return std::make_shared<AdversarialOperator>(AdversaryMode::garbage); }},
      {"foreign_file", [] { return std::make_shared<AdversarialOperator>(AdversaryMode::foreign_file); }},
      {"random", [] { return std::make_shared<RandomOperator>(99); }},
  };

  Stage1Config s1;
  s1.header_imports = {"Mathlib", "Toy.Basic"};
  // Statement stage: scripted skeletons so repairs are needed, adversarial repairs.
  for (const auto& adv : adversaries) {
    testenv::Engine eng(testenv::toy_memory_project());
    bind_scripted(eng.operators, &eng.project);
    eng.operators.bind(OperatorKind::repair_patch, adv.make());
    auto r = run_stage1(records, eng.ctx, s1);
    const auto calls = per_item_calls(eng.metrics.events());
    for (const auto& it : r.items) {
      ++items;
      const auto observed = calls.count(it.index) ? calls.at(it.index).lean_checks : 0;
      max_s1 = std::max(max_s1, observed);
      if (observed > 1 + s1.max_repairs || it.verifier_calls > 1 + s1.max_repairs || it.b_attempts > s1.max_repairs) {
        ++violations;
        why << " stage1/" << adv.name << "/" << it.index;
      }
    }
  }

  // Proof stage: start from compiled statements, then adversarial proof operators.
  testenv::Engine base(testenv::toy_memory_project(), false);
  bind_scripted(base.operators, &base.project);
  run_stage1(records, base.ctx, s1);

  auto proof_run = [&](const std::string& name, const Stage2Config& s2, std::function<std::shared_ptr<Operator>()> make,
                       bool inject_error) {
    auto project = base.project;
    if (inject_error) {
      const FileId f = "Chapters/Chap01/section01.lean";
      project.write(f, project.read(f) + "\ntheorem broken_decl : Undefined := by sorry\n");
    }
    testenv::Engine eng(std::move(project));
    bind_scripted(eng.operators, &eng.project);
    eng.operators.bind(OperatorKind::propose_proof_patch, make());
    eng.operators.bind(OperatorKind::fix_compile_error, make());
    auto r = run_stage2(proof_tasks(records, lemma_map, s2), eng.ctx, s2);
    const auto calls = per_item_calls(eng.metrics.events());
    for (const auto& it : r.items) {
      ++items;
      const auto c = calls.count(it.index) ? calls.at(it.index) : ItemCalls{};
      max_s2_calls = std::max(max_s2_calls, c.lean_checks);
      max_s2_attempts = std::max(max_s2_attempts, c.proposals);
      if (c.proposals > s2.attempt_bound() || it.attempts > s2.attempt_bound() || c.lean_checks > s2.max_calls ||
          it.verifier_calls > s2.max_calls) {
        ++violations;
        why << " stage2/" << name << "/" << it.index;
      }
    }
  };
  Stage2Config defaults;
  for (const auto& adv : adversaries) proof_run(adv.name, defaults, adv.make, false);
  proof_run("breaking+error", defaults, adversaries[2].make, true);
  Stage2Config tight;
  tight.max_calls = 7;
  proof_run("failing/T=7", tight, adversaries[0].make, false);
  proof_run("noop/T=7+error", tight, adversaries[1].make, true);

  Verdict v;
  v.pass = violations == 0;
  v.detail = std::to_string(items) + " items; max stage-1 calls " + std::to_string(max_s1) + " <= " +
             std::to_string(1 + s1.max_repairs) + ", max stage-2 proposals " + std::to_string(max_s2_attempts) +
             " <= " + std::to_string(defaults.attempt_bound()) + ", max stage-2 calls " +
             std::to_string(max_s2_calls) + " <= " + std::to_string(defaults.max_calls) + "; " +
             std::to_string(violations) + " violations" + why.str();
  return v;
}

// ---------------------------------------------------------------------------
// Accounting replay and metric definitions on the shipped fixtures.

std::map<std::pair<std::string, int>, AccountingRow> fixture_rows() {
  std::map<std::pair<std::string, int>, AccountingRow> out;
  for (auto& r : account_all(load_accounting_manifest(testenv::fixtures_dir() / "manifest.json")))
    out[{r.corpus, r.stage}] = r;
  return out;
}

bool near(std::optional<double> v, double want, double tol = 0.005) { return v && std::fabs(*v - want) <= tol + 1e-12; }

Verdict accounting_replay() {
  const auto rows = fixture_rows();
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const auto& ra1 = rows.at({"real_analysis", 1});
  const auto& ra2 = rows.at({"real_analysis", 2});
  const auto& fate = rows.at({"fate_h_auto", 2});
  check(ra1.verifier_calls == 592 && ra1.targets == 416 && ra1.quality.total_b_attempts == 176,
        "legacy V=" + std::to_string(ra1.verifier_calls));
  const auto v2 = read_metrics(testenv::fixtures_dir() / "metrics/real_analysis_stage1_v2.jsonl");
  const auto v2_ids = run_ids_of(v2);
  check(count_verifier_calls(v2, {v2_ids.begin(), v2_ids.end()}) == 592, "explicit lean_check count");
  check(ra2.verifier_calls == 628 && ra2.solved == 339, "stage-2 V");
  check(near(ra2.calls_per_solved(), 1.85) && fixed2(*ra2.calls_per_solved()) == "1.85", "calls/solved");
  check(ra2.oracle_calls == 1263, "Q=" + std::to_string(ra2.oracle_calls));
  check(near(ra2.calls_per_target(), 3.73) && fixed2(*ra2.calls_per_target()) == "3.73", "calls/target");
  check(fixed2(cost_alpha(ra2.verifier_calls, ra2.oracle_calls, 0.10)) == "754.30", "Cost_0.10");
  check(fixed2(cost_alpha(ra2.verifier_calls, ra2.oracle_calls, 0.25)) == "943.75", "Cost_0.25");
  check(fate.verifier_calls == 283 && fate.oracle_calls == 339 &&
            fixed2(cost_alpha(fate.verifier_calls, fate.oracle_calls, 0.25)) == "367.75",
        "benchmark Cost_0.25");
  Verdict v;
  v.pass = failures.empty();
  v.detail = "V=" + std::to_string(ra1.verifier_calls) + " (" + std::to_string(ra1.targets) + "+" +
             std::to_string(ra1.quality.total_b_attempts) + "), calls/solved " + fixed2(*ra2.calls_per_solved()) +
             ", Q=" + std::to_string(ra2.oracle_calls) + ", calls/target " + fixed2(*ra2.calls_per_target()) +
             ", Cost_0.10 " + fixed2(cost_alpha(628, 1263, 0.10)) + ", Cost_0.25 " +
             fixed2(cost_alpha(628, 1263, 0.25)) + ", " + fixed2(cost_alpha(283, 339, 0.25));
  for (const auto& f : failures) v.detail += "; mismatch: " + f;
  return v;
}

Verdict metric_definitions() {
  const auto rows = fixture_rows();
  const std::vector<std::pair<std::string, double>> arr_want = {
      {"real_analysis", 0.42}, {"convex_analysis", 0.08}, {"article", 0.20}};
  std::vector<std::string> failures;
  std::string detail;
  for (const auto& [corpus, want] : arr_want) {
    const auto& r = rows.at({corpus, 1});
    const auto arr = r.quality.arr();
    detail += corpus + " SCC " + fixed2(r.quality.scc().value_or(-1)) + " ARR " +
              (arr ? fmt(*arr, 4) : "n/a") + "; ";
    if (!near(r.quality.scc(), 100.0)) failures.push_back(corpus + " SCC");
    if (!near(arr, want))
      failures.push_back(corpus + " ARR " + std::to_string(r.quality.total_b_attempts) + "/" +
                         std::to_string(r.quality.compiled) + " = " + (arr ? fmt(*arr, 4) : "n/a") +
                         " is not within 0.005 of " + fmt(want));
  }
  for (const auto& corpus : {"real_analysis", "convex_analysis", "article"}) {
    const auto& r = rows.at({corpus, 2});
    detail += std::string(corpus) + " PSR " + (r.quality.psr() ? fixed2(*r.quality.psr()) : "n/a") + "; ";
    if (!near(r.quality.psr(), 100.0)) failures.push_back(std::string(corpus) + " PSR");
  }
  // An empty evaluation set has no PSR.
  if (QualityMetrics{}.psr()) failures.push_back("empty PSR is defined");
  Verdict v;
  v.pass = failures.empty();
  v.detail = detail + "empty set PSR n/a";
  for (const auto& f : failures) v.detail += "; FAIL " + f;
  return v;
}

// ---------------------------------------------------------------------------

Verdict hole_oracle(int files) {
  std::mt19937_64 rng(4242);
  int disagreements = 0;
  std::size_t holes = 0;
  std::string example;
  for (int i = 0; i < files; ++i) {
    const auto text = oracle::random_source(rng);
    const auto want = oracle::count_holes(text);
    holes += want;
    if (count_holes(text) != want || find_holes(text).size() != want) {
      if (disagreements++ == 0) example = " first: \"" + text + "\"";
    }
  }
  return {disagreements == 0, std::to_string(files) + " random files, " + std::to_string(holes) + " holes, " +
                                  std::to_string(disagreements) + " disagreements" + example};
}

Verdict token_backfill_check() {
  const auto parsed = parse_token_footer("tokens used 12,345");
  const auto result = token_backfill(testenv::fixtures_dir() / "logs/backfill_example");
  bool ok = parsed == 12345 && result.tasks.size() == 1;
  std::string detail = "footer -> " + (parsed ? std::to_string(*parsed) : std::string("none"));
  if (result.tasks.size() == 1) {
    const auto& t = result.tasks[0];
    const auto a = t.tokens_used_by_agent.count("a") ? t.tokens_used_by_agent.at("a") : -1;
    const auto c = t.tokens_used_by_agent.count("c") ? t.tokens_used_by_agent.at("c") : -1;
    ok = ok && t.tokens_used_total == 65831 && a == 34170 && c == 31661 && t.log_file_count == 2;
    detail += ", task " + t.task + " total " + std::to_string(t.tokens_used_total) + " = " + std::to_string(a) +
              " + " + std::to_string(c) + " over " + std::to_string(t.log_file_count) + " logs";
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// Toy pipeline, resume, signatures.

struct Totals {
  std::map<std::string, std::int64_t> counts;
  bool operator==(const Totals&) const = default;
};

Totals totals_of(const std::vector<MetricsEvent>& events) {
  Totals t;
  for (const auto& e : events) {
    if (e.event == events::lean_check) ++t.counts["lean_check"];
    if (e.event == events::agent_result) ++t.counts["agent_result:" + e.data.value("kind", std::string())];
    if (e.event == events::patch_result)
      ++t.counts[std::string("patch_result:") + (e.data.value("accepted", false) ? "accepted" : "rejected")];
    if (e.event == events::item_end) {
      const auto stage = std::to_string(e.data.value("stage", 0));
      ++t.counts["item_end:" + stage + ":" + e.data.value("status", std::string())];
      t.counts["b_attempts"] += e.data.value("b_attempts", std::int64_t{0});
      t.counts["attempts"] += e.data.value("attempts", std::int64_t{0});
      t.counts["item_verifier_calls:" + stage] += e.data.value("verifier_calls", std::int64_t{0});
    }
  }
  return t;
}

std::string describe(const Totals& t) {
  std::string s;
  for (const auto& [k, v] : t.counts) s += k + "=" + std::to_string(v) + " ";
  return s;
}

bool opt_equal(const std::optional<double>& a, const std::optional<double>& b) {
  if (!a || !b) return !a && !b;
  return fixed2(*a) == fixed2(*b);
}

Verdict end_to_end() {
  testenv::TempDir dir("e2e");
  auto config = testenv::toy_config(dir.path());
  const auto records = load_dataset(config.dataset);
  std::size_t targets = 0;
  for (const auto& r : records) targets += is_proof_target(r) ? 1 : 0;

  const auto t0 = Clock::now();
  const auto outcomes = run_pipeline(config);
  const double secs = seconds_since(t0);

  std::vector<std::string> failures;
  if (records.size() < 20) failures.push_back("fewer than 20 statement items");
  if (targets < 10) failures.push_back("fewer than 10 proof targets");
  if (outcomes.size() != 2) failures.push_back("stage 2 did not run");
  const auto events = read_metrics(state_paths(config.project).metrics);
  std::string detail = std::to_string(records.size()) + " items, " + std::to_string(targets) + " targets";
  for (const auto& o : outcomes) {
    std::vector<MetricsEvent> mine;
    for (const auto& e : events)
      if (e.run_id == o.run_id) mine.push_back(e);
    const auto row = account(config.corpus, o.stage, mine);
    const auto summary = nlohmann::json::parse(read_file(state_paths(config.project).summary(o.stage)));
    if (o.pb != true) failures.push_back("stage " + std::to_string(o.stage) + " PB");
    if (o.stage == 1 && !near(o.quality.scc(), 100.0)) failures.push_back("SCC");
    if (o.stage == 2 && !near(o.quality.psr(), 100.0)) failures.push_back("PSR");
    const bool replay = row.verifier_calls == summary.value("total_lean_checks", -1) &&
                        row.oracle_calls == summary.value("total_oracle_calls", -1) && row.quality.pb == o.pb &&
                        opt_equal(row.quality.scc(), o.quality.scc()) &&
                        opt_equal(row.quality.arr(), o.quality.arr()) &&
                        opt_equal(row.quality.psr(), o.quality.psr()) &&
                        row.quality.blocks == o.quality.blocks && row.quality.compiled == o.quality.compiled &&
                        row.quality.evaluated == o.quality.evaluated && row.quality.closed == o.quality.closed &&
                        (o.stage != 1 || row.quality.total_b_attempts == summary.value("total_b_attempts", -1)) &&
                        (o.stage != 2 || row.solved == summary.value("solved", -1));
    if (!replay) failures.push_back("stage " + std::to_string(o.stage) + " replay differs from the run summary");
    detail += "; stage " + std::to_string(o.stage) + " V=" + std::to_string(row.verifier_calls) +
              " Q=" + std::to_string(row.oracle_calls) + " PB " + (o.pb == true ? "true" : "false") +
              (o.stage == 1 ? " SCC " + fixed2(o.quality.scc().value_or(0)) + " ARR " + fixed2(o.quality.arr().value_or(0))
                            : " PSR " + fixed2(o.quality.psr().value_or(0))) +
              (replay ? " (replayed)" : " (replay mismatch)");
  }
  if (secs >= 30.0) failures.push_back("runtime " + fmt(secs) + " s");
  Verdict v;
  v.pass = failures.empty();
  v.detail = detail + "; " + fmt(secs, 3) + " s";
  for (const auto& f : failures) v.detail += "; FAIL " + f;
  return v;
}

Verdict resume_idempotence() {
  testenv::TempDir base_dir("resume-base");
  auto base = testenv::toy_config(base_dir.path());
  const auto baseline_outcomes = run_pipeline(base);
  const auto want_bytes = testenv::project_bytes(base.project);
  const auto want = totals_of(read_metrics(state_paths(base.project).metrics));
  std::int64_t boundaries = 0;
  for (const auto& o : baseline_outcomes)
    boundaries += static_cast<std::int64_t>(o.stage == 1 ? o.statements.size() : o.proofs.size());

  int killed = 0, mismatched = 0;
  std::string first_issue;
  for (std::int64_t k = 1; k <= boundaries; ++k) {
    testenv::TempDir dir("resume");
    auto config = testenv::toy_config(dir.path());
    std::cout.flush();
    const pid_t pid = fork();
    if (pid == 0) {
      auto crashing = config;
      crashing.crash_after = k;
      try {
        run_pipeline(crashing);
      } catch (...) {
        _exit(3);
      }
      _exit(0);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL) ++killed;
    run_pipeline(config);
    const auto got = totals_of(read_metrics(state_paths(config.project).metrics));
    const bool same = testenv::project_bytes(config.project) == want_bytes && got == want;
    if (!same) {
      ++mismatched;
      if (first_issue.empty())
        first_issue = " first at k=" + std::to_string(k) + ": " + describe(got) + " vs " + describe(want);
    }
  }
  Verdict v;
  v.pass = mismatched == 0 && killed == boundaries;
  v.detail = std::to_string(boundaries) + " kill points, " + std::to_string(killed) + " killed by SIGKILL, " +
             std::to_string(mismatched) + " mismatches in project bytes or event totals" + first_issue;
  return v;
}

Verdict signature_guard_check() {
  // Stage-by-stage run to compare every signature before and after proofs.
  testenv::TempDir dir("sig");
  auto config = testenv::toy_config(dir.path());
  run_stage(config, 1);
  const auto before = testenv::project_bytes(config.project);
  run_stage(config, 2);
  const auto after = testenv::project_bytes(config.project);
  std::int64_t file_changes = 0, decls = 0;
  for (const auto& [file, text] : before) {
    const auto sigs = oracle::signatures(text);
    decls += static_cast<std::int64_t>(sigs.size());
    if (!after.count(file) || oracle::signatures(after.at(file)) != sigs) ++file_changes;
  }

  // The guard itself must veto edits the extractor sees as signature changes.
  const std::string original = "theorem t : 1 = 1 := by sorry\n";
  const std::vector<std::string> edited = {"theorem t : 1 = 2 := by sorry\n", "theorem u : 1 = 1 := by sorry\n",
                                           "theorem t (n : ℕ) : 1 = 1 := by sorry\n", "lemma t : 1 = 1 := by sorry\n"};
  const auto guard = signature_guard();
  int vetoed = 0, seen = 0;
  for (const auto& e : edited) {
    if (oracle::signatures(e) != oracle::signatures(original)) ++seen;
    if (guard(original, e)) ++vetoed;
  }
  const bool body_only_ok = !guard(original, "theorem t : 1 = 1 := by rfl\n");

  Verdict v;
  v.pass = file_changes == 0 && g_signatures.changes == 0 && vetoed == static_cast<int>(edited.size()) &&
           seen == static_cast<int>(edited.size()) && body_only_ok;
  v.detail = std::to_string(g_signatures.changes) + " signature changes over " +
             std::to_string(g_signatures.proof_patches) + " accepted proof patches; " + std::to_string(file_changes) +
             " changed files over " + std::to_string(decls) + " declarations across stage 2; guard vetoes " +
             std::to_string(vetoed) + "/" + std::to_string(edited.size()) + " signature edits" +
             (body_only_ok ? ", allows body edits" : ", BLOCKS body edits");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  int random_runs = 1000;
  if (argc > 1) random_runs = std::stoi(argv[1]);

  std::vector<std::pair<std::string, Verdict>> results;
  auto report = [&](const std::string& name, Verdict v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << name << ": " << v.detail << std::endl;
    results.emplace_back(name, std::move(v));
  };

  const auto fidelity = randomized_runs(random_runs);
  const bool fast = fidelity.seconds < 60.0;
  std::string examples;
  for (const auto& e : fidelity.examples) examples += "; " + e;
  report("acceptance-rule fidelity",
         {fidelity.runs >= 1000 && fidelity.acceptance_violations == 0 && fast,
          std::to_string(fidelity.runs) + " randomized runs, " + std::to_string(fidelity.accepted) +
              " accepted patches, " + std::to_string(fidelity.acceptance_violations) + " violations, " +
              fmt(fidelity.seconds) + " s" + examples});
  report("rollback fidelity", {fidelity.runs >= 1000 && fidelity.rollback_violations == 0,
                               std::to_string(fidelity.rejected) + " rejected attempts, " +
                                   std::to_string(fidelity.rollback_violations) + " byte mismatches"});
  report("budget bounds", budget_bounds());
  report("accounting replay", accounting_replay());
  report("metric definitions", metric_definitions());
  report("hole-count oracle", hole_oracle(1000));
  report("token backfill", token_backfill_check());
  report("end-to-end toy pipeline", end_to_end());
  report("resume idempotence", resume_idempotence());
  report("matched-statement guard", signature_guard_check());

  int failed = 0;
  for (const auto& [_, v] : results) failed += v.pass ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
