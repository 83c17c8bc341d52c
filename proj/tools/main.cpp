#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "verirefine/accounting.hpp"
#include "verirefine/corpus.hpp"
#include "verirefine/instrumentation.hpp"
#include "verirefine/pipeline.hpp"
#include "verirefine/project.hpp"
#include "verirefine/split.hpp"

namespace fs = std::filesystem;
using namespace verirefine;

namespace {

enum Exit : int {
  ok = 0,
  failed = 1,
  usage = 2,
  io = 3,
  dataset = 4,
  verifier_launch = 5,
  checkpoint_corrupt = 6,
};

fs::path data_root() {
  if (const char* root = std::getenv("VERIREFINE_ROOT"); root && *root) return fs::path(root) / "data";
  return VERIREFINE_DATA_DIR;
}

struct RunFlags {
  std::string config;
  std::string dataset;
  std::string project;
  std::string lemma_map;
  std::string adapter;
  std::string run_id;
  int stage = -1;
  int budget_k = -1;
  int budget_t = -1;
  int budget_r = -1;
  int budget_c = -1;
  bool resume = false;
  bool force = false;
  std::int64_t stop_after = -1;
  std::int64_t crash_after = -1;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_stage) {
  cmd->add_option("--config", f.config, "RunConfig JSON file");
  cmd->add_option("--dataset", f.dataset, "Dataset JSON");
  cmd->add_option("--project", f.project, "Project root");
  cmd->add_option("--lemma-map", f.lemma_map, "Lemma map JSON");
  if (with_stage) cmd->add_option("--stage", f.stage, "1, 2, or 0 for both")->check(CLI::Range(0, 2));
  cmd->add_option("--budget-k", f.budget_k, "Repair attempts per statement")->check(CLI::PositiveNumber);
  cmd->add_option("--budget-t", f.budget_t, "Verifier calls per proof target")->check(CLI::PositiveNumber);
  cmd->add_option("--budget-r", f.budget_r, "Attempts per round")->check(CLI::PositiveNumber);
  cmd->add_option("--budget-c", f.budget_c, "Rounds")->check(CLI::PositiveNumber);
  cmd->add_option("--adapter", f.adapter, "Verifier adapter")->check(CLI::IsMember({"external", "simulated"}));
  cmd->add_option("--run-id", f.run_id, "Run id");
  cmd->add_flag("--resume", f.resume, "Continue from the stage checkpoint");
  cmd->add_flag("--force", f.force, "Treat a corrupt checkpoint as absent");
  cmd->add_option("--stop-after", f.stop_after, "Stop cleanly after N items");
  cmd->add_option("--crash-after", f.crash_after)->group("");
}

RunConfig build_config(const RunFlags& f) {
  RunConfig c;
  if (!f.config.empty()) c = load_run_config(f.config);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.project.empty()) c.project = f.project;
  if (!f.lemma_map.empty()) c.lemma_map = fs::path(f.lemma_map);
  if (!f.adapter.empty()) c.adapter = adapter_from_string(f.adapter);
  if (!f.run_id.empty()) c.run_id = f.run_id;
  if (f.stage >= 0) c.stage = f.stage;
  if (f.budget_k > 0) c.budget_k = f.budget_k;
  if (f.budget_t > 0) c.budget_t = f.budget_t;
  if (f.budget_r > 0) c.budget_r = f.budget_r;
  if (f.budget_c > 0) c.budget_c = f.budget_c;
  if (f.force) c.force = true;
  c.stop_after = f.stop_after;
  c.crash_after = f.crash_after;
  validate_config(c);
  return c;
}

std::string pct(const std::optional<double>& v) { return v ? fixed2(*v) : "n/a"; }

void print_outcome(const StageOutcome& o) {
  std::cout << "stage " << o.stage << " run " << o.run_id << ": ";
  if (o.stage == 1) {
    std::cout << o.quality.compiled << "/" << o.quality.blocks << " compiled, SCC " << pct(o.quality.scc())
              << ", ARR " << (o.quality.arr() ? fixed2(*o.quality.arr()) : "n/a");
  } else {
    std::cout << o.quality.closed << "/" << o.quality.evaluated << " closed, PSR " << pct(o.quality.psr());
  }
  std::cout << ", PB " << (o.pb ? (*o.pb ? "true" : "false") : "n/a");
  if (o.stopped_early) std::cout << " (stopped early)";
  std::cout << "\n";
}

int run_stages(const RunConfig& config, int stage, bool resume) {
  const auto paths = state_paths(config.project);
  auto check_fresh = [&](int s) {
    if (!resume && fs::exists(paths.checkpoint(s)))
      throw ConfigError("stage " + std::to_string(s) + " checkpoint exists; pass --resume to continue it");
  };
  std::vector<StageOutcome> outcomes;
  if (stage == 0) {
    check_fresh(1);
    check_fresh(2);
    auto c = config;
    c.stage = 0;
    outcomes = run_pipeline(c);
  } else {
    check_fresh(stage);
    outcomes.push_back(run_stage(config, stage));
  }
  for (const auto& o : outcomes) print_outcome(o);
  return ok;
}

std::vector<double> alphas_or_default(const std::vector<double>& given) {
  return given.empty() ? kDefaultAlphas : given;
}

void copy_tree(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

/// Runs both stages on a copy of the toy project and checks the accounting
/// replay against what the run reported.
int simulate(const fs::path& dir, bool keep) {
  const auto toy = data_root() / "toy";
  if (!fs::exists(toy / "config.json")) throw ProjectError("toy corpus not found under " + toy.string());
  const auto work = dir.empty() ? fs::temp_directory_path() / ("verirefine-sim-" + std::to_string(::getpid())) : dir;
  if (fs::exists(work / "project")) throw ConfigError(work.string() + " already holds a project");
  copy_tree(toy / "project", work / "project");

  auto config = load_run_config(toy / "config.json");
  config.project = work / "project";
  config.stage = 0;
  config.run_id = std::nullopt;
  const auto outcomes = run_pipeline(config);
  for (const auto& o : outcomes) print_outcome(o);

  const auto events = read_metrics(state_paths(config.project).metrics);
  bool consistent = outcomes.size() == 2;
  for (const auto& o : outcomes) {
    std::vector<MetricsEvent> mine;
    for (const auto& e : events)
      if (e.run_id == o.run_id) mine.push_back(e);
    const auto row = account(config.corpus, o.stage, mine);
    const auto& c = o.summary.counters;
    const bool same = row.verifier_calls == c.at("total_lean_checks") &&
                      row.oracle_calls == c.at("total_oracle_calls") && row.quality.pb == o.pb &&
                      row.quality.compiled == o.quality.compiled && row.quality.blocks == o.quality.blocks &&
                      row.quality.total_b_attempts == o.quality.total_b_attempts &&
                      row.quality.closed == o.quality.closed && row.quality.evaluated == o.quality.evaluated;
    std::cout << "replay stage " << o.stage << ": V=" << row.verifier_calls << " Q=" << row.oracle_calls
              << (same ? " matches" : " DIFFERS") << "\n";
    consistent = consistent && same;
  }
  std::cout << report_csv([&] {
    std::vector<AccountingRow> rows;
    for (const auto& o : outcomes) {
      std::vector<MetricsEvent> mine;
      for (const auto& e : events)
        if (e.run_id == o.run_id) mine.push_back(e);
      rows.push_back(account(config.corpus, o.stage, mine));
    }
    return rows;
  }());
  bool good = consistent;
  for (const auto& o : outcomes) {
    good = good && o.pb == true && !o.stopped_early;
    if (o.stage == 1) good = good && o.quality.compiled == o.quality.blocks;
    if (o.stage == 2) good = good && o.quality.closed == o.quality.evaluated;
  }
  if (!keep && dir.empty()) fs::remove_all(work);
  else std::cout << "project kept at " << (work / "project").string() << "\n";
  return good ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifier-certified refinement of formal statements and proofs"};
  app.require_subcommand(1);

  RunFlags stage1_flags, stage2_flags, resume_flags;
  auto* stage1 = app.add_subcommand("stage1", "Formalize statements");
  add_run_flags(stage1, stage1_flags, false);
  auto* stage2 = app.add_subcommand("stage2", "Close proof holes");
  add_run_flags(stage2, stage2_flags, false);
  auto* resume = app.add_subcommand("resume", "Continue the configured stages from their checkpoints");
  add_run_flags(resume, resume_flags, true);

  std::string validate_dataset, validate_lemma_map;
  auto* validate = app.add_subcommand("validate", "Check a dataset and optional lemma map");
  validate->add_option("--dataset", validate_dataset, "Dataset JSON")->required();
  validate->add_option("--lemma-map", validate_lemma_map, "Lemma map JSON");

  std::string split_project, split_file;
  int split_threshold = 1200;
  bool split_dry = false;
  auto* split = app.add_subcommand("split", "Split a large file at declaration boundaries");
  split->add_option("--project", split_project, "Project root")->required();
  split->add_option("--file", split_file, "File relative to the project root")->required();
  split->add_option("--threshold", split_threshold, "Maximum lines per part")->check(CLI::PositiveNumber);
  split->add_flag("--dry-run", split_dry, "Print the plan only");

  std::string backfill_logs, backfill_metrics;
  auto* backfill = app.add_subcommand("backfill", "Recover token usage from per-call logs");
  backfill->add_option("--logs", backfill_logs, "Per-call log directory")->required();
  backfill->add_option("--metrics", backfill_metrics, "Metrics JSONL to append to")->required();
  backfill->add_option("--run-id", resume_flags.run_id, "Run id of the backfill run");

  std::vector<std::string> account_metrics;
  std::string account_manifest, account_corpus = "corpus";
  int account_stage = 1;
  std::vector<double> alphas;
  auto* account_cmd = app.add_subcommand("account", "Accounting totals as JSON");
  account_cmd->add_option("--metrics", account_metrics, "Metrics JSONL files (one corpus/stage)");
  account_cmd->add_option("--corpus", account_corpus, "Corpus name");
  account_cmd->add_option("--stage", account_stage, "Stage of the metrics files")->check(CLI::Range(1, 2));
  account_cmd->add_option("--manifest", account_manifest, "Accounting manifest");
  account_cmd->add_option("--alpha", alphas, "Oracle weight (repeatable)")->check(CLI::Range(0.0, 1.0));

  std::string report_manifest, report_out, report_problems;
  auto* report = app.add_subcommand("report", "Accounting report as CSV");
  report->add_option("--manifest", report_manifest, "Accounting manifest")->required();
  report->add_option("--out", report_out, "Output file (default stdout)");
  report->add_option("--problems", report_problems, "Also write per-problem rows of the stage-2 inputs here");
  report->add_option("--alpha", alphas, "Oracle weight (repeatable)")->check(CLI::Range(0.0, 1.0));

  std::string sim_dir;
  bool sim_keep = false;
  auto* sim = app.add_subcommand("simulate", "Run the bundled toy corpus end to end with scripted operators");
  sim->add_option("--dir", sim_dir, "Working directory (default: a temporary one)");
  sim->add_flag("--keep", sim_keep, "Keep the temporary project");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  try {
    if (*stage1) return run_stages(build_config(stage1_flags), 1, stage1_flags.resume);
    if (*stage2) return run_stages(build_config(stage2_flags), 2, stage2_flags.resume);
    if (*resume) {
      const auto c = build_config(resume_flags);
      return run_stages(c, c.stage, true);
    }
    if (*validate) {
      const auto records = load_dataset(validate_dataset);
      std::size_t targets = 0;
      for (const auto& r : records) targets += is_proof_target(r) ? 1 : 0;
      std::cout << records.size() << " records, " << targets << " proof targets\n";
      if (!validate_lemma_map.empty())
        std::cout << load_lemma_map(validate_lemma_map).size() << " lemma map entries\n";
      return ok;
    }
    if (*split) {
      auto project = Project::on_disk(split_project);
      const auto plan = plan_split(split_file, project.read(split_file), split_threshold);
      if (!plan) {
        std::cerr << "cannot split " << split_file << " at declaration boundaries\n";
        return failed;
      }
      for (const auto& p : plan->parts)
        std::cout << p.file << ": " << p.declarations.size() << " declarations\n";
      if (!split_dry) apply_split(project, split_file, *plan);
      return ok;
    }
    if (*backfill) {
      const auto result = token_backfill(backfill_logs);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      MetricsLog log(backfill_metrics);
      log.set_run_id(resume_flags.run_id.empty() ? make_run_id("verirefine", "backfill") : resume_flags.run_id);
      emit_backfill(log, result);
      std::int64_t total = 0;
      for (const auto& t : result.tasks) total += t.tokens_used_total;
      std::cout << result.tasks.size() << " tasks, " << total << " tokens\n";
      return ok;
    }
    if (*account_cmd) {
      std::vector<AccountingInput> inputs;
      if (!account_manifest.empty()) inputs = load_accounting_manifest(account_manifest);
      if (!account_metrics.empty()) {
        AccountingInput in{account_corpus, account_stage, {}};
        for (const auto& m : account_metrics) in.metrics.emplace_back(m);
        inputs.push_back(std::move(in));
      }
      if (inputs.empty()) throw ConfigError("account needs --metrics or --manifest");
      auto rows = nlohmann::json::array();
      for (const auto& r : account_all(inputs)) rows.push_back(row_json(r, alphas_or_default(alphas)));
      std::cout << rows.dump(2) << "\n";
      return ok;
    }
    if (*report) {
      const auto inputs = load_accounting_manifest(report_manifest);
      const auto csv = report_csv(account_all(inputs), alphas_or_default(alphas));
      if (report_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(report_out, std::ios::binary);
        out << csv;
        if (!out) throw ProjectError("cannot write " + report_out);
      }
      if (!report_problems.empty()) {
        std::vector<MetricsEvent> events;
        for (const auto& in : inputs) {
          if (in.stage != 2) continue;
          for (const auto& m : in.metrics) {
            auto ev = read_metrics(m);
            events.insert(events.end(), ev.begin(), ev.end());
          }
        }
        std::ofstream out(report_problems, std::ios::binary);
        out << problems_csv(events);
        if (!out) throw ProjectError("cannot write " + report_problems);
      }
      return ok;
    }
    if (*sim) return simulate(sim_dir, sim_keep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return usage;
  } catch (const DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return dataset;
  } catch (const VerificationLaunchError& e) {
    std::cerr << "verifier launch failed: " << e.what() << "\n";
    return verifier_launch;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << " (use --force to start over)\n";
    return checkpoint_corrupt;
  } catch (const ProjectError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return io;
  } catch (const InstrumentationError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return io;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return io;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failed;
  }
  return ok;
}
