#include "verirefine/pipeline.hpp"

#include <chrono>
#include <csignal>

#include "verirefine/external_operator.hpp"
#include "verirefine/external_verifier.hpp"
#include "verirefine/scripted_operators.hpp"
#include "verirefine/sim_verifier.hpp"
#include "verirefine/transcript.hpp"

namespace verirefine {

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"corpus", c.corpus},
       {"dataset", c.dataset.string()},
       {"project", c.project.string()},
       {"stage", c.stage},
       {"budget_k", c.budget_k},
       {"budget_t", c.budget_t},
       {"budget_r", c.budget_r},
       {"budget_c", c.budget_c},
       {"split_threshold", c.split_threshold},
       {"goal_queries", c.goal_queries},
       {"header_imports", c.header_imports},
       {"adapter", to_string(c.adapter)},
       {"verifier_command", c.verifier_command},
       {"toolchain_id", c.toolchain_id},
       {"dependency_revision", c.dependency_revision},
       {"verifier_timeout_s", c.verifier_timeout_s},
       {"operators", c.operators},
       {"operator_commands", c.operator_commands},
       {"operator_timeout_s", c.operator_timeout_s}};
  if (c.lemma_map) j["lemma_map"] = c.lemma_map->string();
  if (c.run_id) j["run_id"] = *c.run_id;
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "corpus",       "dataset",          "project",      "lemma_map",          "stage",
      "budget_k",     "budget_t",         "budget_r",     "budget_c",           "split_threshold",
      "goal_queries", "header_imports", "adapter",          "verifier_command", "toolchain_id",   "dependency_revision",
      "verifier_timeout_s", "operators",  "operator_commands", "operator_timeout_s", "run_id"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    c.corpus = j.value("corpus", c.corpus);
    if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
    if (j.contains("project")) c.project = j["project"].get<std::string>();
    if (j.contains("lemma_map") && !j["lemma_map"].is_null()) c.lemma_map = j["lemma_map"].get<std::string>();
    c.stage = j.value("stage", c.stage);
    c.budget_k = j.value("budget_k", c.budget_k);
    c.budget_t = j.value("budget_t", c.budget_t);
    c.budget_r = j.value("budget_r", c.budget_r);
    c.budget_c = j.value("budget_c", c.budget_c);
    c.split_threshold = j.value("split_threshold", c.split_threshold);
    c.goal_queries = j.value("goal_queries", c.goal_queries);
    if (j.contains("header_imports")) c.header_imports = j["header_imports"].get<std::vector<std::string>>();
    if (j.contains("adapter")) c.adapter = adapter_from_string(j["adapter"].get<std::string>());
    c.verifier_command = j.value("verifier_command", c.verifier_command);
    c.toolchain_id = j.value("toolchain_id", c.toolchain_id);
    c.dependency_revision = j.value("dependency_revision", c.dependency_revision);
    c.verifier_timeout_s = j.value("verifier_timeout_s", c.verifier_timeout_s);
    c.operators = j.value("operators", c.operators);
    if (j.contains("operator_commands")) {
      c.operator_commands = j["operator_commands"].get<std::map<std::string, std::string>>();
    }
    c.operator_timeout_s = j.value("operator_timeout_s", c.operator_timeout_s);
    if (j.contains("run_id") && !j["run_id"].is_null()) c.run_id = j["run_id"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config '" + path.string() + "': " + e.what());
  }
  RunConfig c = j.get<RunConfig>();
  const auto base = path.parent_path();
  auto rebase = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  rebase(c.dataset);
  rebase(c.project);
  if (c.lemma_map) rebase(*c.lemma_map);
  return c;
}

void validate_config(const RunConfig& c) {
  if (c.stage < 0 || c.stage > 2) throw ConfigError("stage must be 0, 1 or 2");
  if (c.budget_k < 0) throw ConfigError("budget K must be non-negative");
  if (c.budget_t < 1 || c.budget_r < 1 || c.budget_c < 1) throw ConfigError("budgets T, R, C must be positive");
  if (c.split_threshold < 1) throw ConfigError("split threshold must be positive");
  if (c.project.empty()) throw ConfigError("no project directory given");
  if (c.dataset.empty()) throw ConfigError("no dataset given");
  if (c.operators != "scripted" && c.operators != "external") {
    throw ConfigError("operators must be 'scripted' or 'external'");
  }
  if (c.operators == "external" && c.operator_commands.empty()) {
    throw ConfigError("external operators need operator_commands");
  }
}

std::filesystem::path StatePaths::checkpoint(int stage) const {
  return dir / ("stage" + std::to_string(stage) + ".checkpoint.json");
}

std::filesystem::path StatePaths::summary(int stage) const {
  return dir / ("stage" + std::to_string(stage) + ".summary.json");
}

StatePaths state_paths(const std::filesystem::path& project_root) {
  StatePaths p;
  p.dir = project_root / ".verirefine";
  p.metrics = p.dir / "metrics.jsonl";
  p.history = p.dir / "history.jsonl";
  p.logs = p.dir / "logs";
  p.provenance = p.dir / "provenance.json";
  return p;
}

namespace {

std::shared_ptr<VerifierAdapter> make_adapter(const RunConfig& c) {
  if (c.adapter == AdapterKind::simulated) {
    SimulatedVerifierOptions o;
    if (!c.toolchain_id.empty()) o.toolchain_id = c.toolchain_id;
    if (!c.dependency_revision.empty()) o.dependency_revision = c.dependency_revision;
    o.goal_queries = c.goal_queries;
    return std::make_shared<SimulatedVerifier>(o);
  }
  ExternalVerifierOptions o;
  o.command = c.verifier_command;
  if (!c.toolchain_id.empty()) o.toolchain_id = c.toolchain_id;
  if (!c.dependency_revision.empty()) o.dependency_revision = c.dependency_revision;
  o.timeout = std::chrono::seconds(c.verifier_timeout_s);
  return std::make_shared<ExternalVerifier>(o);
}

void bind_operators(OperatorSet& set, const RunConfig& c, const Project& project) {
  if (c.operators == "scripted") {
    bind_scripted(set, &project);
    return;
  }
  for (const auto& [kind, command] : c.operator_commands) {
    ExternalOperatorOptions o;
    o.command = command;
    o.timeout = std::chrono::seconds(c.operator_timeout_s);
    o.cwd = c.project;
    auto op = std::make_shared<ExternalOperator>(o);
    if (kind == "default") continue;
    set.bind(operator_kind_from_string(kind), op);
  }
  if (auto it = c.operator_commands.find("default"); it != c.operator_commands.end()) {
    ExternalOperatorOptions o;
    o.command = it->second;
    o.timeout = std::chrono::seconds(c.operator_timeout_s);
    o.cwd = c.project;
    set.bind_default(std::make_shared<ExternalOperator>(o));
  }
}

std::int64_t start_cursor(const RunConfig& c, const std::filesystem::path& path) {
  try {
    if (auto cp = read_checkpoint(path)) {
      if (cp->key != kItemCursor) throw CheckpointError("checkpoint '" + path.string() + "' is not an item cursor");
      return cp->cursor;
    }
  } catch (const CheckpointError&) {
    if (!c.force) throw;
  }
  return std::numeric_limits<std::int64_t>::min();
}

StageOutcome run_stage_impl(const RunConfig& config, int stage, std::int64_t& processed) {
  validate_config(config);
  if (stage != 1 && stage != 2) throw ConfigError("stage must be 1 or 2");
  const auto t0 = std::chrono::steady_clock::now();
  auto project = Project::on_disk(config.project);
  const auto paths = state_paths(config.project);
  std::filesystem::create_directories(paths.dir);

  const auto cursor = start_cursor(config, paths.checkpoint(stage));
  const auto records = load_dataset(config.dataset);

  MetricsLog metrics(paths.metrics);
  const auto stage_name = "stage" + std::to_string(stage);
  metrics.set_run_id(config.run_id ? *config.run_id : make_run_id("verirefine", stage_name));
  HistoryStore history(paths.history);
  TranscriptStore transcripts(paths.logs);

  Verifier verifier(make_adapter(config), &metrics);
  verifier.set_goal_queries(config.goal_queries);
  Kernel kernel(project, verifier, &metrics);
  OperatorSet operators;
  operators.set_metrics(&metrics);
  operators.set_transcripts(&transcripts);
  bind_operators(operators, config, project);

  nlohmann::json start{{"schema_version", kMetricsSchemaVersion},
                       {"pipeline", "verirefine"},
                       {"stage", stage},
                       {"corpus", config.corpus},
                       {"config", config},
                       {"environment", verifier.environment()}};
  if (cursor != std::numeric_limits<std::int64_t>::min()) start["resume_from"] = cursor;
  metrics.emit(events::run_start, start);

  EngineContext ctx{project, verifier, kernel, operators, &metrics, &history, paths.checkpoint(stage), "verirefine",
                    {}};
  ctx.should_stop = [&] {
    ++processed;
    if (config.crash_after >= 0 && processed >= config.crash_after) std::raise(SIGKILL);
    return config.stop_after >= 0 && processed >= config.stop_after;
  };

  StageOutcome out;
  out.stage = stage;
  out.run_id = metrics.run_id();
  MetricsSummary summary;
  summary.pipeline = "verirefine_" + stage_name;
  summary.run_id = metrics.run_id();

  if (stage == 1) {
    Stage1Config s1;
    s1.max_repairs = config.budget_k;
    s1.start_index = cursor;
    s1.provenance_path = paths.provenance;
    s1.header_imports = config.header_imports;
    auto r = run_stage1(records, ctx, s1, load_provenance(paths.provenance));
    save_provenance(paths.provenance, r.provenance);
    out.stopped_early = r.stopped_early;
    out.statements = std::move(r.items);
    std::int64_t b = 0, compiled = 0;
    std::vector<BlockOutcome> blocks;
    for (const auto& it : out.statements) {
      b += it.b_attempts;
      if (it.status == ItemStatus::compiled) ++compiled;
      blocks.push_back({it.status == ItemStatus::compiled, it.b_attempts});
    }
    summary.counters["total_b_attempts"] = b;
    summary.counters["compiled"] = compiled;
    if (!out.stopped_early) out.pb = verifier.verify_project(project).ok;
    out.quality = compute_metrics(blocks, {}, out.pb);
  } else {
    Stage2Config s2;
    s2.max_calls = config.budget_t;
    s2.retries = config.budget_r;
    s2.rounds = config.budget_c;
    s2.split_threshold = config.split_threshold;
    s2.goal_queries = config.goal_queries;
    s2.start_index = cursor;
    std::map<std::string, LemmaMapEntry> lemma_map;
    if (config.lemma_map) lemma_map = load_lemma_map(*config.lemma_map);
    auto r = run_stage2(proof_tasks(records, lemma_map, s2), ctx, s2);
    out.stopped_early = r.stopped_early;
    out.proofs = std::move(r.items);
    std::int64_t a = 0, fixes = 0, plans = 0, solved = 0;
    std::vector<HoleOutcome> holes;
    for (const auto& it : out.proofs) {
      a += it.attempts;
      fixes += it.fix_attempts;
      plans += it.plans;
      const bool evaluated = it.status == ProofStatus::solved || it.status == ProofStatus::unsolved;
      const bool closed = it.status == ProofStatus::solved && it.errors_after == 0;
      if (closed) ++solved;
      holes.push_back({evaluated, closed});
    }
    summary.counters["total_a_attempts"] = a;
    summary.counters["total_fix_attempts"] = fixes;
    summary.counters["total_c_plans"] = plans;
    summary.counters["solved"] = solved;
    if (!out.stopped_early) out.pb = verifier.verify_project(project).ok;
    out.quality = compute_metrics({}, holes, out.pb);
  }

  summary.processed = static_cast<std::int64_t>(stage == 1 ? out.statements.size() : out.proofs.size());
  summary.cursor = read_checkpoint(paths.checkpoint(stage)).value_or(Checkpoint{std::string(kItemCursor), 0});
  summary.counters["total_lean_checks"] = static_cast<std::int64_t>(verifier.calls());
  summary.counters["total_oracle_calls"] = operators.invocations();
  if (out.pb) summary.counters["project_builds"] = *out.pb ? 1 : 0;
  summary.total_tokens_used = operators.tokens_used();
  summary.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  metrics.emit(events::run_end, summary_json(summary));
  write_summary(paths.summary(stage), summary);
  out.summary = std::move(summary);
  return out;
}

}  // namespace

StageOutcome run_stage(const RunConfig& config, int stage) {
  std::int64_t processed = 0;
  return run_stage_impl(config, stage, processed);
}

std::vector<StageOutcome> run_pipeline(const RunConfig& config) {
  std::vector<StageOutcome> out;
  std::int64_t processed = 0;
  if (config.stage == 1 || config.stage == 2) {
    out.push_back(run_stage_impl(config, config.stage, processed));
    return out;
  }
  auto per_stage = [&](int stage) {
    auto c = config;
    if (c.run_id) *c.run_id += "_stage" + std::to_string(stage);
    return run_stage_impl(c, stage, processed);
  };
  out.push_back(per_stage(1));
  if (out.back().stopped_early) return out;
  out.push_back(per_stage(2));
  return out;
}

}  // namespace verirefine
