#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "verirefine/instrumentation.hpp"
#include "verirefine/kernel.hpp"
#include "verirefine/operators.hpp"
#include "verirefine/project.hpp"
#include "verirefine/verifier.hpp"

namespace verirefine {

/// Everything a stage needs to run: the mutable project, the certified edit
/// path, the proposal layer and the instrumentation sinks.
struct EngineContext {
  Project& project;
  Verifier& verifier;
  Kernel& kernel;
  OperatorSet& operators;
  MetricsLog* metrics = nullptr;
  HistoryStore* history = nullptr;
  std::optional<std::filesystem::path> checkpoint;
  std::string pipeline = "verirefine";
  /// Polled after each item; returning true ends the run early.
  std::function<bool()> should_stop;

  void emit(std::string_view event, nlohmann::json data) const {
    if (metrics) metrics->emit(event, std::move(data));
  }
  void record(std::string lean_file, std::string task_id, std::string kind, nlohmann::json payload,
              std::optional<std::string> log_path = std::nullopt) const {
    if (!history) return;
    HistoryRecord r;
    r.ts = utc_timestamp();
    r.pipeline = pipeline;
    r.run_id = metrics ? metrics->run_id() : std::string();
    r.lean_file = std::move(lean_file);
    r.task_id = std::move(task_id);
    r.kind = std::move(kind);
    r.log_path = std::move(log_path);
    r.payload = std::move(payload);
    history->append(std::move(r));
  }
};

}  // namespace verirefine
