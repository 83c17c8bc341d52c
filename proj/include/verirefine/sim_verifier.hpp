#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "verirefine/verifier.hpp"

namespace verirefine {

/// Goal recorded at one hole during simulated elaboration.
struct HoleGoal {
  SourceRange hole;
  GoalState state;
};

struct SimElaboration {
  DiagnosticSet diagnostics;
  std::vector<HoleGoal> goals;
};

/// Elaborates one file of the miniature declaration language:
///
///   - `import M` resolves `M` to a project file, or to the builtin
///     `Mathlib`/`Init`/`Std` libraries; unknown modules are errors.
///   - Declarations `kind name binders : type := body` are checked in order.
///     Every identifier must resolve to a binder, an earlier declaration
///     (current file or imports, honouring `namespace` and `open`) or a
///     builtin; the unicode number types and analysis vocabulary require a
///     Mathlib import.
///   - Proof bodies are terms or `by` blocks over a small tactic set
///     (exact, apply, intro, intros, rfl, trivial, assumption, constructor,
///     decide, norm_num, simp, linarith, omega, sorry). Goals are tracked as
///     token strings; `exact` checks the inferred type against the goal when
///     the term's type can be computed and accepts opaque terms otherwise.
///   - A literal body whose declared type is a known incompatible type is a
///     type mismatch.
///   - Any declaration containing a hole gets the warning
///     "declaration uses 'sorry'".
SimElaboration simulate_check(const Project& project, const FileId& file);

/// Builtin names the simulated toolchain resolves, optionally including the
/// Mathlib vocabulary.
std::vector<std::string> builtin_vocabulary(bool with_mathlib);
/// True when `name` only resolves after importing Mathlib.
bool requires_mathlib(std::string_view name);

struct SimulatedVerifierOptions {
  std::string toolchain_id = "leanprover/lean4:v4.sim";
  std::string dependency_revision = "mathlib-sim";
  bool goal_queries = true;
};

class SimulatedVerifier : public VerifierAdapter {
 public:
  explicit SimulatedVerifier(SimulatedVerifierOptions options = {}) : options_(std::move(options)) {}

  VerifierEnvironment environment() const override;
  DiagnosticSet check_file(const Project& project, const FileId& file) override;
  std::optional<GoalState> goal_at(const Project& project, const FileId& file, const SourceRange& hole) override;

 private:
  SimulatedVerifierOptions options_;
};

}  // namespace verirefine
