#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "verirefine/operators.hpp"
#include "verirefine/project.hpp"

namespace verirefine {

/// Proposes "name : type" from the record's `lean` extra
/// ({"name", "type", "draft_type"}); `draft_type` wins when present so the
/// repair path gets exercised. Falls back to a name derived from the label.
class ScriptedSkeleton : public Operator {
 public:
  std::string name() const override { return "scripted-skeleton"; }
  OperatorResponse run(const OperatorRequest& request, OperatorContext& context) override;
};

/// Fixes the first repairable error in scope: missing imports, misspelt
/// names (nearest known name by edit distance), stray command lines,
/// missing bodies and duplicate names.
class ScriptedRepair : public Operator {
 public:
  explicit ScriptedRepair(const Project* project = nullptr) : project_(project) {}
  std::string name() const override { return "scripted-repair"; }
  OperatorResponse run(const OperatorRequest& request, OperatorContext& context) override;

 private:
  const Project* project_;
};

class ScriptedPlanner : public Operator {
 public:
  std::string name() const override { return "scripted-planner"; }
  OperatorResponse run(const OperatorRequest& request, OperatorContext& context) override;
};

/// Replaces the target hole with one candidate per attempt: matching
/// hypotheses, closing tactics, then terms named by the reference proof
/// (`\lean{...}`) and the lemma hints.
class ScriptedProver : public Operator {
 public:
  std::string name() const override { return "scripted-prover"; }
  OperatorResponse run(const OperatorRequest& request, OperatorContext& context) override;
};

/// Candidate tactics for a hole, in the order the prover tries them.
std::vector<std::string> proof_candidates(const OperatorRequest& request);

/// Behaviours that must never corrupt state or escape the budgets.
enum class AdversaryMode {
  noop,          ///< edit that reproduces the file
  failing,       ///< operator error
  breaking,      ///< introduces an unknown identifier in scope
  garbage,       ///< unparseable text, empty patch
  foreign_file,  ///< patch aimed at another file
};

class AdversarialOperator : public Operator {
 public:
  explicit AdversarialOperator(AdversaryMode mode) : mode_(mode) {}
  std::string name() const override { return "adversary"; }
  OperatorResponse run(const OperatorRequest& request, OperatorContext& context) override;

 private:
  AdversaryMode mode_;
};

/// Seeded random edits inside the scope, plus random skeleton replies.
class RandomOperator : public Operator {
 public:
  explicit RandomOperator(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  OperatorResponse run(const OperatorRequest& request, OperatorContext& context) override;

 private:
  std::mt19937_64 rng_;
};

/// Binds the scripted skeleton, repair, planner and prover.
void bind_scripted(OperatorSet& set, const Project* project);

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace verirefine
