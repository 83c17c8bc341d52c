#include <gtest/gtest.h>

#include "verirefine/instrumentation.hpp"
#include "verirefine/project.hpp"
#include "verirefine/sim_verifier.hpp"
#include "verirefine/verifier.hpp"

using namespace verirefine;

namespace {
std::size_t errors(const std::string& text) {
  auto p = Project::in_memory();
  p.write("A.lean", text);
  return err_count(SimulatedVerifier{}.check_file(p, "A.lean"));
}
}  // namespace

TEST(SimVerifier, AcceptsWellFormedDeclarations) {
  EXPECT_EQ(errors("theorem t : 1 = 1 := rfl\n"), 0u);
  EXPECT_EQ(errors("theorem t : True := by trivial\n"), 0u);
  EXPECT_EQ(errors("theorem t : 2 = 2 := by sorry\n"), 0u);
}

TEST(SimVerifier, ReportsUnknownIdentifiers) {
  EXPECT_GE(errors("theorem t : Foo := by trivial\n"), 1u);
  EXPECT_GE(errors("theorem t : True := by bogus_tactic\n"), 1u);
}

TEST(SimVerifier, HoleIsAWarning) {
  auto p = Project::in_memory();
  p.write("A.lean", "import Mathlib\ndef x : ℕ := sorry\n");
  const auto ds = SimulatedVerifier{}.check_file(p, "A.lean");
  EXPECT_EQ(err_count(ds), 0u);
  EXPECT_EQ(ds.count(Severity::warning), 1u);
}

TEST(SimVerifier, ImportsResolveAcrossFiles) {
  auto p = Project::in_memory();
  p.write("B.lean", "theorem base : 1 = 1 := rfl\n");
  p.write("A.lean", "import B\ntheorem t : 1 = 1 := base\n");
  EXPECT_EQ(err_count(SimulatedVerifier{}.check_file(p, "A.lean")), 0u);
  p.write("A.lean", "import Missing\ntheorem t : 1 = 1 := rfl\n");
  EXPECT_GE(err_count(SimulatedVerifier{}.check_file(p, "A.lean")), 1u);
}

TEST(Verifier, OnlyFileChecksAreCounted) {
  auto p = Project::in_memory();
  p.write("A.lean", "theorem t : 1 = 1 := by sorry\n");
  MetricsLog log;
  Verifier v(std::make_shared<SimulatedVerifier>(), &log);
  v.verify_file(p, "A.lean");
  v.verify_project(p);
  v.goal_state(p, "A.lean", SourceRange{{0, 24}, {0, 29}});
  EXPECT_EQ(v.calls(), 1u);
  EXPECT_EQ(log.count(events::lean_check), 1u);
  EXPECT_EQ(log.count(events::project_check), 1u);
}
