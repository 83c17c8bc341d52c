#include <gtest/gtest.h>

#include "verirefine/outline.hpp"
#include "verirefine/project.hpp"
#include "verirefine/sim_verifier.hpp"
#include "verirefine/split.hpp"

using namespace verirefine;

namespace {
std::string big_file(int decls) {
  std::string s = "import Mathlib\n\n";
  for (int i = 0; i < decls; ++i)
    s += "theorem t" + std::to_string(i) + " : " + std::to_string(i) + " = " + std::to_string(i) +
         " := by\n  rfl\n\n";
  return s;
}
}  // namespace

TEST(Split, PartNames) {
  EXPECT_EQ(part_file("Chapters/Chap01/section01.lean", 2), "Chapters/Chap01/section01_part2.lean");
}

TEST(Split, PartsStayWithinBoundAndKeepDeclarations) {
  const auto text = big_file(30);
  const auto plan = plan_split("A.lean", text, 20);
  ASSERT_TRUE(plan);
  ASSERT_GT(plan->parts.size(), 1u);
  std::size_t decls = 0;
  for (const auto& p : plan->parts) {
    EXPECT_LE(line_count(p.text), 20) << p.file;
    decls += p.declarations.size();
  }
  EXPECT_EQ(decls, 30u);
}

TEST(Split, AppliedSplitStillVerifies) {
  auto project = Project::in_memory();
  const auto text = big_file(12);
  project.write("A.lean", text);
  const auto plan = plan_split("A.lean", text, 15);
  ASSERT_TRUE(plan);
  apply_split(project, "A.lean", *plan);
  SimulatedVerifier sim;
  for (const auto& f : project.files()) EXPECT_EQ(err_count(sim.check_file(project, f)), 0u) << f;
  EXPECT_EQ(part_files(project, "A.lean").size(), plan->parts.size());
}

TEST(Split, RefusesFilesWithBodyCommands) {
  const auto text = "import Mathlib\nnamespace X\ntheorem a : 1 = 1 := rfl\nvariable (n : ℕ)\ntheorem b : 2 = 2 := rfl\nend X\n";
  EXPECT_FALSE(plan_split("A.lean", text, 3));
  EXPECT_FALSE(plan_split("A.lean", "theorem a : 1 = 1 := rfl\n", 1));
}
