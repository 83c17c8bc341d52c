#include <gtest/gtest.h>

#include "test_env.hpp"
#include "verirefine/scripted_operators.hpp"
#include "verirefine/stage1.hpp"

using namespace verirefine;

namespace {
DatasetRecord record(std::string env, std::string section_number) {
  DatasetRecord r;
  r.index = 4;
  r.label = "thm:x";
  r.env = std::move(env);
  r.context.chapter_number = 2;
  r.context.section_number = std::move(section_number);
  return r;
}
}  // namespace

TEST(Stage1, TargetFileFromSectionNumber) {
  EXPECT_EQ(target_file(record("theorem", "2.3")), "Chapters/Chap02/section03.lean");
  EXPECT_EQ(target_file(record("theorem", "7")), "Chapters/Chap02/section07.lean");
  EXPECT_EQ(target_file(record("theorem", "")), "Chapters/Chap02/section00.lean");
  EXPECT_EQ(target_file(record("theorem", "A")), "Chapters/Chap02/section00.lean");
}

TEST(Stage1, StubShapes) {
  EXPECT_EQ(gen_stub(record("theorem", "1"), "x", "True"), "/-- [4] thm:x -/\ntheorem x : True := by sorry");
  EXPECT_EQ(gen_stub(record("lemma", "1"), "x", "True"), "/-- [4] thm:x -/\nlemma x : True := by sorry");
  EXPECT_EQ(gen_stub(record("definition", "1"), "x", "ℕ"), "/-- [4] thm:x -/\ndef x : ℕ := sorry");
  EXPECT_EQ(gen_stub(record("remark", "1"), "x", "True"), "/-- [4] thm:x -/\nexample : True := by sorry");
  EXPECT_THROW(gen_stub(record("poem", "1"), "x", "True"), Stage1Error);
}

TEST(Stage1, SkeletonReplies) {
  const auto ok = parse_skeleton_reply("\n  foo_bar : ∀ n : ℕ, n = n  \n");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->first, "foo_bar");
  EXPECT_EQ(ok->second, "∀ n : ℕ, n = n");
  EXPECT_FALSE(parse_skeleton_reply("theorem : True"));
  EXPECT_FALSE(parse_skeleton_reply("no colon here"));
  EXPECT_FALSE(parse_skeleton_reply(""));
}

TEST(Stage1, ToyStatementsCompileWithinBudget) {
  testenv::Engine eng(testenv::toy_memory_project());
  bind_scripted(eng.operators, &eng.project);
  Stage1Config cfg;
  cfg.header_imports = {"Mathlib", "Toy.Basic"};
  const auto records = testenv::toy_records();
  const auto result = run_stage1(records, eng.ctx, cfg);
  ASSERT_EQ(result.items.size(), records.size());
  int repaired = 0;
  for (const auto& it : result.items) {
    EXPECT_EQ(it.status, ItemStatus::compiled) << it.label << " " << it.note;
    EXPECT_LE(it.verifier_calls, 1 + cfg.max_repairs);
    repaired += it.b_attempts > 0;
  }
  EXPECT_GT(repaired, 0);
  for (const auto& f : eng.project.files()) {
    if (f.rfind("Chapters/", 0) != 0) continue;
    EXPECT_EQ(err_count(SimulatedVerifier{}.check_file(eng.project, f)), 0u) << f;
  }
}

TEST(Stage1, ResumeCursorSkipsEarlierItems) {
  testenv::Engine eng(testenv::toy_memory_project());
  bind_scripted(eng.operators, &eng.project);
  Stage1Config cfg;
  cfg.header_imports = {"Mathlib", "Toy.Basic"};
  cfg.start_index = 20;
  const auto result = run_stage1(testenv::toy_records(), eng.ctx, cfg);
  for (const auto& it : result.items) EXPECT_GE(it.index, 20);
}
