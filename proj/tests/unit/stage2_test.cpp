#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_env.hpp"
#include "verirefine/outline.hpp"
#include "verirefine/scripted_operators.hpp"
#include "verirefine/stage1.hpp"
#include "verirefine/stage2.hpp"

using namespace verirefine;

namespace {

const char* kSection =
    "import Mathlib\n"
    "\n"
    "/-- [1] thm:a -/\n"
    "theorem a : 1 = 1 := by sorry\n"
    "\n"
    "/-- [2] thm:b -/\n"
    "theorem b (h : sorry_free) : 2 = 2 := by\n"
    "  sorry\n";

ProofTask task(std::string label, std::optional<std::size_t> position = std::nullopt) {
  ProofTask t;
  t.label = std::move(label);
  t.file = "S.lean";
  t.position = position;
  return t;
}

}  // namespace

TEST(LocateHole, ByLabel) {
  const auto hole = locate_target_hole("S.lean", kSection, task("thm:b"));
  ASSERT_TRUE(hole);
  EXPECT_EQ(hole->range.start, (SourcePos{7, 2}));
}

TEST(LocateHole, ByPositionWhenUnlabelled) {
  const std::string text = "theorem a : 1 = 1 := by sorry\ntheorem b : 2 = 2 := by sorry\n";
  const auto hole = locate_target_hole("S.lean", text, task("thm:none", 1));
  ASSERT_TRUE(hole);
  EXPECT_EQ(hole->range.start.line, 1);
}

TEST(LocateHole, AmbiguousAndMissing) {
  const std::string dup = std::string(kSection) + "/-- [3] thm:a -/\ntheorem c : 3 = 3 := by sorry\n";
  EXPECT_THROW(locate_target_hole("S.lean", dup, task("thm:a")), AmbiguousTarget);
  EXPECT_THROW(locate_target_hole("S.lean", kSection, task("thm:zzz")), MissingTarget);
}

TEST(LocateHole, ClosedDeclarationHasNoHole) {
  const std::string text = "/-- [1] thm:a -/\ntheorem a : 1 = 1 := by rfl\n";
  EXPECT_FALSE(locate_target_hole("S.lean", text, task("thm:a")));
}

TEST(SignatureGuard, AgreesWithLineScanner) {
  std::vector<std::string> normalized;
  for (const auto& sig : signature_texts(kSection)) normalized.push_back(normalize_ws(sig));
  EXPECT_EQ(normalized, oracle::signatures(kSection));
  const auto guard = signature_guard();
  EXPECT_FALSE(guard(kSection, std::string(kSection).replace(std::string(kSection).find("by sorry"), 8, "rfl")));
  EXPECT_TRUE(guard(kSection, std::string(kSection).replace(std::string(kSection).find("1 = 1"), 5, "1 = 2")));
}

TEST(SelectError, SmallestPositionThenMessage) {
  const Diagnostic late{SourceRange{{3, 0}, {3, 1}}, Severity::error, "a"};
  const Diagnostic early_b{SourceRange{{1, 0}, {1, 1}}, Severity::error, "b"};
  const Diagnostic early_a{SourceRange{{1, 0}, {1, 5}}, Severity::error, "a"};
  const Diagnostic warn{SourceRange{{0, 0}, {0, 1}}, Severity::warning, "w"};
  EXPECT_EQ(select_error(DiagnosticSet{late, early_b, early_a, warn}), early_a);
  EXPECT_THROW(select_error(DiagnosticSet{warn}), std::invalid_argument);
}

TEST(Stage2, ToyProofsCloseWithinBudget) {
  testenv::Engine eng(testenv::toy_memory_project());
  bind_scripted(eng.operators, &eng.project);
  Stage1Config s1;
  s1.header_imports = {"Mathlib", "Toy.Basic"};
  const auto records = testenv::toy_records();
  run_stage1(records, eng.ctx, s1);
  const auto before = eng.project.files();

  Stage2Config s2;
  const auto tasks = proof_tasks(records, testenv::toy_lemma_map(), s2);
  ASSERT_GE(tasks.size(), 10u);
  const auto result = run_stage2(tasks, eng.ctx, s2);
  for (const auto& it : result.items) {
    EXPECT_EQ(it.status, ProofStatus::solved) << it.label << " " << it.note;
    EXPECT_LE(it.verifier_calls, s2.max_calls);
    EXPECT_LE(it.attempts, s2.attempt_bound());
    EXPECT_EQ(it.errors_after, 0u);
  }
  for (const auto& f : before) {
    if (f.rfind("Chapters/", 0) != 0) continue;
    EXPECT_EQ(err_count(SimulatedVerifier{}.check_file(eng.project, f)), 0u) << f;
  }
}

TEST(Stage2, LemmaHintsRenderAsList) {
  LemmaMapEntry e;
  e.decl_hints = {"Toy.le_self", "Nat.le_refl"};
  EXPECT_EQ(render_hints(e), "Relevant declarations:\n- Toy.le_self\n- Nat.le_refl\n");
}
