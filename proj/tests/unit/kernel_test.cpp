#include <gtest/gtest.h>

#include "verirefine/instrumentation.hpp"
#include "verirefine/kernel.hpp"
#include "verirefine/operators.hpp"
#include "verirefine/sim_verifier.hpp"

using namespace verirefine;

namespace {

struct Fixture {
  Project project = Project::in_memory();
  MetricsLog metrics;
  Verifier verifier{std::make_shared<SimulatedVerifier>(), &metrics};
  Kernel kernel{project, verifier, &metrics};

  DiagnosticSet check(const FileId& f) { return SimulatedVerifier{}.check_file(project, f); }
};

SourceRange find(const std::string& text, const std::string& what) {
  const auto off = text.find(what);
  return {pos_of(text, off), pos_of(text, off + what.size())};
}

}  // namespace

TEST(Objective, LexicographicOrder) {
  EXPECT_TRUE(prec({0, 9}, {1, 0}));
  EXPECT_TRUE(prec({1, 0}, {1, 1}));
  EXPECT_FALSE(prec({1, 1}, {1, 1}));
  EXPECT_FALSE(prec({2, 0}, {1, 5}));
}

TEST(ApplyEdits, RejectsOverlap) {
  EXPECT_EQ(apply_edits("abcdef", {{SourceRange{{0, 1}, {0, 3}}, "X"}, {SourceRange{{0, 4}, {0, 4}}, "Y"}}), "aXdYef");
  EXPECT_THROW(apply_edits("abcdef", {{SourceRange{{0, 1}, {0, 3}}, "X"}, {SourceRange{{0, 2}, {0, 4}}, "Y"}}),
               PatchError);
}

TEST(Kernel, AcceptsStrictImprovement) {
  Fixture fx;
  const std::string text = "theorem t : Foo := by trivial\n";
  fx.project.write("A.lean", text);
  const auto before = fx.check("A.lean");
  ASSERT_EQ(err_count(before), 2u);
  const Scope scope{full_range(text)};
  const auto out = fx.kernel.try_patch(Stage::statements, "A.lean", scope,
                                       replace_range("A.lean", find(text, "Foo"), "True", "test"), before);
  EXPECT_TRUE(out.accepted);
  EXPECT_EQ(out.before, (ObjectivePair{2, 2}));
  EXPECT_EQ(out.after, (ObjectivePair{0, 0}));
  EXPECT_EQ(fx.project.read("A.lean"), "theorem t : True := by trivial\n");
  EXPECT_EQ(fx.verifier.calls(), 1u);
}

TEST(Kernel, RejectedAttemptRestoresBytes) {
  Fixture fx;
  const std::string text = "theorem t : Foo := by trivial\n";
  fx.project.write("A.lean", text);
  const auto before = fx.check("A.lean");
  const Scope scope{full_range(text)};
  std::string committed;
  fx.kernel.set_observer([&](const AttemptTrace& t) { committed = std::string(t.committed_bytes); });
  const auto out = fx.kernel.try_patch(Stage::statements, "A.lean", scope,
                                       replace_range("A.lean", find(text, "Foo"), "Bar Baz", "test"), before);
  EXPECT_FALSE(out.accepted);
  EXPECT_TRUE(out.verified);
  EXPECT_EQ(fx.project.read("A.lean"), text);
  EXPECT_EQ(committed, text);
}

TEST(Kernel, OutOfScopeEditIsRejectedWithoutVerifying) {
  Fixture fx;
  const std::string text = "theorem t : Foo := by trivial\ntheorem u : True := trivial\n";
  fx.project.write("A.lean", text);
  const auto out = fx.kernel.try_patch(Stage::statements, "A.lean", Scope{SourceRange::lines(0, 0)},
                                       replace_range("A.lean", SourceRange{{1, 20}, {1, 27}}, "rfl", "t"),
                                       fx.check("A.lean"));
  EXPECT_FALSE(out.accepted);
  EXPECT_FALSE(out.verified);
  EXPECT_EQ(fx.verifier.calls(), 0u);
  EXPECT_EQ(fx.project.read("A.lean"), text);
}

TEST(Kernel, ForeignFilePatchIsRejected) {
  Fixture fx;
  fx.project.write("A.lean", "theorem t : Foo := by trivial\n");
  fx.project.write("B.lean", "theorem u : True := trivial\n");
  const auto out = fx.kernel.try_patch(Stage::statements, "A.lean", Scope{SourceRange::lines(0, 0)},
                                       replace_range("B.lean", SourceRange::lines(0, 0), "x", "t"),
                                       fx.check("A.lean"));
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(fx.project.read("B.lean"), "theorem u : True := trivial\n");
  EXPECT_EQ(fx.verifier.calls(), 0u);
}

TEST(Kernel, GuardVetoRestores) {
  Fixture fx;
  const std::string text = "theorem t : 1 = 1 := by sorry\n";
  fx.project.write("A.lean", text);
  const PatchGuard veto = [](std::string_view, std::string_view) { return std::optional<std::string>("no"); };
  const auto out = fx.kernel.try_patch(Stage::proofs, "A.lean", Scope{full_range(text)},
                                       replace_range("A.lean", find(text, "sorry"), "rfl", "t"), fx.check("A.lean"),
                                       veto);
  EXPECT_FALSE(out.accepted);
  EXPECT_FALSE(out.verified);
  EXPECT_EQ(out.reject_reason.empty(), false);
  EXPECT_EQ(fx.project.read("A.lean"), text);
}

TEST(Kernel, ProofStageCountsHoles) {
  Fixture fx;
  const std::string text = "theorem t : 1 = 1 := by sorry\n";
  fx.project.write("A.lean", text);
  const auto out = fx.kernel.try_patch(Stage::proofs, "A.lean", Scope{find(text, "sorry")},
                                       replace_range("A.lean", find(text, "sorry"), "rfl", "t"), fx.check("A.lean"));
  EXPECT_TRUE(out.accepted);
  EXPECT_EQ(out.before, (ObjectivePair{0, 1}));
  EXPECT_EQ(out.after, (ObjectivePair{0, 0}));
  const auto& ev = fx.metrics.events();
  ASSERT_FALSE(ev.empty());
  EXPECT_EQ(ev.back().event, events::patch_result);
  EXPECT_TRUE(ev.back().data["accepted"].get<bool>());
}

TEST(Snapshot, RestoreRemovesCreatedFile) {
  auto p = Project::in_memory();
  const auto snap = Snapshot::capture(p, "New.lean");
  p.write("New.lean", "x");
  snap.restore(p);
  EXPECT_FALSE(p.exists("New.lean"));
}
