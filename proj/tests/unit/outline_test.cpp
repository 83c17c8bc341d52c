#include <gtest/gtest.h>

#include "oracles.hpp"
#include "verirefine/outline.hpp"

using namespace verirefine;

namespace {
const char* kFile =
    "import Mathlib\n"
    "open Nat\n"
    "\n"
    "/-- [3] thm:a -/\n"
    "theorem a (n : ℕ) : n = n := by\n"
    "  rfl\n"
    "\n"
    "@[simp] lemma b : (⟨1, 2⟩ : ℕ × ℕ).1 = 1 := rfl\n"
    "def c := 5\n";
}

TEST(Outline, FindsDeclarationsAndTags) {
  const auto o = outline(kFile);
  ASSERT_EQ(o.decls.size(), 3u);
  EXPECT_EQ(o.imports, std::vector<std::string>{"Mathlib"});
  EXPECT_EQ(o.header_last_line, 1);
  const auto& a = o.decls[0];
  EXPECT_EQ(a.kind, "theorem");
  EXPECT_EQ(a.first_line, 3);
  EXPECT_EQ(a.keyword_line, 4);
  EXPECT_EQ(a.last_line, 5);
  ASSERT_TRUE(a.tag);
  EXPECT_EQ(a.tag->index, 3);
  EXPECT_EQ(a.tag->label, "thm:a");
  EXPECT_EQ(o.decls[1].name, "b");
  EXPECT_EQ(declaration_at(o, 5), &o.decls[0]);
}

TEST(Outline, SignaturesMatchLineScanner) {
  const auto o = outline(kFile);
  std::vector<std::string> sigs;
  for (const auto& d : o.decls) sigs.push_back(d.signature);
  EXPECT_EQ(sigs, oracle::signatures(kFile));
}

TEST(Outline, HeaderScopeIsBounded) {
  EXPECT_EQ(header_scope(kFile), (Scope{SourceRange::lines(0, 1)}));
  EXPECT_EQ(header_scope(kFile, 1), (Scope{SourceRange::lines(0, 0)}));
  EXPECT_TRUE(header_scope("theorem t : True := trivial\n").empty());
}

TEST(Outline, ProvenanceAndModules) {
  EXPECT_EQ(provenance_docstring(7, "lem:x"), "/-- [7] lem:x -/");
  const auto tag = parse_provenance_tag("/-- [12] def:y -/");
  ASSERT_TRUE(tag);
  EXPECT_EQ(tag->index, 12);
  EXPECT_EQ(module_name("Chapters/Chap01/section02.lean"), "Chapters.Chap01.section02");
  EXPECT_EQ(module_file("Toy.Basic"), "Toy/Basic.lean");
}
