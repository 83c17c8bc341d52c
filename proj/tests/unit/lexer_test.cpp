#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "verirefine/lexer.hpp"

using namespace verirefine;

TEST(Holes, OnlyIdentifierTokensCount) {
  EXPECT_EQ(count_holes("theorem t : True := by sorry"), 1u);
  EXPECT_EQ(count_holes("-- sorry\n/- sorry /- nested sorry -/ -/ \"sorry\""), 0u);
  EXPECT_EQ(count_holes("sorry_lemma xsorry sorry' h.sorry"), 0u);
  EXPECT_EQ(count_holes("⟨sorry, sorry⟩"), 2u);
  EXPECT_EQ(count_holes("exact sorry."), 1u);
}

TEST(Holes, SubscriptedNameIsNotAHole) { EXPECT_EQ(count_holes("sorry₁ sorryα"), 0u); }

TEST(Holes, EscapedBackslashClosesString) { EXPECT_EQ(count_holes("\"\\\\\"sorry"), 1u); }

TEST(Holes, PositionsPointAtTheToken) {
  const auto holes = find_holes("a\n  b sorry\n");
  ASSERT_EQ(holes.size(), 1u);
  EXPECT_EQ(holes[0].start, (SourcePos{1, 4}));
  EXPECT_EQ(holes[0].end, (SourcePos{1, 9}));
}

TEST(Holes, AgreeWithIndependentScanner) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 3000; ++i) {
    const auto text = oracle::random_source(rng);
    ASSERT_EQ(count_holes(text), oracle::count_holes(text)) << text;
  }
}
