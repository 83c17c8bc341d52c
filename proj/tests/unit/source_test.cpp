#include <gtest/gtest.h>

#include "verirefine/diagnostics.hpp"
#include "verirefine/source.hpp"

using namespace verirefine;

TEST(Source, OffsetAndPositionRoundTrip) {
  const std::string text = "ab\ncde\n\nf";
  for (std::size_t off = 0; off <= text.size(); ++off) EXPECT_EQ(offset_of(text, pos_of(text, off)), off);
  EXPECT_EQ(offset_of(text, {1, 3}), 6u);
  EXPECT_THROW(offset_of(text, {1, 4}), TextError);
  EXPECT_THROW(offset_of(text, {9, 0}), TextError);
}

TEST(Source, LinesIgnoreTrailingNewline) {
  EXPECT_EQ(line_count("a\nb\n"), 2);
  EXPECT_EQ(line_count("a\nb"), 2);
  EXPECT_EQ(nonempty_line_count("a\n\n  \nb\n"), 2);
  EXPECT_EQ(split_lines("x\ny").size(), 2u);
}

TEST(Source, RangeIntersectionAndContainment) {
  const auto a = SourceRange::lines(2, 4);
  EXPECT_TRUE(intersects(a, SourceRange::lines(4, 6)));
  EXPECT_FALSE(intersects(a, SourceRange::lines(5, 6)));
  EXPECT_TRUE(a.contains(SourceRange{{3, 1}, {3, 5}}));
  // A point range intersects the range it lies in.
  EXPECT_TRUE(intersects(a, SourceRange{{3, 2}, {3, 2}}));
  EXPECT_EQ(text_in("ab\ncd\n", SourceRange{{1, 0}, {1, 2}}), "cd");
}

TEST(Diagnostics, ErrorCountKeepsMultiplicity) {
  const Diagnostic e{SourceRange::lines(0, 0), Severity::error, "x"};
  const Diagnostic w{SourceRange::lines(0, 0), Severity::warning, "y"};
  DiagnosticSet ds{e, e, w};
  EXPECT_EQ(err_count(ds), 2u);
  EXPECT_EQ(ds.count(Severity::warning), 1u);
  EXPECT_EQ(ds, (DiagnosticSet{w, e, e}));
  EXPECT_THROW(severity_from_string("fatal"), std::invalid_argument);
}

TEST(Diagnostics, ScopeMergesAndLocalizes) {
  Scope s{SourceRange::lines(5, 6), SourceRange::lines(0, 1), SourceRange::lines(2, 3)};
  ASSERT_EQ(s.ranges().size(), 2u);
  EXPECT_EQ(s.ranges()[0], SourceRange::lines(0, 3));
  EXPECT_TRUE(s.covers(SourceRange::lines(1, 2)));
  EXPECT_FALSE(s.covers(SourceRange::lines(3, 5)));
  const Diagnostic in{SourceRange{{5, 1}, {5, 2}}, Severity::error, "in"};
  const Diagnostic out{SourceRange{{4, 0}, {4, 1}}, Severity::error, "out"};
  EXPECT_EQ(localize(DiagnosticSet{in, out}, s), (DiagnosticSet{in}));
}

TEST(Diagnostics, JsonRoundTrip) {
  DiagnosticSet ds{{SourceRange{{1, 2}, {3, 4}}, Severity::warning, "w"}};
  nlohmann::json j = ds;
  EXPECT_EQ(j.get<DiagnosticSet>(), ds);
  Scope s{SourceRange::lines(1, 2)};
  nlohmann::json js = s;
  EXPECT_EQ(js.get<Scope>(), s);
}
