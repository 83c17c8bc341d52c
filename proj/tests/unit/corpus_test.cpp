#include <gtest/gtest.h>

#include "test_env.hpp"
#include "verirefine/corpus.hpp"

using namespace verirefine;

namespace {
nlohmann::json rec(int index, std::string env, std::string proof = "") {
  return {{"index", index},
          {"label", "l" + std::to_string(index)},
          {"env", env},
          {"number_components", {1, index}},
          {"extracted_labels", nlohmann::json::array()},
          {"context", {{"chapter_number", 1}, {"chapter", "C"}, {"section_number", "1.1"}, {"section", "S"}}},
          {"content", "c"},
          {"dependencies", nlohmann::json::array()},
          {"proof", proof}};
}
}  // namespace

TEST(Corpus, SortsAndRoundTripsExtras) {
  auto b = rec(2, "lemma", "p");
  b["lean"] = {{"name", "x"}};
  const auto records = parse_dataset(nlohmann::json::array({b, rec(1, "theorem")}));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].index, 1);
  EXPECT_EQ(records[1].extras["lean"]["name"], "x");
  nlohmann::json again = records[1];
  EXPECT_EQ(parse_record(again, 0), records[1]);
}

TEST(Corpus, RejectsDuplicatesAndMissingFields) {
  EXPECT_THROW(parse_dataset(nlohmann::json::array({rec(1, "theorem"), rec(1, "lemma")})), DatasetError);
  auto broken = rec(3, "theorem");
  broken.erase("label");
  EXPECT_THROW(parse_dataset(nlohmann::json::array({broken})), DatasetError);
  EXPECT_THROW(parse_dataset(nlohmann::json::object()), DatasetError);
}

TEST(Corpus, ProofTargets) {
  EXPECT_TRUE(is_proof_target(parse_record(rec(1, "theorem", "by induction"), 0)));
  EXPECT_FALSE(is_proof_target(parse_record(rec(1, "theorem"), 0)));
  EXPECT_FALSE(is_proof_target(parse_record(rec(1, "remark", "p"), 0)));
  ProofTargetPolicy lax;
  lax.require_reference_proof = false;
  EXPECT_TRUE(is_proof_target(parse_record(rec(1, "lemma"), 0), lax));
}

TEST(Corpus, LemmaMapShapes) {
  const auto as_array = parse_lemma_map(nlohmann::json::array(
      {{{"problem_id", "p1"}, {"decl_hints", {"A.b"}}}}));
  const auto as_object = parse_lemma_map({{"p1", {{"decl_hints", {"A.b"}}}}});
  EXPECT_EQ(as_array.at("p1").decl_hints, as_object.at("p1").decl_hints);
}

TEST(Corpus, ToyDatasetIsLargeEnough) {
  const auto records = testenv::toy_records();
  std::size_t targets = 0;
  for (const auto& r : records) targets += is_proof_target(r);
  EXPECT_GE(records.size(), 20u);
  EXPECT_GE(targets, 10u);
}
