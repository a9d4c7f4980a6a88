#include <gtest/gtest.h>

#include "lazyb/batch_state_table.hpp"
#include "oracles.hpp"

using namespace lazyb;

namespace {

constexpr NodeCursor A{0, 0}, B{1, 0}, C{2, 0};

}  // namespace

TEST(BatchStateTable, PushOntoEmptyBecomesActive) {
  BatchStateTable bst;
  EXPECT_EQ(bst.active(), nullptr);
  bst.push({1}, A, "m");
  ASSERT_NE(bst.active(), nullptr);
  EXPECT_EQ(bst.active()->request_ids, std::vector<RequestId>{1});
  EXPECT_EQ(bst.depth(), 1u);
}

TEST(BatchStateTable, PushRejectsDuplicatesAndEmpty) {
  BatchStateTable bst;
  bst.push({1}, A, "m");
  EXPECT_THROW(bst.push({1}, A, "m"), ValidationError);
  EXPECT_THROW(bst.push({2, 2}, A, "m"), ValidationError);
  EXPECT_THROW(bst.push({}, A, "m"), ValidationError);
  EXPECT_EQ(bst.depth(), 1u);
}

TEST(BatchStateTable, PreemptionReplay) {
  // Req1 runs ahead; Req2 and then Req3 are pushed and catch up in turn.
  EventLog log;
  BatchStateTable bst(&log);
  bst.push({1}, A, "m");
  bst.advance_top(B);
  bst.advance_top(C);
  bst.push({2}, A, "m");
  EXPECT_EQ(bst.dump(), "{1}@2@0;{2}@0@0");
  EXPECT_EQ(bst.active()->request_ids, std::vector<RequestId>{2});

  EXPECT_FALSE(bst.advance_top(B).merged);
  bst.push({3}, A, "m");
  EXPECT_EQ(bst.active()->request_ids, std::vector<RequestId>{3});
  EXPECT_EQ(bst.active()->next, A);
  EXPECT_EQ(bst.depth(), 3u);

  auto m1 = bst.advance_top(B);
  EXPECT_TRUE(m1.merged);
  EXPECT_EQ(bst.dump(), "{1}@2@0;{2 3}@1@0");
  auto m2 = bst.advance_top(C);
  EXPECT_EQ(m2.merges, 1u);
  EXPECT_EQ(bst.dump(), "{1 2 3}@2@0");
  EXPECT_EQ(bst.depth(), 1u);

  std::vector<std::string> events;
  for (const auto& l : log.lines()) events.push_back(l.event);
  EXPECT_EQ(events, (std::vector<std::string>{"push", "advance", "advance", "push", "advance", "push",
                                              "advance", "merge", "advance", "merge"}));
}

TEST(BatchStateTable, AdvanceWithoutMatchKeepsDepth) {
  BatchStateTable bst;
  bst.push({1}, C, "m");
  bst.push({2}, A, "m");
  const auto out = bst.advance_top(B);
  EXPECT_FALSE(out.merged);
  EXPECT_EQ(bst.depth(), 2u);
}

TEST(BatchStateTable, CascadingMergeOfThreeEntries) {
  BatchStateTable bst;
  bst.push({1}, C, "m");
  bst.push({2}, B, "m");
  bst.push({3}, A, "m");
  EXPECT_EQ(bst.advance_top(B).merges, 1u);
  EXPECT_EQ(bst.depth(), 2u);
  EXPECT_EQ(bst.advance_top(C).merges, 1u);
  EXPECT_EQ(bst.depth(), 1u);
  EXPECT_EQ(bst.active()->request_ids, (std::vector<RequestId>{1, 2, 3}));
}

TEST(BatchStateTable, MergeNeedsExactCursorAndModel) {
  BatchStateTable bst;
  bst.push({1}, NodeCursor{1, 3}, "m");
  bst.push({2}, A, "m");
  EXPECT_FALSE(bst.advance_top(NodeCursor{1, 2}).merged);
  EXPECT_TRUE(bst.advance_top(NodeCursor{1, 3}).merged);

  BatchStateTable two_models;
  two_models.push({1}, B, "x");
  two_models.push({2}, A, "y");
  EXPECT_FALSE(two_models.advance_top(B).merged);
  EXPECT_EQ(two_models.depth(), 2u);
}

TEST(BatchStateTable, RetireOnlyMemberPops) {
  BatchStateTable bst;
  bst.push({1}, C, "m");
  bst.push({2}, A, "m");
  bst.retire(2);
  EXPECT_EQ(bst.depth(), 1u);
  EXPECT_EQ(bst.active()->request_ids, std::vector<RequestId>{1});
  bst.retire(1);
  EXPECT_TRUE(bst.empty());
  EXPECT_EQ(bst.active(), nullptr);
}

TEST(BatchStateTable, RetireOneOfThree) {
  BatchStateTable bst;
  bst.push({4, 5, 6}, A, "m");
  bst.retire(5);
  EXPECT_EQ(bst.active()->request_ids, (std::vector<RequestId>{4, 6}));
  EXPECT_EQ(bst.active()->size(), 2u);
  EXPECT_THROW(bst.retire(5), ValidationError);
  EXPECT_THROW(bst.retire(99), ValidationError);
}

TEST(BatchStateTable, RetireBelowTopReindexes) {
  BatchStateTable bst;
  bst.push({1}, C, "m");
  bst.push({2}, B, "m");
  bst.push({3}, A, "m");
  bst.retire(1);
  EXPECT_EQ(bst.position_of(2), 0u);
  EXPECT_EQ(bst.position_of(3), 1u);
  EXPECT_THROW(bst.position_of(1), ValidationError);
}

TEST(BatchStateTable, SplitAndMergeAdjacent) {
  BatchStateTable bst;
  bst.push({1, 2, 3}, A, "m");
  bst.split(0, {{{1}, B}, {{2, 3}, C}});
  EXPECT_EQ(bst.dump(), "{1}@1@0;{2 3}@2@0");
  EXPECT_EQ(bst.position_of(3), 1u);
  EXPECT_THROW(bst.split(0, {{{9}, B}}), InvariantError);
  bst.set_next(0, C);
  EXPECT_EQ(bst.merge_adjacent(), 1u);
  EXPECT_EQ(bst.dump(), "{1 2 3}@2@0");
}

TEST(BatchStateTable, AdvanceOnEmptyIsAnInvariantBreach) {
  BatchStateTable bst;
  EXPECT_THROW(bst.advance_top(A), InvariantError);
}

TEST(BatchStateTable, ActiveIsConstantCost) {
  BatchStateTable bst;
  for (RequestId i = 0; i < 1000; ++i) bst.push({i}, NodeCursor{i, 0}, "m");
  const auto before = bst.active_probes();
  for (int i = 0; i < 100; ++i) ASSERT_NE(bst.active(), nullptr);
  EXPECT_EQ(bst.active_probes() - before, 100u);
}

TEST(BatchStateTable, LogFormat) {
  EventLog log;
  BatchStateTable bst(&log);
  log.set_time(7);
  bst.push({1, 0}, A, "m");
  bst.retire(0);
  EXPECT_EQ(log.str(), "time_us,event,entry_dump\n7,push,{0 1}@0@0\n7,retire,0 {1}@0@0\n");
}

TEST(BatchStateTableFuzz, AgreesWithReferenceStack) {
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto err = oracle::bst_fuzz_sequence(seed, 40);
    ASSERT_TRUE(err.empty()) << err;
  }
}
