#include <gtest/gtest.h>

#include <random>

#include "lazyb/cost_model.hpp"
#include "lazyb/execution.hpp"
#include "oracles.hpp"

using namespace lazyb;

TEST(CellularBatchable, Examples) {
  const auto& g = Catalog::shipped().at("gnmt").graph;
  // Decoder cell (dec_lstm, group 3) at different timesteps.
  EXPECT_TRUE(cellular_batchable({4, 3}, g, {4, 7}, g));
  // Embedding prologue versus a decoder cell.
  EXPECT_FALSE(cellular_batchable({0, 0}, g, {4, 2}, g));
  EXPECT_TRUE(cellular_batchable({0, 0}, g, {0, 0}, g));
  // Different groups.
  EXPECT_FALSE(cellular_batchable({3, 0}, g, {4, 0}, g));
  const auto& t = Catalog::shipped().at("transformer").graph;
  EXPECT_FALSE(cellular_batchable({1, 0}, g, {1, 0}, t));
  // No weight groups at all: only the same node qualifies.
  EXPECT_TRUE(cellular_batchable({3, 1}, t, {3, 5}, t));
  EXPECT_FALSE(cellular_batchable({3, 1}, t, {4, 1}, t));
}

TEST(PlanStep, TopEntryOnlyByDefault) {
  const auto cat = oracle::catalog_of({oracle::entry(oracle::spec("m", "S100 S200 S300"))});
  BatchStateTable bst;
  bst.push({0, 1}, {2, 0}, "m");
  bst.push({2, 3, 4}, {0, 0}, "m");
  const auto p = plan_step(bst, cat, false);
  EXPECT_EQ(p.positions, std::vector<std::size_t>{1});
  EXPECT_EQ(p.batch, 3u);
  EXPECT_EQ(p.duration_us, 100);
  EXPECT_EQ(p.cursor, (NodeCursor{0, 0}));
  EXPECT_THROW(plan_step(BatchStateTable{}, cat, false), InvariantError);
}

TEST(PlanStep, CoScheduleJoinsSharedCells) {
  const auto cat = oracle::catalog_of({oracle::entry(oracle::spec("r", "E100/0 D100/0", 4, 8, 2))});
  BatchStateTable bst;
  bst.push({0, 1}, {1, 3}, "r");
  bst.push({2}, {0, 0}, "r");
  const auto p = plan_step(bst, cat, true);
  EXPECT_EQ(p.positions, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(p.batch, 3u);
  EXPECT_EQ(p.duration_us, 150);  // ceil(100 * 3 / 2)
  auto lengths = [](RequestId) { return 8u; };
  apply_step(bst, p, lengths);
  EXPECT_EQ(bst.dump(), "{0 1}@1@4;{2}@0@1");
}

TEST(ApplyStep, ShorterDecoderSplitsTowardEpilogue) {
  const auto cat = oracle::catalog_of({oracle::entry(oracle::spec("m", "S10 E10 D10 S10", 1, 3))});
  BatchStateTable bst;
  bst.push({0, 1}, {2, 0}, "m");
  auto len = [](RequestId id) { return id == 0 ? 1u : 3u; };
  const auto out = apply_step(bst, plan_step(bst, cat, false), len);
  EXPECT_TRUE(out.split);
  EXPECT_TRUE(out.retired.empty());
  // The group that moved on to the epilogue sits on top.
  EXPECT_EQ(bst.dump(), "{1}@2@1;{0}@3@0");
  const auto done = apply_step(bst, plan_step(bst, cat, false), len);
  EXPECT_EQ(done.retired, std::vector<RequestId>{0});
  EXPECT_EQ(bst.dump(), "{1}@2@1");
}

TEST(ApplyStep, RetiresAtTrueEndWithoutEpilogue) {
  const auto cat = oracle::catalog_of({oracle::entry(oracle::spec("m", "E10 D10", 1, 3))});
  BatchStateTable bst;
  bst.push({1, 2}, {1, 1}, "m");
  auto len = [](RequestId id) { return id + 1; };
  const auto out = apply_step(bst, plan_step(bst, cat, false), len);
  EXPECT_EQ(out.retired, std::vector<RequestId>{1});
  EXPECT_FALSE(out.split);
  EXPECT_EQ(bst.dump(), "{2}@1@2");
}

TEST(ApplyStep, MergesWhenCaughtUp) {
  const auto cat = oracle::catalog_of({oracle::entry(oracle::spec("m", "S10 S10 S10"))});
  BatchStateTable bst;
  bst.push({0}, {1, 0}, "m");
  bst.push({1}, {0, 0}, "m");
  const auto out = apply_step(bst, plan_step(bst, cat, false), [](RequestId) { return 1u; });
  EXPECT_EQ(out.merges, 1u);
  EXPECT_EQ(bst.dump(), "{0 1}@1@0");
}

TEST(DrainTime, SingleEntryMatchesWholeGraphBatchTime) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    const auto sat = static_cast<std::uint32_t>(1 + rng() % 8);
    const auto enc = static_cast<std::uint32_t>(1 + rng() % 4);
    const auto max_dec = static_cast<std::uint32_t>(1 + rng() % 6);
    const bool epilogue = rng() % 2;
    const std::string nodes = std::string("S") + std::to_string(1 + rng() % 50) + " E" +
                              std::to_string(1 + rng() % 50) + " D" + std::to_string(1 + rng() % 50) +
                              " D" + std::to_string(1 + rng() % 50) +
                              (epilogue ? " S" + std::to_string(1 + rng() % 50) : "");
    const auto cat = oracle::catalog_of({oracle::entry(oracle::spec("m", nodes, enc, max_dec, sat))});
    const auto& g = cat.at("m").graph;
    const auto n = 1 + rng() % 20;
    std::vector<RequestId> ids;
    std::vector<std::uint32_t> decs;
    for (RequestId k = 0; k < n; ++k) {
      ids.push_back(k);
      decs.push_back(static_cast<std::uint32_t>(1 + rng() % max_dec));
    }
    BatchStateTable bst;
    bst.push(ids, g.first_cursor(), "m");
    const Micros got = drain_time(bst, cat, [&](RequestId id) { return decs[id]; });
    EXPECT_EQ(got, oracle::graph_batch_time(g, decs)) << nodes;
    EXPECT_EQ(bst.in_flight(), n);  // taken by value
  }
}

TEST(DrainTime, CatchUpThenMerge) {
  // One request at node 2 of 3, two fresh ones: 2 nodes at batch 2, then
  // the last node at batch 3.
  const auto cat = oracle::catalog_of({oracle::entry(oracle::spec("m", "S100 S100 S100", 1, 1, 2))});
  BatchStateTable bst;
  bst.push({0}, {2, 0}, "m");
  bst.push({1, 2}, {0, 0}, "m");
  EXPECT_EQ(drain_time(bst, cat, [](RequestId) { return 1u; }), 100 + 100 + 150);
}
