#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "lazyb/catalog.hpp"
#include "lazyb/cost_model.hpp"
#include "oracles.hpp"

using namespace lazyb;

namespace {
NodeTemplate node(Micros l1, std::uint32_t s) {
  NodeTemplate n;
  n.base_latency_us = l1;
  n.saturation_batch = s;
  return n;
}
}  // namespace

TEST(NodeLatency, Examples) {
  EXPECT_EQ(node_latency(node(1000, 16), 1), 1000);
  EXPECT_EQ(node_latency(node(1000, 16), 16), 1000);
  EXPECT_EQ(node_latency(node(1000, 16), 32), 2000);
  EXPECT_EQ(node_latency(node(7, 4), 6), 11);
}

TEST(NodeLatency, ZeroBatchRejected) {
  EXPECT_THROW(node_latency(node(10, 4), 0), ValidationError);
}

TEST(NodeLatency, MatchesReferenceAndInvariants) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) {
    const Micros l1 = 1 + static_cast<Micros>(rng() % 2000);
    const auto s = 1 + static_cast<std::uint32_t>(rng() % 64);
    const auto n = node(l1, s);
    Micros prev = 0;
    for (std::uint32_t b = 1; b <= 80; ++b) {
      const Micros lat = node_latency(n, b);
      ASSERT_EQ(lat, oracle::node_latency(l1, s, b));
      ASSERT_GE(lat, prev);  // non-decreasing
      ASSERT_LE(lat, static_cast<Micros>(b) * l1);  // batching never worse than serial
      if (b <= s) ASSERT_EQ(lat, l1);
      prev = lat;
    }
  }
}

TEST(ThroughputCurve, OneNodeExample) {
  const auto g = build_model(oracle::spec("m", "S1000"));
  const std::vector<std::uint32_t> b{1, 16, 32};
  const auto c = throughput_curve(g, b);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].total_latency_us, 1000);
  EXPECT_EQ(c[1].total_latency_us, 1000);
  EXPECT_EQ(c[2].total_latency_us, 2000);
  EXPECT_DOUBLE_EQ(c[0].throughput_per_s, 1000.0);
  EXPECT_DOUBLE_EQ(c[1].throughput_per_s, 16000.0);
  EXPECT_DOUBLE_EQ(c[2].throughput_per_s, 16000.0);
}

TEST(ThroughputCurve, BatchOneAverageIsSingleLatency) {
  for (const auto& name : Catalog::shipped().names()) {
    const auto& g = Catalog::shipped().at(name).graph;
    const std::vector<std::uint32_t> b{1};
    const auto c = throughput_curve(g, b);
    EXPECT_DOUBLE_EQ(c[0].avg_latency_per_input_us,
                     static_cast<double>(oracle::single_input(g, g.calibration_dec_timesteps())));
  }
}

TEST(ThroughputCurve, ResnetMonotone) {
  const auto& g = Catalog::shipped().at("resnet").graph;
  std::vector<std::uint32_t> b(64);
  std::iota(b.begin(), b.end(), 1u);
  const auto c = throughput_curve(g, b);
  EXPECT_GE(c[31].throughput_per_s, c[15].throughput_per_s);
  EXPECT_GE(c[15].throughput_per_s, c[0].throughput_per_s);
  // Up to the saturation batch the whole graph costs the same, so throughput
  // grows strictly; beyond it each of the 3 nodes rounds up by under 1 us.
  const double peak = 16.0 / 1100.0 * 1e6;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i].batch <= 16) {
      EXPECT_GT(c[i].throughput_per_s, c[i - 1].throughput_per_s);
      EXPECT_LT(c[i].avg_latency_per_input_us, c[i - 1].avg_latency_per_input_us);
    } else {
      const double b = c[i].batch;
      EXPECT_LE(c[i].throughput_per_s, peak + 1e-9);
      EXPECT_GE(c[i].throughput_per_s, b / (1100.0 * b / 16.0 + 3.0) * 1e6);
    }
  }
}

TEST(ThroughputCurve, DynamicModelMatchesReferenceUnroll) {
  const auto& g = Catalog::shipped().at("gnmt").graph;
  const std::vector<std::uint32_t> b{1, 5, 16, 17, 64};
  const auto c = throughput_curve(g, b);
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::vector<std::uint32_t> decs(b[i], g.calibration_dec_timesteps());
    EXPECT_EQ(c[i].total_latency_us, oracle::graph_batch_time(g, decs));
  }
}

TEST(ThroughputCurve, EmptyListRejected) {
  const auto g = build_model(oracle::spec("m", "S10"));
  EXPECT_THROW(throughput_curve(g, {}), ValidationError);
}

TEST(Calibrate, Examples) {
  const std::vector<double> thirds{1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_EQ(calibrate(thirds, 1100), (std::vector<Micros>{367, 367, 366}));
  const std::vector<double> one{1.0};
  EXPECT_EQ(calibrate(one, 2400), (std::vector<Micros>{2400}));
  const std::vector<double> halves{0.5, 0.5};
  EXPECT_EQ(calibrate(halves, 7), (std::vector<Micros>{4, 3}));
}

TEST(Calibrate, Errors) {
  const std::vector<double> zero{0.0, 1.0};
  EXPECT_THROW(calibrate(zero, 10), ValidationError);
  const std::vector<double> bad_sum{0.5, 0.6};
  EXPECT_THROW(calibrate(bad_sum, 10), ValidationError);
  const std::vector<double> three{0.2, 0.3, 0.5};
  EXPECT_THROW(calibrate(three, 2), ValidationError);
}

TEST(Calibrate, SumsExactlyAndStaysClose) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> w(n);
    double total = 0;
    for (auto& x : w) total += (x = 1.0 + static_cast<double>(rng() % 1000));
    for (auto& x : w) x /= total;
    // Renormalize so the sum is within tolerance.
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    w.back() += 1.0 - s;
    const Micros target = static_cast<Micros>(n) * 1000 + static_cast<Micros>(rng() % 100000);
    const auto out = calibrate(w, target);
    ASSERT_EQ(std::accumulate(out.begin(), out.end(), Micros{0}), target);
    for (std::size_t k = 0; k < n; ++k) {
      ASSERT_GE(out[k], 1);
      ASSERT_LE(std::abs(static_cast<double>(out[k]) - w[k] * static_cast<double>(target)), 1.0 + 1e-6);
    }
  }
}
