#include <gtest/gtest.h>

#include <sstream>

#include "lazyb/catalog.hpp"
#include "lazyb/traffic.hpp"
#include "oracles.hpp"

using namespace lazyb;

namespace {

TrafficConfig cfg(double rate, Micros duration, std::uint64_t seed, const std::string& model = "resnet") {
  TrafficConfig c;
  c.rate_qps = rate;
  c.duration_us = duration;
  c.seed = seed;
  c.model_name = model;
  if (model != "resnet") {
    c.dynamic_model = true;
    c.length_dist = Catalog::shipped().at(model).length_dist;
  }
  return c;
}

std::string csv(const std::vector<InferenceRequest>& t) {
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

const LengthDistribution& three_point() {
  static const LengthDistribution d({{20, 0.70}, {30, 0.90}, {80, 1.0}});
  return d;
}

}  // namespace

TEST(GenTrace, MeanGapAtSixteenQps) {
  // Long enough for well over 1e5 gaps.
  const auto t = gen_trace(cfg(16.0, 7'000'000'000LL, 3));
  ASSERT_GE(t.size(), 100'000u);
  const double mean = static_cast<double>(t.back().arrival_us) / static_cast<double>(t.size());
  EXPECT_NEAR(mean, 62'500.0, 62'500.0 * 0.02);
}

TEST(GenTrace, CountAtThousandQpsOverOneSecond) {
  const auto t = gen_trace(cfg(1000.0, 1'000'000, 11));
  EXPECT_NEAR(static_cast<double>(t.size()), 1000.0, 100.0);
}

TEST(GenTrace, SameSeedSameBytes) {
  const auto a = gen_trace(cfg(250.0, 2'000'000, 42, "gnmt"));
  const auto b = gen_trace(cfg(250.0, 2'000'000, 42, "gnmt"));
  EXPECT_EQ(csv(a), csv(b));
  const auto c = gen_trace(cfg(250.0, 2'000'000, 43, "gnmt"));
  EXPECT_NE(csv(a), csv(c));
}

TEST(GenTrace, OrderedIdsAndBoundedArrivals) {
  const auto t = gen_trace(cfg(500.0, 3'000'000, 5, "transformer"));
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i].id, i);
    EXPECT_LE(t[i].arrival_us, 3'000'000);
    EXPECT_GE(t[i].actual_dec_timesteps, 1u);
    EXPECT_LE(t[i].actual_dec_timesteps, 80u);
    if (i > 0) EXPECT_GE(t[i].arrival_us, t[i - 1].arrival_us);
  }
}

TEST(GenTrace, StaticModelsUseLengthOne) {
  for (const auto& r : gen_trace(cfg(300.0, 1'000'000, 9))) EXPECT_EQ(r.actual_dec_timesteps, 1u);
}

TEST(GenTrace, LengthsDoNotPerturbArrivals) {
  auto a = gen_trace(cfg(300.0, 1'000'000, 9));
  auto b = gen_trace(cfg(300.0, 1'000'000, 9, "gnmt"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].arrival_us, b[i].arrival_us);
}

TEST(GenTrace, Errors) {
  EXPECT_THROW(gen_trace(cfg(0.0, 1000, 1)), ValidationError);
  EXPECT_THROW(gen_trace(cfg(-3.0, 1000, 1)), ValidationError);
  EXPECT_THROW(gen_trace(cfg(10.0, 0, 1)), ValidationError);
  auto c = cfg(10.0, 1000, 1);
  c.dynamic_model = true;
  EXPECT_THROW(gen_trace(c), ValidationError);
}

TEST(SampleLength, StepFunctionLookup) {
  EXPECT_EQ(sample_length(three_point(), 0.5), 20u);
  EXPECT_EQ(sample_length(three_point(), 0.95), 80u);
  EXPECT_EQ(sample_length(three_point(), 0.0), 20u);
  // Exactly on a step boundary moves to the next length.
  EXPECT_EQ(sample_length(three_point(), 0.70), 30u);
  EXPECT_EQ(sample_length(three_point(), 0.90), 80u);
  const LengthDistribution one({{1, 1.0}});
  for (double u : {0.0, 0.3, 0.999999, 1.0, 5.0, -1.0}) EXPECT_EQ(sample_length(one, u), 1u);
  EXPECT_EQ(sample_length(three_point(), 1.0), 80u);
}

TEST(SampleLength, ChiSquaredAgainstConfiguredCdf) {
  for (const auto* d : {&three_point(), &LengthDistribution::default_en_de()}) {
    Xoshiro256 rng(2024);
    std::vector<std::uint32_t> samples;
    for (int i = 0; i < 100'000; ++i) samples.push_back(sample_length(*d, rng.uniform()));
    EXPECT_GT(oracle::length_chi2_pvalue(*d, samples), 0.01);
  }
}

TEST(SampleLength, GeneratedTraceFollowsCdf) {
  const auto t = gen_trace(cfg(20'000.0, 5'000'000, 77, "gnmt"));
  ASSERT_GE(t.size(), 90'000u);
  std::vector<std::uint32_t> lengths;
  for (const auto& r : t) lengths.push_back(r.actual_dec_timesteps);
  EXPECT_GT(oracle::length_chi2_pvalue(Catalog::shipped().at("gnmt").length_dist, lengths), 0.01);
}

TEST(LengthDistribution, Validation) {
  using P = LengthDistribution::Point;
  EXPECT_THROW(LengthDistribution(std::vector<P>{}), ValidationError);
  EXPECT_THROW(LengthDistribution({{0, 1.0}}), ValidationError);
  EXPECT_THROW(LengthDistribution({{5, 0.5}, {4, 1.0}}), ValidationError);
  EXPECT_THROW(LengthDistribution({{5, 0.5}, {6, 0.5}, {7, 1.0}}), ValidationError);
  EXPECT_THROW(LengthDistribution({{5, 0.5}, {6, 0.9}}), ValidationError);
  EXPECT_THROW(LengthDistribution({{5, 0.0}, {6, 1.0}}), ValidationError);
}

TEST(LengthDistribution, DefaultAnchors) {
  const auto& d = LengthDistribution::default_en_de();
  EXPECT_EQ(d.max_len(), 80u);
  EXPECT_DOUBLE_EQ(d.cdf_at(20), 0.70);
  EXPECT_DOUBLE_EQ(d.cdf_at(30), 0.90);
  EXPECT_DOUBLE_EQ(d.cdf_at(80), 1.0);
}

TEST(LengthDistribution, CsvParsing) {
  std::istringstream ok("length,cumulative_prob\r\n1,0.5\r\n2,1.0\r\n");
  const auto d = LengthDistribution::parse_csv(ok);
  EXPECT_EQ(d.points().size(), 2u);
  EXPECT_DOUBLE_EQ(d.mean(), 1.5);
  std::istringstream bad_header("len,p\n1,1.0\n");
  EXPECT_THROW(LengthDistribution::parse_csv(bad_header), ValidationError);
  std::istringstream bad_row("length,cumulative_prob\n1,abc\n");
  EXPECT_THROW(LengthDistribution::parse_csv(bad_row), ValidationError);
  EXPECT_THROW(LengthDistribution::load_csv("/nonexistent/cdf.csv"), ValidationError);
  std::istringstream commented("# note\nlength,cumulative_prob\n# mid\n3,1.0\n");
  EXPECT_EQ(LengthDistribution::parse_csv(commented).max_len(), 3u);
  std::istringstream only_comments("# a\n# b\n");
  EXPECT_THROW(LengthDistribution::parse_csv(only_comments), ValidationError);
}

TEST(TraceIo, RoundTrip) {
  const std::vector<InferenceRequest> t = {
      {0, 10, "gnmt", 4}, {1, 10, "resnet", 1}, {2, 900, "transformer", 80}};
  std::istringstream in(csv(t));
  EXPECT_EQ(read_trace(in, Catalog::shipped()), t);
}

TEST(TraceIo, GeneratedRoundTripIsLossless) {
  const auto t = gen_trace(cfg(1000.0, 1'000'000, 8, "transformer"));
  std::istringstream in(csv(t));
  EXPECT_EQ(read_trace(in, Catalog::shipped()), t);
}

TEST(TraceIo, HeaderOnlyIsEmpty) {
  std::istringstream in("id,arrival_us,model,actual_dec_timesteps\n");
  EXPECT_TRUE(read_trace(in, Catalog::shipped()).empty());
}

TEST(TraceIo, RejectsMalformedInput) {
  const auto& cat = Catalog::shipped();
  const std::string h = "id,arrival_us,model,actual_dec_timesteps\n";
  for (const std::string body : {
           "0,100,resnet,1\n1,50,resnet,1\n",   // arrivals go backwards
           "0,100,alexnet,1\n",                 // unknown model
           "0,100,resnet\n",                    // missing column
           "0,-5,resnet,1\n",                   // negative arrival
           "0,100,gnmt,0\n",                    // zero length
           "0,100,gnmt,81\n",                   // beyond max decoder length
           "0,100,resnet,1\n0,200,resnet,1\n",  // duplicate id
           "x,100,resnet,1\n",                  // not a number
       }) {
    std::istringstream in(h + body);
    EXPECT_THROW(read_trace(in, cat), ValidationError) << body;
  }
  std::istringstream no_header("");
  EXPECT_THROW(read_trace(no_header, cat), ValidationError);
  std::istringstream wrong_header("a,b,c,d\n");
  EXPECT_THROW(read_trace(wrong_header, cat), ValidationError);
  EXPECT_THROW(read_trace("/nonexistent/trace.csv", cat), ValidationError);
}

TEST(TraceIo, EqualArrivalsAllowed) {
  std::istringstream in("id,arrival_us,model,actual_dec_timesteps\n0,5,resnet,1\n1,5,resnet,1\n");
  EXPECT_EQ(read_trace(in, Catalog::shipped()).size(), 2u);
}

TEST(LoadBand, Boundaries) {
  EXPECT_EQ(classify_load(16), LoadBand::Low);
  EXPECT_EQ(classify_load(255.9), LoadBand::Low);
  EXPECT_EQ(classify_load(256), LoadBand::Medium);
  EXPECT_EQ(classify_load(500), LoadBand::Medium);
  EXPECT_EQ(classify_load(500.1), LoadBand::Heavy);
  EXPECT_EQ(classify_load(1000), LoadBand::Heavy);
  EXPECT_EQ(to_string(LoadBand::Medium), "medium");
}
