#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lazyb/types.hpp"

namespace lazyb {

class Catalog;

/// xoshiro256** seeded through splitmix64. Fixed here so traces are
/// reproducible across platforms and standard-library versions.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform();

 private:
  std::uint64_t s_[4];
};

/// Step-function CDF over positive integer lengths.
class LengthDistribution {
 public:
  struct Point {
    std::uint32_t length;
    double cumulative_prob;
  };

  LengthDistribution() = default;
  /// Throws ValidationError unless lengths and probabilities are strictly
  /// increasing and the last probability is 1.
  explicit LengthDistribution(std::vector<Point> cdf);

  const std::vector<Point>& points() const { return cdf_; }
  bool empty() const { return cdf_.empty(); }
  std::uint32_t max_len() const { return cdf_.empty() ? 0 : cdf_.back().length; }
  double mean() const;
  /// P(L <= length).
  double cdf_at(std::uint32_t length) const;

  static LengthDistribution parse_csv(std::istream& in);
  static LengthDistribution load_csv(const std::string& path);
  /// Synthetic English->German output-length profile, truncated at 80 words.
  static const LengthDistribution& default_en_de();

 private:
  std::vector<Point> cdf_;
};

/// Inverse-CDF lookup: smallest length whose cumulative probability exceeds u.
std::uint32_t sample_length(const LengthDistribution& dist, double u);

struct InferenceRequest {
  std::uint64_t id = 0;
  Micros arrival_us = 0;
  std::string model;
  std::uint32_t actual_dec_timesteps = 1;

  bool operator==(const InferenceRequest&) const = default;
};

struct TrafficConfig {
  double rate_qps = 0.0;
  Micros duration_us = 0;
  std::uint64_t seed = 0;
  std::string model_name;
  bool dynamic_model = false;
  LengthDistribution length_dist;
};

/// Open-loop Poisson arrivals over [0, duration_us].
std::vector<InferenceRequest> gen_trace(const TrafficConfig& cfg);

void write_trace(std::ostream& out, const std::vector<InferenceRequest>& trace);
void write_trace(const std::string& path, const std::vector<InferenceRequest>& trace);
/// Reads and validates a trace; model names must exist in `catalog`.
std::vector<InferenceRequest> read_trace(std::istream& in, const Catalog& catalog);
std::vector<InferenceRequest> read_trace(const std::string& path, const Catalog& catalog);

enum class LoadBand { Low, Medium, Heavy };
LoadBand classify_load(double rate_qps);
std::string to_string(LoadBand band);

}  // namespace lazyb
