#include "lazyb/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lazyb/catalog.hpp"
#include "lazyb/shipped_data.hpp"

namespace lazyb {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  T v{};
  try {
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(s, &pos);
    } else if constexpr (std::is_signed_v<T>) {
      v = static_cast<T>(std::stoll(s, &pos));
    } else {
      require(!s.empty() && s[0] != '-', what + ": negative value '" + s + "'");
      v = static_cast<T>(std::stoull(s, &pos));
    }
  } catch (const std::logic_error&) {
    throw ValidationError(what + ": cannot parse '" + s + "'");
  }
  require(pos == s.size(), what + ": trailing characters in '" + s + "'");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

LengthDistribution::LengthDistribution(std::vector<Point> cdf) : cdf_(std::move(cdf)) {
  require(!cdf_.empty(), "length distribution must not be empty");
  for (std::size_t i = 0; i < cdf_.size(); ++i) {
    require(cdf_[i].length >= 1, "length distribution: lengths must be positive");
    require(cdf_[i].cumulative_prob > 0.0 && cdf_[i].cumulative_prob <= 1.0,
            "length distribution: probabilities must lie in (0, 1]");
    if (i > 0) {
      require(cdf_[i].length > cdf_[i - 1].length,
              "length distribution: lengths must be strictly increasing");
      require(cdf_[i].cumulative_prob > cdf_[i - 1].cumulative_prob,
              "length distribution: probabilities must be strictly increasing");
    }
  }
  require(cdf_.back().cumulative_prob == 1.0,
          "length distribution: final cumulative probability must be 1.0");
}

double LengthDistribution::mean() const {
  double m = 0.0, prev = 0.0;
  for (const auto& p : cdf_) {
    m += p.length * (p.cumulative_prob - prev);
    prev = p.cumulative_prob;
  }
  return m;
}

double LengthDistribution::cdf_at(std::uint32_t length) const {
  double c = 0.0;
  for (const auto& p : cdf_) {
    if (p.length > length) break;
    c = p.cumulative_prob;
  }
  return c;
}

LengthDistribution LengthDistribution::parse_csv(std::istream& in) {
  // Lines starting with '#' are comments.
  std::string line;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    strip_cr(line);
    have_header = !line.starts_with('#');
  }
  require(have_header, "length CDF: missing header");
  require(line == "length,cumulative_prob", "length CDF: unexpected header '" + line + "'");
  std::vector<Point> pts;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty() || line.starts_with('#')) continue;
    auto cells = split_csv_line(line);
    require(cells.size() == 2, "length CDF: expected 2 columns in '" + line + "'");
    pts.push_back({parse_number<std::uint32_t>(cells[0], "length CDF length"),
                   parse_number<double>(cells[1], "length CDF probability")});
  }
  return LengthDistribution(std::move(pts));
}

LengthDistribution LengthDistribution::load_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open length CDF '" + path + "'");
  return parse_csv(in);
}

const LengthDistribution& LengthDistribution::default_en_de() {
  static const LengthDistribution dist = [] {
    std::istringstream in(shipped::kLengthCdfCsv);
    return parse_csv(in);
  }();
  return dist;
}

std::uint32_t sample_length(const LengthDistribution& dist, double u) {
  require(!dist.empty(), "sample_length: empty distribution");
  u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
  for (const auto& p : dist.points()) {
    if (p.cumulative_prob > u) return p.length;
  }
  return dist.max_len();
}

std::vector<InferenceRequest> gen_trace(const TrafficConfig& cfg) {
  require(cfg.rate_qps > 0.0 && std::isfinite(cfg.rate_qps), "gen_trace: rate must be > 0");
  require(cfg.duration_us > 0, "gen_trace: duration must be > 0");
  require(!cfg.model_name.empty(), "gen_trace: model name required");
  require(!cfg.dynamic_model || !cfg.length_dist.empty(),
          "gen_trace: dynamic model requires a length distribution");

  // Separate streams so the arrival process does not depend on whether
  // lengths are sampled.
  Xoshiro256 arrivals(cfg.seed);
  Xoshiro256 lengths(cfg.seed ^ 0x6c656e6774687321ULL);
  const double mean_gap_us = 1e6 / cfg.rate_qps;

  std::vector<InferenceRequest> out;
  Micros t = 0;
  for (std::uint64_t id = 0;; ++id) {
    const double u = 1.0 - arrivals.uniform();  // (0, 1]
    t += static_cast<Micros>(std::llround(-std::log(u) * mean_gap_us));
    if (t > cfg.duration_us) break;
    InferenceRequest r;
    r.id = id;
    r.arrival_us = t;
    r.model = cfg.model_name;
    r.actual_dec_timesteps =
        cfg.dynamic_model ? sample_length(cfg.length_dist, lengths.uniform()) : 1;
    out.push_back(std::move(r));
  }
  return out;
}

void write_trace(std::ostream& out, const std::vector<InferenceRequest>& trace) {
  out << "id,arrival_us,model,actual_dec_timesteps\n";
  for (const auto& r : trace) {
    out << r.id << ',' << r.arrival_us << ',' << r.model << ',' << r.actual_dec_timesteps << '\n';
  }
}

void write_trace(const std::string& path, const std::vector<InferenceRequest>& trace) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write trace '" + path + "'");
  write_trace(out, trace);
}

std::vector<InferenceRequest> read_trace(std::istream& in, const Catalog& catalog) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "trace: missing header");
  strip_cr(line);
  require(line == "id,arrival_us,model,actual_dec_timesteps",
          "trace: unexpected header '" + line + "'");
  std::vector<InferenceRequest> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    const std::string where = "trace row " + std::to_string(row);
    auto cells = split_csv_line(line);
    require(cells.size() == 4, where + ": expected 4 columns");
    InferenceRequest r;
    r.id = parse_number<std::uint64_t>(cells[0], where + " id");
    r.arrival_us = parse_number<Micros>(cells[1], where + " arrival_us");
    r.model = cells[2];
    r.actual_dec_timesteps = parse_number<std::uint32_t>(cells[3], where + " actual_dec_timesteps");
    require(r.arrival_us >= 0, where + ": negative arrival");
    const auto* entry = catalog.find(r.model);
    require(entry != nullptr, where + ": unknown model '" + r.model + "'");
    require(r.actual_dec_timesteps >= 1, where + ": actual_dec_timesteps must be >= 1");
    if (entry->graph.is_dynamic()) {
      require(r.actual_dec_timesteps <= entry->graph.max_dec_timesteps(),
              where + ": actual_dec_timesteps exceeds the model maximum");
    }
    if (!out.empty()) {
      require(r.arrival_us >= out.back().arrival_us, where + ": arrivals must be non-decreasing");
      require(r.id > out.back().id, where + ": ids must be strictly increasing");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<InferenceRequest> read_trace(const std::string& path, const Catalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open trace '" + path + "'");
  return read_trace(in, catalog);
}

LoadBand classify_load(double rate_qps) {
  if (rate_qps < 256.0) return LoadBand::Low;
  if (rate_qps <= 500.0) return LoadBand::Medium;
  return LoadBand::Heavy;
}

std::string to_string(LoadBand band) {
  switch (band) {
    case LoadBand::Low: return "low";
    case LoadBand::Medium: return "medium";
    case LoadBand::Heavy: return "heavy";
  }
  return "?";
}

}  // namespace lazyb
