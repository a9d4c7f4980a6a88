#include "lazyb/slack.hpp"

#include "lazyb/catalog.hpp"

namespace lazyb {

std::uint32_t coverage_threshold(const LengthDistribution& dist, double n) {
  require(!dist.empty(), "coverage_threshold: empty distribution");
  require(n > 0.0 && n <= 1.0, "coverage_threshold: coverage must lie in (0, 1]");
  for (const auto& p : dist.points()) {
    // Tolerate representation error in profiles such as 0.1 + 0.2.
    if (p.cumulative_prob >= n - 1e-12) return p.length;
  }
  return dist.max_len();
}

Micros single_input_exec_time(const ModelGraph& model, std::uint32_t enc_t, std::uint32_t dec_t) {
  Micros total = 0;
  for (const auto& n : model.nodes()) {
    switch (n.kind) {
      case NodeKind::Static: total += n.base_latency_us; break;
      case NodeKind::Encoder: total += n.base_latency_us * enc_t; break;
      case NodeKind::Decoder: total += n.base_latency_us * dec_t; break;
    }
  }
  return total;
}

Micros remaining_single_exec_time(const ModelGraph& model, const NodeCursor& next,
                                  std::uint32_t enc_t, std::uint32_t dec_t) {
  const auto& nodes = model.nodes();
  const auto n = static_cast<std::uint32_t>(nodes.size());
  auto sum_range = [&](std::uint32_t b, std::uint32_t e) {
    Micros s = 0;
    for (std::uint32_t i = b; i < e; ++i) s += nodes[i].base_latency_us;
    return s;
  };
  if (!model.is_dynamic()) return sum_range(next.node_id, n);

  const Micros enc_step = sum_range(model.enc_begin(), model.enc_end());
  const Micros dec_step = sum_range(model.dec_begin(), model.dec_end());
  const Micros epilogue = sum_range(model.dec_end(), n);
  const std::uint32_t id = next.node_id;
  if (id < model.enc_begin()) {
    return sum_range(id, model.enc_begin()) + enc_step * enc_t + dec_step * dec_t + epilogue;
  }
  if (id < model.enc_end()) {
    const std::uint32_t t = next.timestep;
    const Micros rest_of_step = sum_range(id, model.enc_end());
    const Micros later = enc_t > t + 1 ? enc_step * (enc_t - t - 1) : 0;
    return rest_of_step + later + dec_step * dec_t + epilogue;
  }
  if (id < model.dec_end()) {
    const std::uint32_t t = next.timestep;
    const std::uint32_t steps = std::max(dec_t, t + 1);
    return sum_range(id, model.dec_end()) + dec_step * (steps - t - 1) + epilogue;
  }
  return sum_range(id, n);
}

SlackEstimate slack(const SlackConfig& cfg, Micros t_wait_us, std::span<const Micros> exec_times_us) {
  require(!exec_times_us.empty(), "slack: need at least one execution time");
  require(t_wait_us >= 0, "slack: T_wait must be non-negative");
  Micros sum = 0;
  for (Micros e : exec_times_us) sum += e;
  return SlackEstimate{cfg.sla_target_us - (t_wait_us + sum), t_wait_us, sum};
}

std::uint32_t predicted_dec_timesteps(const CatalogEntry& entry, const SlackConfig& cfg) {
  if (!entry.graph.is_dynamic()) return 1;
  if (cfg.dec_timesteps) return *cfg.dec_timesteps;
  if (entry.dec_timesteps) return *entry.dec_timesteps;
  return coverage_threshold(entry.length_dist, cfg.coverage_n);
}

}  // namespace lazyb
