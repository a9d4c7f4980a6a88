#include "lazyb/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lazyb {

Micros node_latency(const NodeTemplate& node, std::uint32_t batch) {
  require(batch >= 1, "batch size must be >= 1");
  const Micros l1 = node.base_latency_us;
  const Micros s = node.saturation_batch;
  const Micros scaled = (l1 * static_cast<Micros>(batch) + s - 1) / s;
  return std::max(l1, scaled);
}

Micros batched_graph_latency(const ModelGraph& model, std::uint32_t batch,
                             std::uint32_t dec_timesteps) {
  Micros total = 0;
  for (const auto& n : model.nodes()) {
    Micros reps = 1;
    if (n.kind == NodeKind::Encoder) reps = model.enc_timesteps();
    if (n.kind == NodeKind::Decoder) reps = dec_timesteps;
    total += node_latency(n, batch) * reps;
  }
  return total;
}

std::vector<CurvePoint> throughput_curve(const ModelGraph& model,
                                         std::span<const std::uint32_t> batch_sizes) {
  require(!batch_sizes.empty(), "throughput_curve: empty batch list");
  std::vector<CurvePoint> out;
  out.reserve(batch_sizes.size());
  for (std::uint32_t b : batch_sizes) {
    require(b >= 1, "throughput_curve: batch sizes must be >= 1");
    CurvePoint p;
    p.batch = b;
    p.total_latency_us = batched_graph_latency(model, b, model.calibration_dec_timesteps());
    p.throughput_per_s = static_cast<double>(b) * 1e6 / static_cast<double>(p.total_latency_us);
    p.avg_latency_per_input_us =
        static_cast<double>(p.total_latency_us) / static_cast<double>(b);
    out.push_back(p);
  }
  return out;
}

std::vector<Micros> calibrate(std::span<const double> node_shares, Micros target_total_us) {
  require(!node_shares.empty(), "calibrate: no shares");
  require(target_total_us >= static_cast<Micros>(node_shares.size()),
          "calibrate: target smaller than the number of nodes");
  double sum = 0.0;
  for (double s : node_shares) {
    require(s > 0.0, "calibrate: shares must be positive");
    sum += s;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "calibrate: shares must sum to 1");

  const std::size_t n = node_shares.size();
  std::vector<Micros> out(n);
  std::vector<double> rem(n);
  Micros assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = node_shares[i] * static_cast<double>(target_total_us);
    out[i] = static_cast<Micros>(std::floor(exact));
    rem[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b] + 1e-12; });
  for (std::size_t k = 0; assigned < target_total_us; ++k, ++assigned) {
    ++out[order[k % n]];
  }
  for (Micros v : out) require(v >= 1, "calibrate: a share rounds to zero microseconds");
  return out;
}

}  // namespace lazyb
