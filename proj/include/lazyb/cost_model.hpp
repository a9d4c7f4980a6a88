#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lazyb/model_graph.hpp"

namespace lazyb {

/// Saturating linear batch cost: max(L1, ceil(L1 * batch / S)).
///
/// Up to the saturation batch S a node costs the same as a single input, so
/// throughput grows linearly; beyond S latency grows linearly and throughput
/// stays flat. The model satisfies batch * L1 >= node_latency(batch), which
/// is what makes summed single-input estimates an upper bound on batched time.
Micros node_latency(const NodeTemplate& node, std::uint32_t batch);

/// Total latency of one pre-formed batch of `batch` inputs running the whole
/// unrolled graph with `dec_timesteps` decoder steps (ignored for static).
Micros batched_graph_latency(const ModelGraph& model, std::uint32_t batch,
                             std::uint32_t dec_timesteps);

struct CurvePoint {
  std::uint32_t batch = 0;
  Micros total_latency_us = 0;
  double throughput_per_s = 0.0;
  double avg_latency_per_input_us = 0.0;
};

/// Latency/throughput of pre-formed batches at the model's calibration
/// decoder length; no collection wait is included.
std::vector<CurvePoint> throughput_curve(const ModelGraph& model,
                                         std::span<const std::uint32_t> batch_sizes);

/// Splits `target_total_us` across nodes in proportion to `node_shares`
/// using largest-remainder rounding, so the result sums exactly to the target.
/// Ties on the remainder go to the lower index.
std::vector<Micros> calibrate(std::span<const double> node_shares, Micros target_total_us);

}  // namespace lazyb
