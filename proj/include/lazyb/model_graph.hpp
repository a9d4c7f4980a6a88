#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lazyb/types.hpp"

namespace lazyb {

enum class NodeKind { Static, Encoder, Decoder };
enum class GraphKind { StaticGraph, DynamicGraph };

std::string to_string(NodeKind kind);
NodeKind parse_node_kind(const std::string& s);

struct NodeTemplate {
  std::uint32_t id = 0;
  NodeKind kind = NodeKind::Static;
  std::optional<std::uint32_t> weight_group;
  Micros base_latency_us = 1;
  std::uint32_t saturation_batch = 16;
  std::string label;

  bool operator==(const NodeTemplate&) const = default;
};

/// Position in one request's unrolled execution. Static nodes always sit at
/// timestep 0.
struct NodeCursor {
  std::uint32_t node_id = 0;
  std::uint32_t timestep = 0;

  bool operator==(const NodeCursor&) const = default;
};

std::string to_string(const NodeCursor& cur);

/// Input record for build_model; mirrors one entry of the catalog file.
struct ModelSpec {
  struct Node {
    NodeKind kind = NodeKind::Static;
    Micros base_latency_us = 0;
    std::uint32_t saturation_batch = 16;
    std::optional<std::uint32_t> weight_group;
    std::string label;
  };

  std::string name;
  GraphKind kind = GraphKind::StaticGraph;
  bool recurrent = false;
  std::uint32_t enc_timesteps = 1;
  std::uint32_t max_dec_timesteps = 1;
  // Decoder length at which base latencies were calibrated; 0 means
  // "use max_dec_timesteps".
  std::uint32_t calibration_dec_timesteps = 0;
  std::vector<Node> nodes;
};

/// An immutable, validated DNN graph lowered to a serialized node list:
/// prologue Static nodes, one contiguous Encoder run, one contiguous Decoder
/// run, epilogue Static nodes.
class ModelGraph {
 public:
  const std::string& name() const { return name_; }
  GraphKind kind() const { return kind_; }
  bool is_dynamic() const { return kind_ == GraphKind::DynamicGraph; }
  bool recurrent() const { return recurrent_; }
  const std::vector<NodeTemplate>& nodes() const { return nodes_; }
  const NodeTemplate& node(std::uint32_t id) const { return nodes_.at(id); }
  std::uint32_t enc_timesteps() const { return enc_timesteps_; }
  std::uint32_t max_dec_timesteps() const { return max_dec_timesteps_; }
  std::uint32_t calibration_dec_timesteps() const { return calibration_dec_timesteps_; }

  // Half-open node-id ranges of each run. Empty for static graphs.
  std::uint32_t enc_begin() const { return enc_begin_; }
  std::uint32_t enc_end() const { return enc_end_; }
  std::uint32_t dec_begin() const { return dec_begin_; }
  std::uint32_t dec_end() const { return dec_end_; }

  NodeCursor first_cursor() const { return {0, 0}; }

  /// Decoder length used for requests of this model; static graphs ignore the
  /// argument and always use 1.
  std::uint32_t effective_dec(std::uint32_t actual_dec) const {
    return is_dynamic() ? actual_dec : 1;
  }

  bool operator==(const ModelGraph&) const = default;

 private:
  friend ModelGraph build_model(const ModelSpec& spec);

  std::string name_;
  GraphKind kind_ = GraphKind::StaticGraph;
  bool recurrent_ = false;
  std::vector<NodeTemplate> nodes_;
  std::uint32_t enc_timesteps_ = 1;
  std::uint32_t max_dec_timesteps_ = 1;
  std::uint32_t calibration_dec_timesteps_ = 1;
  std::uint32_t enc_begin_ = 0, enc_end_ = 0, dec_begin_ = 0, dec_end_ = 0;
};

/// Validates a spec and produces the graph. Throws ValidationError on
/// non-contiguous encoder/decoder runs, zero latencies, a dynamic model
/// missing encoder or decoder nodes, or inconsistent weight groups.
ModelGraph build_model(const ModelSpec& spec);

/// Number of node instances a request executes.
std::uint64_t unrolled_len(const ModelGraph& model, std::uint32_t actual_dec);

/// Successor of `cur` in the unrolled order, or nullopt once execution is
/// done. Encoder and decoder runs are unrolled timestep-major.
std::optional<NodeCursor> next_cursor(const ModelGraph& model, const NodeCursor& cur,
                                      std::uint32_t actual_dec);

bool valid_cursor(const ModelGraph& model, const NodeCursor& cur, std::uint32_t actual_dec);

}  // namespace lazyb

namespace lazyb::detail {
// Unchecked successor; callers guarantee `cur` is valid for `actual_dec`.
std::optional<NodeCursor> step_cursor(const ModelGraph& m, const NodeCursor& cur,
                                      std::uint32_t actual_dec);
}  // namespace lazyb::detail
