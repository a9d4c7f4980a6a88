#include "lazyb/model_graph.hpp"

#include <map>

namespace lazyb {

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Static: return "static";
    case NodeKind::Encoder: return "encoder";
    case NodeKind::Decoder: return "decoder";
  }
  return "?";
}

NodeKind parse_node_kind(const std::string& s) {
  if (s == "static") return NodeKind::Static;
  if (s == "encoder") return NodeKind::Encoder;
  if (s == "decoder") return NodeKind::Decoder;
  throw ValidationError("unknown node kind '" + s + "'");
}

std::string to_string(const NodeCursor& cur) {
  return std::to_string(cur.node_id) + "@" + std::to_string(cur.timestep);
}

ModelGraph build_model(const ModelSpec& spec) {
  const std::string where = "model '" + spec.name + "': ";
  require(!spec.name.empty(), "model name must not be empty");
  require(!spec.nodes.empty(), where + "needs at least one node");

  ModelGraph g;
  g.name_ = spec.name;
  g.kind_ = spec.kind;
  g.recurrent_ = spec.recurrent;

  // Locate the encoder and decoder runs; anything else must be static.
  int first_enc = -1, last_enc = -1, first_dec = -1, last_dec = -1;
  std::map<std::uint32_t, std::pair<Micros, std::uint32_t>> groups;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    const std::string at = where + "node " + std::to_string(i) + ": ";
    require(n.base_latency_us >= 1, at + "base_latency_us must be >= 1");
    require(n.saturation_batch >= 1, at + "saturation_batch must be >= 1");
    if (n.kind == NodeKind::Encoder) {
      if (first_enc < 0) first_enc = static_cast<int>(i);
      require(last_enc < 0 || last_enc == static_cast<int>(i) - 1,
              at + "encoder nodes must form one contiguous run");
      last_enc = static_cast<int>(i);
    } else if (n.kind == NodeKind::Decoder) {
      if (first_dec < 0) first_dec = static_cast<int>(i);
      require(last_dec < 0 || last_dec == static_cast<int>(i) - 1,
              at + "decoder nodes must form one contiguous run");
      last_dec = static_cast<int>(i);
    }
    if (n.weight_group) {
      auto [it, fresh] = groups.try_emplace(*n.weight_group, n.base_latency_us, n.saturation_batch);
      require(fresh || (it->second.first == n.base_latency_us &&
                        it->second.second == n.saturation_batch),
              at + "nodes sharing weight_group " + std::to_string(*n.weight_group) +
                  " must have equal latency and saturation");
    }
    if (spec.recurrent && n.kind != NodeKind::Static) {
      require(n.weight_group.has_value(),
              at + "recurrent model requires a weight_group on every encoder/decoder node");
    }
  }

  if (spec.kind == GraphKind::StaticGraph) {
    require(first_enc < 0 && first_dec < 0,
            where + "static graphs may not contain encoder/decoder nodes");
  } else {
    require(first_enc >= 0, where + "dynamic graph needs at least one encoder node");
    require(first_dec >= 0, where + "dynamic graph needs at least one decoder node");
    require(last_enc < first_dec, where + "decoder run must follow the encoder run");
    for (int i = last_enc + 1; i < first_dec; ++i) {
      require(spec.nodes[i].kind == NodeKind::Static, where + "unexpected node between runs");
    }
    require(first_dec == last_enc + 1,
            where + "static nodes between the encoder and decoder runs are not supported");
    require(spec.enc_timesteps >= 1, where + "enc_timesteps must be >= 1");
    require(spec.max_dec_timesteps >= 1, where + "max_dec_timesteps must be >= 1");
    g.enc_begin_ = static_cast<std::uint32_t>(first_enc);
    g.enc_end_ = static_cast<std::uint32_t>(last_enc + 1);
    g.dec_begin_ = static_cast<std::uint32_t>(first_dec);
    g.dec_end_ = static_cast<std::uint32_t>(last_dec + 1);
    g.enc_timesteps_ = spec.enc_timesteps;
    g.max_dec_timesteps_ = spec.max_dec_timesteps;
    g.calibration_dec_timesteps_ =
        spec.calibration_dec_timesteps ? spec.calibration_dec_timesteps : spec.max_dec_timesteps;
    require(g.calibration_dec_timesteps_ <= g.max_dec_timesteps_,
            where + "calibration_dec_timesteps exceeds max_dec_timesteps");
  }

  g.nodes_.reserve(spec.nodes.size());
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    g.nodes_.push_back(NodeTemplate{static_cast<std::uint32_t>(i), n.kind, n.weight_group,
                                    n.base_latency_us, n.saturation_batch, n.label});
  }
  return g;
}

std::uint64_t unrolled_len(const ModelGraph& model, std::uint32_t actual_dec) {
  if (!model.is_dynamic()) return model.nodes().size();
  require(actual_dec >= 1 && actual_dec <= model.max_dec_timesteps(),
          "actual decoder length " + std::to_string(actual_dec) + " out of range for '" +
              model.name() + "'");
  const std::uint64_t n_enc = model.enc_end() - model.enc_begin();
  const std::uint64_t n_dec = model.dec_end() - model.dec_begin();
  const std::uint64_t n_static = model.nodes().size() - n_enc - n_dec;
  return n_static + n_enc * model.enc_timesteps() + n_dec * actual_dec;
}

bool valid_cursor(const ModelGraph& model, const NodeCursor& cur, std::uint32_t actual_dec) {
  if (cur.node_id >= model.nodes().size()) return false;
  switch (model.node(cur.node_id).kind) {
    case NodeKind::Static: return cur.timestep == 0;
    case NodeKind::Encoder: return cur.timestep < model.enc_timesteps();
    case NodeKind::Decoder:
      return actual_dec >= 1 && actual_dec <= model.max_dec_timesteps() &&
             cur.timestep < actual_dec;
  }
  return false;
}

namespace detail {

std::optional<NodeCursor> step_cursor(const ModelGraph& m, const NodeCursor& cur,
                                      std::uint32_t actual_dec) {
  const auto n = static_cast<std::uint32_t>(m.nodes().size());
  const std::uint32_t id = cur.node_id;
  if (!m.is_dynamic()) {
    if (id + 1 < n) return NodeCursor{id + 1, 0};
    return std::nullopt;
  }
  if (id < m.enc_begin()) {
    return NodeCursor{id + 1, 0};  // prologue always leads into the encoder
  }
  if (id < m.enc_end()) {
    if (id + 1 < m.enc_end()) return NodeCursor{id + 1, cur.timestep};
    if (cur.timestep + 1 < m.enc_timesteps()) return NodeCursor{m.enc_begin(), cur.timestep + 1};
    return NodeCursor{m.dec_begin(), 0};
  }
  if (id < m.dec_end()) {
    if (id + 1 < m.dec_end()) return NodeCursor{id + 1, cur.timestep};
    if (cur.timestep + 1 < actual_dec) return NodeCursor{m.dec_begin(), cur.timestep + 1};
    if (m.dec_end() < n) return NodeCursor{m.dec_end(), 0};
    return std::nullopt;
  }
  if (id + 1 < n) return NodeCursor{id + 1, 0};
  return std::nullopt;
}

}  // namespace detail

std::optional<NodeCursor> next_cursor(const ModelGraph& model, const NodeCursor& cur,
                                      std::uint32_t actual_dec) {
  const std::uint32_t dec = model.effective_dec(actual_dec);
  require(valid_cursor(model, cur, dec),
          "cursor " + to_string(cur) + " is not valid for model '" + model.name() + "'");
  return detail::step_cursor(model, cur, dec);
}

}  // namespace lazyb
