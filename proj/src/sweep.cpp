#include "lazyb/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "lazyb/config.hpp"
#include "lazyb/engine.hpp"

namespace lazyb {

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Rate: return "rate_qps";
    case SweepAxis::Sla: return "sla_target_us";
    case SweepAxis::Window: return "window_us";
  }
  return "?";
}

void SweepSpec::validate(const Catalog& catalog) const {
  require(!values.empty(), "sweep: axis values must be non-empty");
  require(!policies.empty(), "sweep: policy list must be non-empty");
  require(runs_per_point >= 1, "sweep: runs_per_point must be >= 1");
  require(duration_us > 0, "sweep: duration_us must be positive");
  require(catalog.contains(model), "sweep: unknown model '" + model + "'");
  for (double v : values) {
    require(std::isfinite(v) && v > 0, "sweep: axis values must be positive");
    if (axis != SweepAxis::Rate) {
      require(v == std::floor(v), "sweep: " + to_string(axis) + " values must be integers");
    }
  }
  if (axis != SweepAxis::Rate) require(rate_qps > 0, "sweep: rate_qps is required for this axis");
  for (std::size_t p = 0; p < policies.size(); ++p) {
    for (double v : values) config_at(*this, p, v).validate();
  }
}

SweepSpec parse_sweep_spec(const nlohmann::json& j) {
  try {
    SweepSpec s;
    s.model = j.at("model").get<std::string>();
    if (j.contains("duration_us")) s.duration_us = j.at("duration_us").get<Micros>();
    if (j.contains("runs_per_point")) s.runs_per_point = j.at("runs_per_point").get<std::uint32_t>();
    if (j.contains("base_seed")) s.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("rate_qps")) s.rate_qps = j.at("rate_qps").get<double>();
    if (j.contains("threads")) s.threads = j.at("threads").get<unsigned>();
    const auto& axis = j.at("axis");
    const auto kind = axis.at("kind").get<std::string>();
    if (kind == "rate_qps") {
      s.axis = SweepAxis::Rate;
    } else if (kind == "sla_target_us") {
      s.axis = SweepAxis::Sla;
    } else if (kind == "window_us") {
      s.axis = SweepAxis::Window;
    } else {
      throw ValidationError("sweep: unknown axis kind '" + kind + "'");
    }
    s.values = axis.at("values").get<std::vector<double>>();
    for (const auto& p : j.at("policies")) {
      // Window-axis sweeps may leave window_us out; config_at fills it in.
      nlohmann::json pj = p;
      const bool windowed = pj.value("kind", "") == "graphb" || pj.value("kind", "") == "cellular";
      if (s.axis == SweepAxis::Window && windowed && !pj.contains("window_us")) pj["window_us"] = 1;
      s.policies.push_back(parse_policy_config(pj));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sweep spec: ") + e.what());
  }
}

PolicyConfig config_at(const SweepSpec& spec, std::size_t policy_index, double axis_value) {
  PolicyConfig cfg = spec.policies.at(policy_index);
  if (spec.axis == SweepAxis::Sla) cfg.slack.sla_target_us = static_cast<Micros>(axis_value);
  if (spec.axis == SweepAxis::Window &&
      (cfg.kind == PolicyKind::GraphB || cfg.kind == PolicyKind::Cellular)) {
    cfg.window_us = static_cast<Micros>(axis_value);
  }
  return cfg;
}

namespace {

bool reads_sla(PolicyKind k) { return k == PolicyKind::LazyB || k == PolicyKind::Oracle; }

// Identifies a simulation up to fields that cannot change its schedule.
std::string sim_key(PolicyConfig cfg, double rate, std::uint64_t seed) {
  if (!reads_sla(cfg.kind)) cfg.slack = SlackConfig{};
  if (cfg.kind != PolicyKind::GraphB && cfg.kind != PolicyKind::Cellular) cfg.window_us = 0;
  return to_json(cfg).dump() + "|" + std::to_string(rate) + "|" + std::to_string(seed);
}

}  // namespace

std::vector<SweepCell> run_sweep_cells(const SweepSpec& spec, const Catalog& catalog) {
  spec.validate(catalog);
  const CatalogEntry& model = catalog.at(spec.model);

  struct Sim {
    PolicyConfig cfg;
    double rate;
    std::uint64_t seed;
    std::vector<RequestRecord> records;
  };
  std::vector<Sim> sims;
  std::map<std::string, std::size_t> index;
  // cell -> run -> sim
  std::vector<std::vector<std::size_t>> cell_sims;
  std::vector<SweepCell> cells;

  for (double v : spec.values) {
    for (std::size_t p = 0; p < spec.policies.size(); ++p) {
      const PolicyConfig cfg = config_at(spec, p, v);
      const double rate = spec.axis == SweepAxis::Rate ? v : spec.rate_qps;
      std::vector<std::size_t> ids;
      for (std::uint32_t r = 0; r < spec.runs_per_point; ++r) {
        const std::uint64_t seed = spec.base_seed + r;
        auto [it, fresh] = index.try_emplace(sim_key(cfg, rate, seed), sims.size());
        if (fresh) sims.push_back(Sim{cfg, rate, seed, {}});
        ids.push_back(it->second);
      }
      cell_sims.push_back(std::move(ids));
      cells.push_back(SweepCell{v, p, {}});
    }
  }

  // Traces are shared by every policy at the same (rate, seed).
  std::map<std::pair<double, std::uint64_t>, std::vector<InferenceRequest>> traces;
  for (const auto& s : sims) {
    auto key = std::make_pair(s.rate, s.seed);
    if (traces.contains(key)) continue;
    TrafficConfig tc;
    tc.rate_qps = s.rate;
    tc.duration_us = spec.duration_us;
    tc.seed = s.seed;
    tc.model_name = spec.model;
    tc.dynamic_model = model.graph.is_dynamic();
    tc.length_dist = model.length_dist;
    traces.emplace(key, gen_trace(tc));
  }

  unsigned threads = spec.threads != 0 ? spec.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sims.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < sims.size(); i = next++) {
      auto& s = sims[i];
      try {
        const auto& trace = traces.at({s.rate, s.seed});
        s.records = run(catalog, trace, s.cfg, RunMeta{s.seed, s.rate, spec.duration_us}).requests;
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mu);
        if (!failure) {
          const std::string ctx = "sweep run " + s.cfg.label() + " rate " + std::to_string(s.rate) +
                                  " seed " + std::to_string(s.seed) + ": " + e.what();
          if (dynamic_cast<const ValidationError*>(&e)) {
            failure = std::make_exception_ptr(ValidationError(ctx));
          } else {
            failure = std::make_exception_ptr(InvariantError(ctx));
          }
        }
        next = sims.size();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const PolicyConfig cfg = config_at(spec, cells[c].policy_index, cells[c].axis_value);
    for (std::size_t sid : cell_sims[c]) {
      const Sim& s = sims[sid];
      RunSummary sum = summarize(s.records, cfg.slack.sla_target_us, spec.duration_us);
      sum.policy = cfg.label();
      sum.rate_qps = s.rate;
      sum.seed = s.seed;
      cells[c].runs.push_back(sum);
    }
  }
  return cells;
}

std::vector<AggregateRow> run_sweep(const SweepSpec& spec, const Catalog& catalog) {
  std::vector<AggregateRow> rows;
  for (const auto& cell : run_sweep_cells(spec, catalog)) {
    const PolicyConfig cfg = config_at(spec, cell.policy_index, cell.axis_value);
    rows.push_back(aggregate(to_string(spec.axis), cell.axis_value, cfg.label(), cell.runs));
  }
  return rows;
}

}  // namespace lazyb
