#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lazyb/catalog.hpp"
#include "lazyb/config.hpp"
#include "lazyb/cost_model.hpp"
#include "lazyb/engine.hpp"
#include "lazyb/exit_code.hpp"
#include "lazyb/metrics.hpp"
#include "lazyb/sweep.hpp"
#include "lazyb/traffic.hpp"

using namespace lazyb;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lazyb");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("LAZYB_LOG");
  const std::string level = env ? env : "";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::warn);
  }
}

Catalog load_catalog(const std::string& path) {
  return path.empty() ? Catalog::shipped() : Catalog::load(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  return out;
}

// "1,2,4,8" or "1..64".
std::vector<std::uint32_t> parse_batches(const std::string& s) {
  std::vector<std::uint32_t> out;
  auto num = [&s](const std::string& t) {
    require(!t.empty() && t.find_first_not_of("0123456789") == std::string::npos,
            "bad --batches value '" + s + "'");
    const unsigned long v = std::stoul(t);
    require(v >= 1 && v <= 1'000'000, "batch sizes must be in [1, 1000000]");
    return static_cast<std::uint32_t>(v);
  };
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const auto lo = num(s.substr(0, dots));
    const auto hi = num(s.substr(dots + 2));
    require(lo <= hi, "bad --batches range '" + s + "'");
    for (auto b = lo; b <= hi; ++b) out.push_back(b);
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(num(tok));
  require(!out.empty(), "--batches is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Node-level batching simulator for a single inference accelerator"};
  app.require_subcommand(1);

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "Generate a Poisson request trace");
  double rate = 0;
  double duration_ms = 0;
  std::string model, out_path, length_cdf, catalog_path;
  std::uint64_t seed = 0;
  gen->add_option("--rate", rate, "Arrival rate (requests/s)")->required();
  gen->add_option("--duration-ms", duration_ms, "Trace duration (ms)")->required();
  gen->add_option("--model", model, "Model name")->required();
  gen->add_option("--seed", seed, "PRNG seed")->required();
  gen->add_option("--out", out_path, "Output CSV")->required();
  gen->add_option("--length-cdf", length_cdf, "Output-length CDF CSV");
  gen->add_option("--catalog", catalog_path, "Model catalog JSON (default: shipped)");

  // run
  auto* runc = app.add_subcommand("run", "Simulate one trace under one policy");
  std::string trace_path, policy_path, event_log_path;
  runc->add_option("--catalog", catalog_path, "Model catalog JSON (default: shipped)");
  runc->add_option("--trace", trace_path, "Trace CSV")->required();
  runc->add_option("--policy-config", policy_path, "Policy config JSON")->required();
  runc->add_option("--out", out_path, "Result CSV")->required();
  runc->add_option("--event-log", event_log_path, "Batch-state event log CSV");

  // sweep
  auto* sweepc = app.add_subcommand("sweep", "Run a multi-seed experiment sweep");
  std::string spec_path;
  sweepc->add_option("--spec", spec_path, "Sweep spec JSON")->required();
  sweepc->add_option("--out", out_path, "Aggregate CSV")->required();
  sweepc->add_option("--catalog", catalog_path, "Model catalog JSON (default: shipped)");

  // curve
  auto* curvec = app.add_subcommand("curve", "Throughput and latency versus batch size");
  std::string batches = "1,2,4,8,16,32,64";
  curvec->add_option("--catalog", catalog_path, "Model catalog JSON (default: shipped)");
  curvec->add_option("--model", model, "Model name")->required();
  curvec->add_option("--batches", batches, "Batch sizes, e.g. 1,2,4 or 1..64");
  curvec->add_option("--out", out_path, "Output CSV")->required();

  // report
  auto* reportc = app.add_subcommand("report", "Summaries and CDFs of a result CSV");
  std::string in_path, kind;
  Micros sla_us = 100'000;
  double horizon_ms = 0;
  reportc->add_option("--in", in_path, "Result CSV")->required();
  reportc->add_option("--kind", kind, "cdf or summary")
      ->required()
      ->check(CLI::IsMember({"cdf", "summary"}));
  reportc->add_option("--out", out_path, "Output CSV")->required();
  reportc->add_option("--sla-us", sla_us, "SLA target for the violation rate");
  reportc->add_option("--horizon-ms", horizon_ms,
                      "Throughput horizon (default: last arrival, rounded up to 1 ms)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const Catalog catalog = load_catalog(catalog_path);
      const CatalogEntry& entry = catalog.at(model);
      require(duration_ms > 0, "--duration-ms must be positive");
      TrafficConfig tc;
      tc.rate_qps = rate;
      tc.duration_us = static_cast<Micros>(duration_ms * 1000.0);
      tc.seed = seed;
      tc.model_name = model;
      tc.dynamic_model = entry.graph.is_dynamic();
      tc.length_dist = length_cdf.empty() ? entry.length_dist : LengthDistribution::load_csv(length_cdf);
      if (tc.dynamic_model) {
        require(tc.length_dist.max_len() <= entry.graph.max_dec_timesteps(),
                "length CDF exceeds the model's max_dec_timesteps");
      }
      const auto trace = gen_trace(tc);
      write_trace(out_path, trace);
      spdlog::info("wrote {} requests to {}", trace.size(), out_path);
    } else if (*runc) {
      const Catalog catalog = load_catalog(catalog_path);
      const auto trace = read_trace(trace_path, catalog);
      const PolicyConfig cfg = load_policy_config(policy_path);
      EventLog log;
      const SimResult result =
          run(catalog, trace, cfg, RunMeta{}, event_log_path.empty() ? nullptr : &log);
      write_result_csv(out_path, result);
      if (!event_log_path.empty()) {
        auto out = open_out(event_log_path);
        log.write(out);
      }
      spdlog::info("{}: {} requests, busy {} us, makespan {} us, {} node instances",
                   cfg.label(), result.requests.size(), result.busy_us, result.makespan_us,
                   result.node_instances);
    } else if (*sweepc) {
      const Catalog catalog = load_catalog(catalog_path);
      const SweepSpec spec = parse_sweep_spec(load_json_file(spec_path));
      const auto rows = run_sweep(spec, catalog);
      auto out = open_out(out_path);
      write_aggregate_csv(out, rows);
      spdlog::info("wrote {} aggregate rows to {}", rows.size(), out_path);
    } else if (*curvec) {
      const Catalog catalog = load_catalog(catalog_path);
      const auto b = parse_batches(batches);
      const auto curve = throughput_curve(catalog.at(model).graph, b);
      auto out = open_out(out_path);
      out << "batch,total_latency_us,throughput_per_s,avg_latency_per_input_us\n";
      for (const auto& p : curve) {
        out << fmt::format("{},{},{:.6f},{:.6f}\n", p.batch, p.total_latency_us,
                           p.throughput_per_s, p.avg_latency_per_input_us);
      }
    } else if (*reportc) {
      const auto records = read_result_csv(in_path);
      require(!records.empty(), "result CSV has no rows");
      auto out = open_out(out_path);
      if (kind == "cdf") {
        write_cdf_csv(out, cdf(latencies_of(records)));
      } else {
        Micros horizon = static_cast<Micros>(horizon_ms * 1000.0);
        if (horizon <= 0) {
          Micros last = 0;
          for (const auto& r : records) last = std::max(last, r.arrival_us);
          horizon = std::max<Micros>(1000, (last + 999) / 1000 * 1000);
        }
        const RunSummary s = summarize(records, sla_us, horizon);
        write_summary_csv(out, std::vector<RunSummary>{s});
      }
    }
  } catch (const std::exception& e) {
    const int rc = exit_code_of(e);
    spdlog::error("{}{}", rc == 1 ? "" : "internal error: ", e.what());
    return rc;
  }
  return 0;
}
