// Command-line front end: simulate, reconstruct, experiment, score, clean.

#include <cmath>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "rdsgraph/config.hpp"
#include "rdsgraph/experiment.hpp"
#include "rdsgraph/export.hpp"
#include "rdsgraph/ingest.hpp"
#include "rdsgraph/metrics.hpp"
#include "rdsgraph/sampler.hpp"

namespace {

using namespace rdsgraph;
using nlohmann::json;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int verbosity = 0;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? parse_config(json::object()) : load_config(c.config_path);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.chain.seed = *c.seed;
  }
  if (!c.out.empty()) cfg.output = c.out;
  return cfg;
}

json report_json(const CleaningReport& r) {
  return {{"degree_floor", r.degree_floor},
          {"tie_jitter", r.tie_jitter},
          {"duplicated_coupon", r.duplicated_coupon},
          {"excess_redemptions", r.excess_redemptions},
          {"notes", r.notes}};
}

json score_json(const ReconstructionScore& s) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"accuracy", opt(s.accuracy)},   {"tpr", opt(s.tpr)},
          {"tnr", opt(s.tnr)},             {"recall", opt(s.recall)},
          {"true_positive", s.true_positive}, {"false_positive", s.false_positive},
          {"true_negative", s.true_negative}, {"false_negative", s.false_negative},
          {"edge_count_true", s.edge_count_true}, {"edge_count_est", s.edge_count_est}};
}

int cmd_simulate(const Common& common) {
  const RunConfig cfg = load(common);
  Rng rng(cfg.seed);
  const PopulationGraph g = build_network(cfg.network, rng);
  const SimulationResult sim = simulate(cfg.simulation, cfg.simulation.model, g, rng);
  auto recruits = open_output(cfg.output, "recruits.csv");
  write_recruitment_csv(sim.observed, recruits);
  auto truth = open_output(cfg.output, "truth_edges.txt");
  write_edge_list(sim.truth, sim.observed.ids, truth);
  auto events = open_output(cfg.output, "events.csv");
  write_events_csv(sim, g, events);
  json summary = {{"config", to_json(cfg)},
                  {"seed", cfg.seed},
                  {"population_vertices", g.size()},
                  {"population_edges", g.edge_count()},
                  {"sample_size", sim.observed.size()},
                  {"seeds", sim.observed.graph.seed_count()},
                  {"true_edges", sim.truth.edge_count()},
                  {"truncated", sim.truncated}};
  write_json(cfg.output, "summary.json", summary);
  if (common.verbosity > 0) {
    fmt::print(stderr, "simulated {} subjects ({} seeds), {} edges among them\n", sim.observed.size(),
               sim.observed.graph.seed_count(), sim.truth.edge_count());
  }
  return 0;
}

int cmd_reconstruct(const Common& common, const std::string& method, const std::string& data) {
  RunConfig cfg = load(common);
  if (!method.empty()) cfg.mode = parse_mode(method);
  if (cfg.mode != RunMode::posterior && cfg.mode != RunMode::map) {
    throw ConfigError("reconstruct needs method posterior or map");
  }
  if (!data.empty()) cfg.data.file = data;
  if (cfg.data.file.empty()) throw ConfigError("no recruitment data: set data.file or --data");
  const IngestResult in = ingest_recruitment_csv(cfg.data.file, cfg.data.calendar);
  const ObservedData& obs = in.observed;

  double default_mean = 1.0;
  try {
    default_mean = empirical_prior_bounds(obs).mean();
  } catch (const std::domain_error&) {
  }
  const PriorSpec prior = cfg.prior.resolve(&obs, default_mean);
  json summary = {{"config", to_json(cfg)},
                  {"seed", cfg.seed},
                  {"cleaning", report_json(in.report)},
                  {"prior", {{"shape", prior.shape}, {"rate", prior.rate}}},
                  {"subjects", obs.size()},
                  {"seeds", obs.graph.seed_count()}};
  Rng rng(cfg.seed);
  if (cfg.mode == RunMode::posterior) {
    cfg.chain.mode = ChainMode::posterior;
    const auto result = run_posterior(obs, prior, cfg.chain, rng);
    export_posterior(cfg.output, result, obs, summary);
    if (common.verbosity > 0) {
      fmt::print(stderr, "posterior: {} samples, final lambda {:.6g}\n", result.samples, result.final_lambda);
    }
  } else {
    cfg.chain.mode = ChainMode::map;
    const auto result = run_map(obs, prior, cfg.chain, rng);
    export_map(cfg.output, result, obs, summary);
    if (common.verbosity > 0) {
      fmt::print(stderr, "map: {} edges, lambda {:.6g}\n", result.graph.edge_count(), result.lambda);
    }
  }
  return 0;
}

int cmd_experiment(const Common& common) {
  const RunConfig cfg = load(common);
  const auto result = run_experiment(cfg, [&](const ReplicationRecord& r) {
    if (common.verbosity == 0) return;
    if (r.ok) {
      fmt::print(stderr, "shape {} sd {} rep {}: accuracy {:.4f} lambda {:.4f}\n", r.shape, r.prior_sd,
                 r.replication, r.score.accuracy.value_or(NAN), r.lambda_map);
    } else {
      fmt::print(stderr, "shape {} sd {} rep {}: failed: {}\n", r.shape, r.prior_sd, r.replication, r.error);
    }
  });
  auto table = open_output(cfg.output, "table.csv");
  write_experiment_summary(result, table);
  auto raw = open_output(cfg.output, "replications.csv");
  write_experiment_raw(result, raw);
  write_json(cfg.output, "summary.json", {{"config", to_json(cfg)}, {"seed", cfg.seed}});
  write_experiment_summary(result, std::cout);
  return 0;
}

int cmd_score(const std::string& data, const std::string& est_path, const std::string& truth_path) {
  const IngestResult in = ingest_recruitment_csv(data);
  auto read = [&](const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    return read_edge_list(f, in.observed.ids);
  };
  std::cout << score_json(score(read(est_path), read(truth_path))).dump(2) << '\n';
  return 0;
}

int cmd_clean(const Common& common, const std::string& data) {
  RunConfig cfg = load(common);
  if (!data.empty()) cfg.data.file = data;
  if (cfg.data.file.empty()) throw ConfigError("no recruitment data: set data.file or --data");
  const IngestResult in = ingest_recruitment_csv(cfg.data.file, cfg.data.calendar);
  auto cleaned = open_output(cfg.output, "cleaned.csv");
  write_recruitment_csv(in.observed, cleaned);
  write_json(cfg.output, "cleaning.json", report_json(in.report));
  if (common.verbosity > 0) {
    for (const auto& note : in.report.notes) fmt::print(stderr, "{}\n", note);
  }
  fmt::print("degree_floor={} tie_jitter={} duplicated_coupon={}\n", in.report.degree_floor, in.report.tie_jitter,
             in.report.duplicated_coupon);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network reconstruction from respondent-driven sampling data"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("-c,--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("-s,--seed", common.seed, "RNG seed (overrides the config)");
  app.add_option("-o,--out", common.out, "Output directory (overrides the config)");
  app.add_flag("-v,--verbose", common.verbosity, "More logging; repeat for more");

  std::string method, data, est, truth;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate recruitment on a population network");
  auto* reconstruct = app.add_subcommand("reconstruct", "Sample the posterior or find the MAP subgraph");
  reconstruct->add_option("-m,--method", method, "posterior or map")->check(CLI::IsMember({"posterior", "map"}));
  reconstruct->add_option("-d,--data", data, "Recruitment CSV");
  auto* experiment = app.add_subcommand("experiment", "Replicated simulate / reconstruct / score study");
  auto* score_cmd = app.add_subcommand("score", "Score an estimated edge list against the truth");
  score_cmd->add_option("-d,--data", data, "Recruitment CSV naming the subjects")->required();
  score_cmd->add_option("--est", est, "Estimated edge list")->required();
  score_cmd->add_option("--truth", truth, "True edge list")->required();
  auto* clean = app.add_subcommand("clean", "Repair and validate a recruitment CSV");
  clean->add_option("-d,--data", data, "Recruitment CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate_cmd) return cmd_simulate(common);
    if (*reconstruct) return cmd_reconstruct(common, method, data);
    if (*experiment) return cmd_experiment(common);
    if (*score_cmd) return cmd_score(data, est, truth);
    if (*clean) return cmd_clean(common, data);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
