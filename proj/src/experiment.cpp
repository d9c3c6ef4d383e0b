#include "rdsgraph/experiment.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "rdsgraph/sampler.hpp"

namespace rdsgraph {

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : "NA"; }

}  // namespace

PopulationGraph build_network(const NetworkConfig& config, Rng& rng) {
  if (config.model == "file") return load_population_graph(config.file);
  return generate_er_graph(config.size, config.edge_probability(), rng);
}

RecruitmentModel model_for_shape(const SimulationConfig& sim, double shape) {
  RecruitmentModel m = sim.model;
  if (shape != 1.0) {
    m.variant = WaitingTime::gamma;
    m.shape = shape;
  }
  return m;
}

SimulationResult simulate(const SimulationConfig& sim, const RecruitmentModel& model, const PopulationGraph& g,
                          Rng& rng) {
  if (model.variant == WaitingTime::turn_taking) {
    return simulate_turn_taking(g, sim.sample_size, sim.seeds, sim.coupons, rng);
  }
  return simulate_rds(g, sim.sample_size, sim.seeds, sim.coupons, model, rng, sim.engine);
}

ReplicationRecord run_replication(const RunConfig& config, const PopulationGraph* fixed_network, double shape,
                                  double prior_sd, std::size_t replication) {
  ReplicationRecord r;
  r.shape = shape;
  r.prior_sd = prior_sd;
  r.replication = replication;
  r.seed = config.seed + replication;
  try {
    Rng rng(r.seed);
    const PopulationGraph own = fixed_network ? PopulationGraph{} : build_network(config.network, rng);
    const PopulationGraph& g = fixed_network ? *fixed_network : own;
    const RecruitmentModel model = model_for_shape(config.simulation, shape);
    const SimulationResult sim = simulate(config.simulation, model, g, rng);
    r.truncated = sim.truncated;
    const PriorSpec prior = PriorSpec::from_mean_sd(config.prior.mean.value_or(config.simulation.model.rate), prior_sd);
    ChainConfig chain = config.chain;
    chain.mode = ChainMode::map;
    const MapResult map = run_map(sim.observed, prior, chain, rng);
    r.score = score(map.graph, sim.truth);
    r.lambda_map = map.lambda;
    r.lambda_mle = map.conditional_mle;
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

ExperimentResult run_experiment(const RunConfig& config, const ProgressFn& progress) {
  const auto& ex = config.experiment;
  std::optional<PopulationGraph> fixed;
  if (config.network.model == "file") fixed = load_population_graph(config.network.file);

  ExperimentResult out;
  struct Task {
    std::size_t cell;
    std::size_t rep;
  };
  std::vector<Task> tasks;
  for (double shape : ex.shapes) {
    for (double sd : ex.prior_sds) {
      CellResult cell;
      cell.shape = shape;
      cell.prior_sd = sd;
      cell.replications.resize(ex.replications);
      for (std::size_t r = 0; r < ex.replications; ++r) tasks.push_back({out.cells.size(), r});
      out.cells.push_back(std::move(cell));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      auto& cell = out.cells[tasks[k].cell];
      auto rec = run_replication(config, fixed ? &*fixed : nullptr, cell.shape, cell.prior_sd, tasks[k].rep);
      if (progress) {
        std::lock_guard lock(report);
        progress(rec);
      }
      cell.replications[tasks[k].rep] = std::move(rec);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(ex.workers, static_cast<unsigned>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& cell : out.cells) {
    std::vector<Replication> good;
    for (const auto& r : cell.replications) {
      if (r.ok) good.push_back({r.score, r.lambda_map});
      else ++cell.failures;
    }
    if (good.size() >= 2) cell.summary = summarize_replications(good);
  }
  return out;
}

void write_experiment_summary(const ExperimentResult& result, std::ostream& out) {
  out << "shape,prior_sd," << summary_csv_header() << ",failures\n";
  for (const auto& cell : result.cells) {
    out << fmt::format("{},{},", cell.shape, cell.prior_sd);
    if (cell.summary) {
      out << summary_csv_row(*cell.summary);
    } else {
      out << "NA,NA,NA,NA,NA,NA,NA,NA," << cell.replications.size() - cell.failures;
    }
    out << ',' << cell.failures << '\n';
  }
}

void write_experiment_raw(const ExperimentResult& result, std::ostream& out) {
  out << "shape,prior_sd,replication,seed,ok,accuracy,tpr,tnr,recall,edges_true,edges_est,lambda_map,lambda_mle,"
         "truncated,error\n";
  for (const auto& cell : result.cells) {
    for (const auto& r : cell.replications) {
      std::string error = r.error;
      for (char& ch : error) {
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      }
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{:.17g},{},{},{}\n", r.shape, r.prior_sd, r.replication,
                         r.seed, r.ok ? 1 : 0, opt(r.score.accuracy), opt(r.score.tpr), opt(r.score.tnr),
                         opt(r.score.recall), r.score.edge_count_true, r.score.edge_count_est, r.lambda_map,
                         std::isfinite(r.lambda_mle) ? fmt::format("{:.17g}", r.lambda_mle) : "NA",
                         r.truncated ? 1 : 0, error);
    }
  }
}

}  // namespace rdsgraph
