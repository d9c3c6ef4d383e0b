#ifndef RDSGRAPH_EXPERIMENT_HPP_
#define RDSGRAPH_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdsgraph/config.hpp"
#include "rdsgraph/metrics.hpp"
#include "rdsgraph/recruit_sim.hpp"

namespace rdsgraph {

/// Draws an ER network or loads the configured edge-list file.
PopulationGraph build_network(const NetworkConfig& config, Rng& rng);

/// Recruitment model for one cell of the shape grid: shape 1 keeps the
/// configured law, any other shape switches to gamma waits with that shape.
RecruitmentModel model_for_shape(const SimulationConfig& sim, double shape);

/// Runs the configured simulation on `g`.
SimulationResult simulate(const SimulationConfig& sim, const RecruitmentModel& model, const PopulationGraph& g,
                          Rng& rng);

struct ReplicationRecord {
  double shape = 1.0;
  double prior_sd = 0.0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ReconstructionScore score;
  double lambda_map = 0.0;
  double lambda_mle = 0.0;
  bool truncated = false;
};

struct CellResult {
  double shape = 1.0;
  double prior_sd = 0.0;
  std::optional<SummaryRow> summary;  // needs two successful replications
  std::size_t failures = 0;
  std::vector<ReplicationRecord> replications;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // shapes outer, prior SDs inner
};

/// Simulate, reconstruct (MAP) and score one replication; its RNG is seeded
/// with base seed + replication index so cells share networks. Exceptions are
/// captured in the record.
ReplicationRecord run_replication(const RunConfig& config, const PopulationGraph* fixed_network, double shape,
                                  double prior_sd, std::size_t replication);

using ProgressFn = std::function<void(const ReplicationRecord&)>;

/// Every (shape, prior SD) cell times `replications`, spread over
/// `experiment.workers` threads. Output does not depend on the worker count.
ExperimentResult run_experiment(const RunConfig& config, const ProgressFn& progress = {});

/// shape,prior_sd,<metric means and SDs>,failures
void write_experiment_summary(const ExperimentResult& result, std::ostream& out);
/// One row per replication.
void write_experiment_raw(const ExperimentResult& result, std::ostream& out);

}  // namespace rdsgraph

#endif  // RDSGRAPH_EXPERIMENT_HPP_
