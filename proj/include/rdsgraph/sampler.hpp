#ifndef RDSGRAPH_SAMPLER_HPP_
#define RDSGRAPH_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rdsgraph/graph_core.hpp"
#include "rdsgraph/likelihood.hpp"
#include "rdsgraph/recruit_sim.hpp"
#include "rdsgraph/subgraph_state.hpp"

namespace rdsgraph {

/// Gamma(shape, rate) prior on lambda, density proportional to
/// lambda^(shape-1) exp(-rate lambda).
struct PriorSpec {
  double shape = 1.0;
  double rate = 1e-9;

  static PriorSpec from_mean_sd(double mean, double sd);
  double mean() const { return shape / rate; }
  double sd() const;
  double log_density(double lambda) const;  // unnormalised
  void validate() const;
};

/// gamma_k = max(floor, initial * decay^k) at sweep k (0-based).
struct AnnealingSchedule {
  double initial = 1.0;
  double decay = 0.999;
  double floor = 1e-3;

  double at(std::size_t sweep) const;
  void validate() const;
};

enum class ChainMode { posterior, map };

/// Centre and spread of the normal independence proposal for lambda.
/// `likelihood`: MLE with variance MLE^2 / (n - |M|). `conditional`: the mode of
/// the conditional posterior Gamma(n - |M| + shape, s'w + rate) with its
/// curvature variance; identical to `likelihood` under a flat prior but keeps
/// mixing when an informative prior pulls lambda away from the MLE.
enum class LambdaProposal { conditional, likelihood };

struct ChainConfig {
  ChainMode mode = ChainMode::posterior;
  std::size_t iterations = 1000;  // sweeps
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  std::size_t sweep_length = 0;   // proposal attempts per sweep; 0 means n(n-1)/2
  std::size_t lambda_every = 1;   // sweeps between lambda updates; 0 holds lambda fixed
  LambdaProposal lambda_proposal = LambdaProposal::conditional;
  std::optional<double> initial_lambda;
  AnnealingSchedule annealing;
  std::uint64_t seed = 1;
  bool keep_snapshots = false;
  std::size_t check_every = 0;    // verify incremental state every K accepted moves; 0 = never

  void validate() const;
  std::size_t sweep_attempts(std::size_t n) const;
};

struct TraceRow {
  std::size_t iteration;
  std::size_t edge_count;
  double lambda;
  double log_posterior;
  double accept_rate;
};

struct ChainTrace {
  std::vector<TraceRow> rows;
  std::vector<std::pair<std::size_t, std::vector<Edge>>> snapshots;
};

/// Called after each recorded iteration with the iteration number, state and lambda.
using ChainObserver = std::function<void(std::size_t, const SubgraphState&, double)>;

/// Uniform draw from the feasible Add / Remove set by the pair-rejection loop.
/// Falls back to enumeration after 100 n^2 rejected draws. nullopt when the
/// feasible set is empty.
std::optional<Move> propose_move(const SubgraphState& state, Rng& rng);

/// Add / Remove counts of the state (maintained incrementally).
FeasibleCounts count_feasible(const SubgraphState& state);

/// Log MH acceptance ratio for `m` at the given temperature: tempered
/// likelihood ratio plus the log proposal-count ratio.
double move_log_acceptance(const SubgraphState& state, const Move& m, double lambda,
                           const TimingCache& timing, double temperature = 1.0);

/// One proposal plus accept/reject. Returns true when a move was applied.
bool mh_step_graph(SubgraphState& state, double lambda, const TimingCache& timing, Rng& rng,
                   double temperature = 1.0);

struct LambdaStep {
  double lambda;
  bool accepted;
};

/// Independence MH step for lambda with a normal proposal (see
/// LambdaProposal); non-positive proposals are rejected.
LambdaStep mh_step_lambda(const SubgraphState& state, double lambda, const PriorSpec& prior, Rng& rng,
                          LambdaProposal proposal = LambdaProposal::conditional);

/// log L(w | G_S, lambda) + log prior(lambda), up to a constant.
double log_posterior(const SubgraphState& state, double lambda, const PriorSpec& prior);

/// argmax over lambda of the conditional posterior,
/// (n - |M| + shape - 1) / (s'w + rate), floored at a tiny positive value.
double conditional_mode(const SubgraphState& state, const PriorSpec& prior);

struct PosteriorResult {
  ChainTrace trace;
  std::vector<double> edge_frequency;  // n x n row-major, over recorded samples
  std::vector<double> lambda_samples;
  std::size_t samples = 0;
  double lambda_accept_rate = 0.0;
  Adjacency final_graph;
  double final_lambda = 0.0;
};

/// Metropolis-within-Gibbs over (G_S, lambda) from the recruitment closure.
PosteriorResult run_posterior(const ObservedData& obs, const PriorSpec& prior, const ChainConfig& config,
                              Rng& rng, const ChainObserver& observer = {});

struct MapResult {
  Adjacency graph;
  double lambda = 0.0;           // joint MAP value (conditional mode at the best graph)
  double conditional_mle = 0.0;  // MLE at the best graph; NaN when undefined
  double log_posterior = 0.0;
  std::size_t best_iteration = 0;
  ChainTrace trace;
};

/// Simulated annealing on the graph chain with lambda at its conditional mode.
MapResult run_map(const ObservedData& obs, const PriorSpec& prior, const ChainConfig& config, Rng& rng,
                  const ChainObserver& observer = {});

struct PriorBounds {
  double lo;
  double hi;
  double mean() const { return 0.5 * (lo + hi); }
  /// Gamma prior with the given shape and mean (lo + hi) / 2.
  PriorSpec for_shape(double shape) const;
};

/// Bounds on the rate MLE from the most and fewest susceptible edges the
/// observed data allow at each event.
PriorBounds empirical_prior_bounds(const ObservedData& obs);

}  // namespace rdsgraph

#endif  // RDSGRAPH_SAMPLER_HPP_
