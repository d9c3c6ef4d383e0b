#ifndef RDSGRAPH_RECRUIT_SIM_HPP_
#define RDSGRAPH_RECRUIT_SIM_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rdsgraph/graph_core.hpp"

namespace rdsgraph {

using Rng = std::mt19937_64;

/// Simple undirected population network G = (V, E).
struct PopulationGraph {
  std::vector<std::vector<std::size_t>> neighbors;  // sorted, no duplicates or self-loops
  std::vector<std::string> labels;                  // vertex names; empty for generated graphs
  std::string model;                                // "erdos-renyi", "file", ...
  std::vector<std::pair<std::string, double>> parameters;

  std::size_t size() const { return neighbors.size(); }
  std::size_t edge_count() const;
  std::size_t degree(std::size_t v) const { return neighbors[v].size(); }
  bool has_edge(std::size_t a, std::size_t b) const;
  std::string label(std::size_t v) const { return labels.empty() ? std::to_string(v) : labels[v]; }

  static PopulationGraph from_edges(std::size_t n, const std::vector<Edge>& edges);
};

/// G(N, p): every unordered pair independently with probability p.
PopulationGraph generate_er_graph(std::size_t n, double p, Rng& rng);

struct LoadReport {
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
  bool empty = false;
};

/// Edge-list text: two vertex names per line separated by whitespace and/or a
/// comma; '#' starts a comment. Duplicate edges are merged and self-loops
/// dropped (counted in `report`). Throws std::runtime_error with the line
/// number on a malformed line.
PopulationGraph load_population_graph(std::istream& in, LoadReport* report = nullptr);
PopulationGraph load_population_graph(const std::filesystem::path& path, LoadReport* report = nullptr);

enum class WaitingTime { exponential, gamma, turn_taking };

struct RecruitmentModel {
  WaitingTime variant = WaitingTime::exponential;
  double rate = 1.0;   // lambda, per edge per unit time
  double shape = 1.0;  // delta; gamma variant waits are Gamma(delta, rate delta * lambda)
  void validate() const;
};

enum class SeedRule { uniform, degree_biased, explicit_list };
enum class StallRule { add_seed, stop };

struct SeedSelection {
  std::size_t count = 1;
  SeedRule rule = SeedRule::uniform;
  StallRule on_stall = StallRule::add_seed;
  std::vector<std::size_t> vertices;  // for explicit_list, in entry order
};

/// How the exponential variant is realised. Both give the same law.
enum class RaceEngine { gillespie, edge_clocks };

struct RecruitmentEvent {
  double time;
  std::size_t recruiter;  // population vertex, or kNoRecruiter for a seed
  std::size_t recruit;    // population vertex
};

struct SimulationResult {
  ObservedData observed;
  Adjacency truth;                      // induced subgraph on the sample, sample order
  double true_rate = 0.0;
  std::vector<std::size_t> population_vertex;  // sample index -> population vertex
  std::vector<RecruitmentEvent> events;
  bool truncated = false;               // stopped before reaching n
};

/// Continuous-time RDS recruitment: simultaneous, competitive recruitment
/// across susceptible edges with the configured waiting-time law. Initial
/// seeds enter together at time 0 with `coupons_per_subject` coupons each, as
/// does every recruit. If recruitment stalls before n subjects, a new seed is
/// drawn by the seed rule one mean edge-wait later (or the run stops).
SimulationResult simulate_rds(const PopulationGraph& g, std::size_t n, const SeedSelection& seeds,
                              int coupons_per_subject, const RecruitmentModel& model, Rng& rng,
                              RaceEngine engine = RaceEngine::gillespie);

/// Turn-taking recruitment: a recruiter is drawn uniformly from those with a
/// coupon and an unrecruited neighbour, then a recruit uniformly from its
/// unrecruited neighbours. Event k (0-based) gets time k.
SimulationResult simulate_turn_taking(const PopulationGraph& g, std::size_t n, const SeedSelection& seeds,
                                      int coupons_per_subject, Rng& rng);

}  // namespace rdsgraph

#endif  // RDSGRAPH_RECRUIT_SIM_HPP_
