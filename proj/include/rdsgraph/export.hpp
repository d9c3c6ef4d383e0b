#ifndef RDSGRAPH_EXPORT_HPP_
#define RDSGRAPH_EXPORT_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "rdsgraph/graph_core.hpp"
#include "rdsgraph/recruit_sim.hpp"
#include "rdsgraph/sampler.hpp"

namespace rdsgraph {

/// "a,b" per edge (i < j) using `ids` as vertex names, after a '#' header.
/// Readable by load_population_graph.
void write_edge_list(const Adjacency& a, const std::vector<std::string>& ids, std::ostream& out);

/// Reads an edge list over known subject ids into an n-vertex adjacency.
Adjacency read_edge_list(std::istream& in, const std::vector<std::string>& ids);

/// Dense n x n CSV of edge frequencies, header row of ids.
void write_mean_adjacency(const std::vector<double>& freq, const std::vector<std::string>& ids, std::ostream& out);

void write_trace_csv(const ChainTrace& trace, std::ostream& out);

/// One line per recruitment event with population vertex labels.
void write_events_csv(const SimulationResult& sim, const PopulationGraph& g, std::ostream& out);

/// Files written by export_posterior: summary.json always; trace.csv,
/// mean_adjacency.csv, lambda.csv, final_edges.txt and snapshots/ only when
/// samples were recorded. Throws std::runtime_error on an unwritable directory.
void export_posterior(const std::filesystem::path& dir, const PosteriorResult& result, const ObservedData& obs,
                      const nlohmann::json& summary);

/// summary.json, map_edges.txt and trace.csv.
void export_map(const std::filesystem::path& dir, const MapResult& result, const ObservedData& obs,
                const nlohmann::json& summary);

/// Creates `dir` if needed and opens `dir / name` for writing.
std::ofstream open_output(const std::filesystem::path& dir, const std::string& name);

void write_json(const std::filesystem::path& dir, const std::string& name, const nlohmann::json& j);

}  // namespace rdsgraph

#endif  // RDSGRAPH_EXPORT_HPP_
