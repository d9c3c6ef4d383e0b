#include "rdsgraph/export.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace rdsgraph {

void write_edge_list(const Adjacency& a, const std::vector<std::string>& ids, std::ostream& out) {
  out << "# source,target\n";
  for (const auto& [i, j] : a.edges()) out << ids[i] << ',' << ids[j] << '\n';
}

Adjacency read_edge_list(std::istream& in, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < ids.size(); ++k) index.emplace(ids[k], k);
  LoadReport report;
  const PopulationGraph g = load_population_graph(in, &report);
  Adjacency a(ids.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (std::size_t w : g.neighbors[v]) {
      if (w <= v) continue;
      const auto x = index.find(g.label(v));
      const auto y = index.find(g.label(w));
      if (x == index.end() || y == index.end()) {
        throw std::runtime_error(fmt::format("edge ({}, {}) names an unknown subject", g.label(v), g.label(w)));
      }
      a.set(x->second, y->second);
    }
  }
  return a;
}

void write_mean_adjacency(const std::vector<double>& freq, const std::vector<std::string>& ids, std::ostream& out) {
  const std::size_t n = ids.size();
  if (freq.size() != n * n) throw std::invalid_argument("frequency matrix does not match the id list");
  for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << ids[j];
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << fmt::format("{}", freq[i * n + j]);
    out << '\n';
  }
}

void write_trace_csv(const ChainTrace& trace, std::ostream& out) {
  out << "iteration,edge_count,lambda,log_posterior,accept_rate\n";
  for (const auto& r : trace.rows) {
    out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", r.iteration, r.edge_count, r.lambda, r.log_posterior,
                       r.accept_rate);
  }
}

void write_events_csv(const SimulationResult& sim, const PopulationGraph& g, std::ostream& out) {
  out << "time,recruiter,recruit\n";
  for (const auto& e : sim.events) {
    out << fmt::format("{:.17g},{},{}\n", e.time, e.recruiter == kNoRecruiter ? "" : g.label(e.recruiter),
                       g.label(e.recruit));
  }
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", (dir / name).string()));
  return out;
}

void write_json(const std::filesystem::path& dir, const std::string& name, const nlohmann::json& j) {
  auto out = open_output(dir, name);
  out << j.dump(2) << '\n';
}

void export_posterior(const std::filesystem::path& dir, const PosteriorResult& result, const ObservedData& obs,
                      const nlohmann::json& summary) {
  nlohmann::json s = summary;
  s["samples"] = result.samples;
  s["lambda_accept_rate"] = result.lambda_accept_rate;
  if (result.samples > 0) {
    double mean = 0.0;
    for (double l : result.lambda_samples) mean += l;
    s["lambda_posterior_mean"] = mean / static_cast<double>(result.samples);
  }
  write_json(dir, "summary.json", s);
  if (result.samples == 0) return;

  auto trace = open_output(dir, "trace.csv");
  write_trace_csv(result.trace, trace);
  auto mean = open_output(dir, "mean_adjacency.csv");
  write_mean_adjacency(result.edge_frequency, obs.ids, mean);
  auto lambda = open_output(dir, "lambda.csv");
  lambda << "sample,lambda\n";
  for (std::size_t k = 0; k < result.lambda_samples.size(); ++k) {
    lambda << fmt::format("{},{:.17g}\n", k, result.lambda_samples[k]);
  }
  auto final_edges = open_output(dir, "final_edges.txt");
  write_edge_list(result.final_graph, obs.ids, final_edges);
  for (const auto& [it, edges] : result.trace.snapshots) {
    auto snap = open_output(dir / "snapshots", fmt::format("edges_{:08}.txt", it));
    write_edge_list(Adjacency::from_edges(obs.size(), edges), obs.ids, snap);
  }
}

void export_map(const std::filesystem::path& dir, const MapResult& result, const ObservedData& obs,
                const nlohmann::json& summary) {
  nlohmann::json s = summary;
  s["lambda_map"] = result.lambda;
  if (std::isfinite(result.conditional_mle)) s["lambda_mle"] = result.conditional_mle;
  else s["lambda_mle"] = nullptr;
  s["log_posterior"] = result.log_posterior;
  s["best_iteration"] = result.best_iteration;
  s["edge_count"] = result.graph.edge_count();
  write_json(dir, "summary.json", s);
  auto edges = open_output(dir, "map_edges.txt");
  write_edge_list(result.graph, obs.ids, edges);
  auto trace = open_output(dir, "trace.csv");
  write_trace_csv(result.trace, trace);
}

}  // namespace rdsgraph
