#ifndef RDSGRAPH_CONFIG_HPP_
#define RDSGRAPH_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "rdsgraph/ingest.hpp"
#include "rdsgraph/recruit_sim.hpp"
#include "rdsgraph/sampler.hpp"

namespace rdsgraph {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { simulate, posterior, map, experiment };

struct NetworkConfig {
  std::string model = "erdos-renyi";  // or "file"
  std::size_t size = 1000;
  std::optional<double> p;            // edge probability
  std::optional<double> mean_degree;  // alternative to p: p = mean_degree / (size - 1)
  std::filesystem::path file;

  double edge_probability() const;
};

struct SimulationConfig {
  std::size_t sample_size = 150;
  SeedSelection seeds{10, SeedRule::uniform, StallRule::add_seed, {}};
  int coupons = 3;
  RecruitmentModel model;
  RaceEngine engine = RaceEngine::gillespie;
};

struct DataConfig {
  std::filesystem::path file;
  CalendarMask calendar;
};

/// Either explicit (shape, rate), (mean, sd), or the empirical bounds with a shape.
struct PriorConfig {
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> shape;
  std::optional<double> rate;
  std::optional<double> empirical_shape;

  PriorSpec resolve(const ObservedData* obs, double default_mean) const;
};

struct ExperimentConfig {
  std::size_t replications = 30;
  std::vector<double> shapes{1.0};     // waiting-time shape grid; 1 keeps the exponential law
  std::vector<double> prior_sds{0.01};
  unsigned workers = 1;
};

struct RunConfig {
  RunMode mode = RunMode::map;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
  NetworkConfig network;
  SimulationConfig simulation;
  DataConfig data;
  PriorConfig prior;
  ChainConfig chain;
  ExperimentConfig experiment;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the offending key path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form (all fields, defaults filled in) for summaries.
nlohmann::json to_json(const RunConfig& c);

RunMode parse_mode(const std::string& s);
std::string to_string(RunMode m);

}  // namespace rdsgraph

#endif  // RDSGRAPH_CONFIG_HPP_
