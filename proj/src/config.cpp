#include "rdsgraph/config.hpp"

#include <fstream>
#include <set>
#include <type_traits>

#include <fmt/format.h>

namespace rdsgraph {

namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", label()));
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", where(key)));
      if (std::is_unsigned_v<T> && !v.is_number_unsigned()) {
        throw ConfigError(fmt::format("{}: expected a non-negative integer", where(key)));
      }
    }
    try {
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}: {}", where(key), e.what()));
    }
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    T v{};
    read(key, v);
    out = v;
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), where(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(fmt::format("{}: unknown key", where(key)));
    }
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& where, const char* what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", where, what));
}

template <typename E>
E pick(const std::string& value, const std::string& where, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, e] : options) {
    if (value == name) return e;
  }
  std::string names;
  for (const auto& [name, e] : options) names += fmt::format("{}{}", names.empty() ? "" : ", ", name);
  throw ConfigError(fmt::format("{}: '{}' is not one of {}", where, value, names));
}

template <typename E>
std::string name_of(E e, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, v] : options) {
    if (v == e) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, SeedRule>> kSeedRules{
    {"uniform", SeedRule::uniform}, {"degree_biased", SeedRule::degree_biased}, {"explicit", SeedRule::explicit_list}};
const std::initializer_list<std::pair<const char*, StallRule>> kStallRules{{"add_seed", StallRule::add_seed},
                                                                            {"stop", StallRule::stop}};
const std::initializer_list<std::pair<const char*, WaitingTime>> kWaits{{"exponential", WaitingTime::exponential},
                                                                         {"gamma", WaitingTime::gamma},
                                                                         {"turn_taking", WaitingTime::turn_taking}};
const std::initializer_list<std::pair<const char*, RaceEngine>> kEngines{{"gillespie", RaceEngine::gillespie},
                                                                          {"edge_clocks", RaceEngine::edge_clocks}};
const std::initializer_list<std::pair<const char*, LambdaProposal>> kProposals{
    {"conditional", LambdaProposal::conditional}, {"likelihood", LambdaProposal::likelihood}};
const std::initializer_list<std::pair<const char*, RunMode>> kModes{{"simulate", RunMode::simulate},
                                                                     {"posterior", RunMode::posterior},
                                                                     {"map", RunMode::map},
                                                                     {"experiment", RunMode::experiment}};

double read_time(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return parse_time(v.get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
  }
  throw ConfigError(fmt::format("{}: expected a number or timestamp", where));
}

void parse_network(Section s, NetworkConfig& n) {
  std::string file;
  s.read("model", n.model);
  s.read("size", n.size);
  s.read("p", n.p);
  s.read("mean_degree", n.mean_degree);
  s.read("file", file);
  s.finish();
  n.file = file;
  require(n.model == "erdos-renyi" || n.model == "file", s.where("model"), "must be erdos-renyi or file");
  if (n.model == "file") {
    require(!n.file.empty(), s.where("file"), "required when model is file");
  } else {
    require(n.size >= 2, s.where("size"), "must be at least 2");
    require(n.p.has_value() != n.mean_degree.has_value(), s.where("p"), "give exactly one of p and mean_degree");
    n.edge_probability();
  }
}

void parse_simulation(Section s, SimulationConfig& c) {
  std::string rule = "uniform", stall = "add_seed", wait = "exponential", engine = "gillespie";
  s.read("sample_size", c.sample_size);
  s.read("seeds", c.seeds.count);
  s.read("seed_rule", rule);
  s.read("seed_vertices", c.seeds.vertices);
  s.read("on_stall", stall);
  s.read("coupons", c.coupons);
  s.read("waiting_time", wait);
  s.read("rate", c.model.rate);
  s.read("shape", c.model.shape);
  s.read("engine", engine);
  s.finish();
  c.seeds.rule = pick(rule, s.where("seed_rule"), kSeedRules);
  c.seeds.on_stall = pick(stall, s.where("on_stall"), kStallRules);
  c.model.variant = pick(wait, s.where("waiting_time"), kWaits);
  c.engine = pick(engine, s.where("engine"), kEngines);
  require(c.sample_size >= 1, s.where("sample_size"), "must be positive");
  require(c.seeds.count >= 1, s.where("seeds"), "must be positive");
  require(c.coupons >= 0, s.where("coupons"), "must be non-negative");
  if (c.seeds.rule == SeedRule::explicit_list) {
    require(!c.seeds.vertices.empty(), s.where("seed_vertices"), "required for the explicit seed rule");
  }
  try {
    c.model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("{}: {}", s.where("rate"), e.what()));
  }
}

void parse_data(Section s, DataConfig& d) {
  std::string file;
  s.read("file", file);
  s.read("skip_weekends", d.calendar.skip_weekends);
  if (s.has("breaks")) {
    const json& breaks = s.raw("breaks");
    require(breaks.is_array(), s.where("breaks"), "expected an array of [start, end] pairs");
    for (std::size_t k = 0; k < breaks.size(); ++k) {
      const auto where = fmt::format("{}[{}]", s.where("breaks"), k);
      require(breaks[k].is_array() && breaks[k].size() == 2, where, "expected [start, end]");
      const double a = read_time(breaks[k][0], where);
      const double b = read_time(breaks[k][1], where);
      require(a < b, where, "start must precede end");
      d.calendar.breaks.emplace_back(a, b);
    }
  }
  s.finish();
  d.file = file;
}

void parse_prior(Section s, PriorConfig& p) {
  s.read("mean", p.mean);
  s.read("sd", p.sd);
  s.read("shape", p.shape);
  s.read("rate", p.rate);
  s.read("empirical_shape", p.empirical_shape);
  s.finish();
  const bool explicit_pair = p.shape || p.rate;
  const bool moments = p.mean || p.sd;
  require(explicit_pair + moments + p.empirical_shape.has_value() <= 1, s.where("shape"),
          "use one of shape/rate, mean/sd or empirical_shape");
  if (explicit_pair) require(p.shape && p.rate, s.where("shape"), "shape and rate go together");
  for (const auto* v : {&p.mean, &p.sd, &p.shape, &p.rate, &p.empirical_shape}) {
    if (*v) require(**v > 0.0, s.where("prior"), "values must be positive");
  }
}

void parse_chain(Section s, ChainConfig& c) {
  s.read("iterations", c.iterations);
  s.read("burn_in", c.burn_in);
  s.read("thinning", c.thinning);
  s.read("sweep_length", c.sweep_length);
  s.read("lambda_every", c.lambda_every);
  if (s.has("lambda_proposal")) {
    std::string proposal;
    s.read("lambda_proposal", proposal);
    c.lambda_proposal = pick(proposal, s.where("lambda_proposal"), kProposals);
  }
  s.read("initial_lambda", c.initial_lambda);
  s.read("keep_snapshots", c.keep_snapshots);
  s.read("check_every", c.check_every);
  if (s.has("annealing")) {
    Section a = s.child("annealing");
    a.read("initial", c.annealing.initial);
    a.read("decay", c.annealing.decay);
    a.read("floor", c.annealing.floor);
    a.finish();
  }
  s.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("chain: {}", e.what()));
  }
}

void parse_experiment(Section s, ExperimentConfig& e) {
  s.read("replications", e.replications);
  s.read("shapes", e.shapes);
  s.read("prior_sds", e.prior_sds);
  s.read("workers", e.workers);
  s.finish();
  require(e.replications >= 1, s.where("replications"), "must be positive");
  require(!e.shapes.empty(), s.where("shapes"), "must not be empty");
  require(!e.prior_sds.empty(), s.where("prior_sds"), "must not be empty");
  for (double v : e.shapes) require(v > 0.0, s.where("shapes"), "values must be positive");
  for (double v : e.prior_sds) require(v > 0.0, s.where("prior_sds"), "values must be positive");
  require(e.workers >= 1, s.where("workers"), "must be positive");
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

double NetworkConfig::edge_probability() const {
  const double q = p ? *p : *mean_degree / static_cast<double>(size - 1);
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError(fmt::format("network: edge probability {} outside [0, 1]", q));
  return q;
}

PriorSpec PriorConfig::resolve(const ObservedData* obs, double default_mean) const {
  if (shape && rate) return {*shape, *rate};
  if (empirical_shape) {
    if (!obs) throw ConfigError("prior.empirical_shape needs observed data");
    return empirical_prior_bounds(*obs).for_shape(*empirical_shape);
  }
  // A mean alone is allowed in the file because experiments take the SD from their grid.
  if (mean && !sd) throw ConfigError("prior.sd: required with prior.mean outside experiments");
  if (sd) return PriorSpec::from_mean_sd(mean.value_or(default_mean), *sd);
  return PriorSpec{};
}

RunMode parse_mode(const std::string& s) { return pick(s, "mode", kModes); }
std::string to_string(RunMode m) { return name_of(m, kModes); }

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  Section root(j, "");
  std::string mode = "map", output = "out";
  root.read("mode", mode);
  root.read("seed", c.seed);
  root.read("output", output);
  c.mode = parse_mode(mode);
  c.output = output;
  if (root.has("network")) parse_network(root.child("network"), c.network);
  else c.network.p = 5.0 / static_cast<double>(c.network.size);
  if (root.has("simulation")) parse_simulation(root.child("simulation"), c.simulation);
  if (root.has("data")) parse_data(root.child("data"), c.data);
  if (root.has("prior")) parse_prior(root.child("prior"), c.prior);
  if (root.has("chain")) parse_chain(root.child("chain"), c.chain);
  if (root.has("experiment")) parse_experiment(root.child("experiment"), c.experiment);
  root.finish();
  c.chain.mode = c.mode == RunMode::posterior ? ChainMode::posterior : ChainMode::map;
  c.chain.seed = c.seed;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
  json breaks = json::array();
  for (const auto& [a, b] : c.data.calendar.breaks) breaks.push_back({a, b});
  const auto& sim = c.simulation;
  return {
      {"mode", to_string(c.mode)},
      {"seed", c.seed},
      {"output", c.output.string()},
      {"network",
       {{"model", c.network.model},
        {"size", c.network.size},
        {"p", optional_json(c.network.p)},
        {"mean_degree", optional_json(c.network.mean_degree)},
        {"file", c.network.file.string()}}},
      {"simulation",
       {{"sample_size", sim.sample_size},
        {"seeds", sim.seeds.count},
        {"seed_rule", name_of(sim.seeds.rule, kSeedRules)},
        {"seed_vertices", sim.seeds.vertices},
        {"on_stall", name_of(sim.seeds.on_stall, kStallRules)},
        {"coupons", sim.coupons},
        {"waiting_time", name_of(sim.model.variant, kWaits)},
        {"rate", sim.model.rate},
        {"shape", sim.model.shape},
        {"engine", name_of(sim.engine, kEngines)}}},
      {"data",
       {{"file", c.data.file.string()}, {"skip_weekends", c.data.calendar.skip_weekends}, {"breaks", breaks}}},
      {"prior",
       {{"mean", optional_json(c.prior.mean)},
        {"sd", optional_json(c.prior.sd)},
        {"shape", optional_json(c.prior.shape)},
        {"rate", optional_json(c.prior.rate)},
        {"empirical_shape", optional_json(c.prior.empirical_shape)}}},
      {"chain",
       {{"iterations", c.chain.iterations},
        {"burn_in", c.chain.burn_in},
        {"thinning", c.chain.thinning},
        {"sweep_length", c.chain.sweep_length},
        {"lambda_every", c.chain.lambda_every},
        {"lambda_proposal", name_of(c.chain.lambda_proposal, kProposals)},
        {"initial_lambda", optional_json(c.chain.initial_lambda)},
        {"keep_snapshots", c.chain.keep_snapshots},
        {"check_every", c.chain.check_every},
        {"annealing",
         {{"initial", c.chain.annealing.initial},
          {"decay", c.chain.annealing.decay},
          {"floor", c.chain.annealing.floor}}}}},
      {"experiment",
       {{"replications", c.experiment.replications},
        {"shapes", c.experiment.shapes},
        {"prior_sds", c.experiment.prior_sds},
        {"workers", c.experiment.workers}}},
  };
}

}  // namespace rdsgraph
