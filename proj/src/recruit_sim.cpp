#include "rdsgraph/recruit_sim.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace rdsgraph {

std::size_t PopulationGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& nb : neighbors) total += nb.size();
  return total / 2;
}

bool PopulationGraph::has_edge(std::size_t a, std::size_t b) const {
  return std::binary_search(neighbors[a].begin(), neighbors[a].end(), b);
}

PopulationGraph PopulationGraph::from_edges(std::size_t n, const std::vector<Edge>& edges) {
  PopulationGraph g;
  g.neighbors.resize(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) throw std::out_of_range("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loops are not allowed");
    g.neighbors[a].push_back(b);
    g.neighbors[b].push_back(a);
  }
  for (auto& nb : g.neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  g.model = "edges";
  return g;
}

PopulationGraph generate_er_graph(std::size_t n, double p, Rng& rng) {
  if (n < 1) throw std::invalid_argument("Erdos-Renyi graph needs at least one vertex");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  PopulationGraph g;
  g.neighbors.resize(n);
  g.model = "erdos-renyi";
  g.parameters = {{"N", static_cast<double>(n)}, {"p", p}};
  if (p == 0.0) return g;
  if (p == 1.0) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b) g.neighbors[a].push_back(b);
      }
    }
    return g;
  }
  // Geometric skipping over the upper triangle in row-major order.
  std::geometric_distribution<std::uint64_t> skip(p);
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t pos = skip(rng);
  std::size_t row = 0;
  std::uint64_t row_start = 0;  // linear index of (row, row + 1)
  while (pos < total) {
    while (pos >= row_start + (n - 1 - row)) {
      row_start += n - 1 - row;
      ++row;
    }
    const std::size_t col = row + 1 + static_cast<std::size_t>(pos - row_start);
    g.neighbors[row].push_back(col);
    g.neighbors[col].push_back(row);
    pos += 1 + skip(rng);
  }
  for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
  return g;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

PopulationGraph load_population_graph(std::istream& in, LoadReport* report) {
  LoadReport local;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  auto id_of = [&](const std::string& name) {
    auto [it, inserted] = index.try_emplace(name, labels.size());
    if (inserted) labels.push_back(name);
    return it->second;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) {
      throw std::runtime_error(fmt::format("edge list line {}: expected two vertex IDs, found {} fields",
                                           line_no, fields.size()));
    }
    const std::size_t a = id_of(fields[0]);
    const std::size_t b = id_of(fields[1]);
    if (a == b) {
      ++local.self_loops;
      continue;
    }
    edges.emplace_back(a, b);
  }
  PopulationGraph g;
  g.neighbors.resize(labels.size());
  for (const auto& [a, b] : edges) {
    g.neighbors[a].push_back(b);
    g.neighbors[b].push_back(a);
  }
  std::size_t kept_ends = 0;
  for (auto& nb : g.neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    kept_ends += nb.size();
  }
  local.duplicates = edges.size() - kept_ends / 2;
  local.empty = labels.empty();
  g.labels = std::move(labels);
  g.model = "file";
  if (report != nullptr) *report = local;
  return g;
}

PopulationGraph load_population_graph(const std::filesystem::path& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open edge list {}", path.string()));
  return load_population_graph(in, report);
}

void RecruitmentModel::validate() const {
  if (!(rate > 0.0)) throw std::invalid_argument("recruitment rate must be positive");
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
}

namespace {

// Bookkeeping shared by all recruitment engines, over population vertices.
class Process {
 public:
  Process(const PopulationGraph& g, std::size_t target, const SeedSelection& seeds, int coupons, Rng& rng)
      : g_(g),
        target_(target),
        seeds_(seeds),
        coupons_per_subject_(coupons),
        rng_(rng),
        recruited_(g.size(), false),
        coupons_(g.size(), 0),
        susceptible_(g.size(), 0) {
    if (target > g.size()) {
      throw std::invalid_argument(
          fmt::format("sample size {} exceeds population size {}", target, g.size()));
    }
    if (coupons < 0) throw std::invalid_argument("coupons per subject must be non-negative");
    if (seeds.rule == SeedRule::explicit_list) {
      for (std::size_t v : seeds.vertices) {
        if (v >= g.size()) throw std::out_of_range("explicit seed outside the population");
      }
    }
    for (std::size_t v = 0; v < g.size(); ++v) susceptible_[v] = g.degree(v);
  }

  bool done() const { return order_.size() >= target_; }
  std::size_t sampled() const { return order_.size(); }
  bool is_recruited(std::size_t v) const { return recruited_[v]; }
  int coupons(std::size_t v) const { return coupons_[v]; }
  std::size_t susceptible(std::size_t v) const { return susceptible_[v]; }
  const std::vector<std::size_t>& active() const { return active_; }

  void enrol(std::size_t v, std::size_t recruiter, double time) {
    recruited_[v] = true;
    order_.push_back(v);
    recruiter_.push_back(recruiter);
    times_.push_back(time);
    events_.push_back({time, recruiter, v});
    for (std::size_t y : g_.neighbors[v]) --susceptible_[y];
    if (recruiter != kNoRecruiter) {
      if (--coupons_[recruiter] == 0) {
        active_.erase(std::find(active_.begin(), active_.end(), recruiter));
      }
    }
    coupons_[v] = coupons_per_subject_;
    if (coupons_[v] > 0) active_.push_back(v);
  }

  /// Draws the next seed by the seed rule; nullopt when none is available.
  std::optional<std::size_t> draw_seed() {
    if (seeds_.rule == SeedRule::explicit_list) {
      while (next_explicit_ < seeds_.vertices.size()) {
        const std::size_t v = seeds_.vertices[next_explicit_++];
        if (!recruited_[v]) return v;
      }
      return std::nullopt;
    }
    std::vector<std::size_t> candidates;
    std::vector<double> weights;
    for (std::size_t v = 0; v < g_.size(); ++v) {
      if (recruited_[v]) continue;
      candidates.push_back(v);
      weights.push_back(static_cast<double>(g_.degree(v)));
    }
    if (candidates.empty()) return std::nullopt;
    const bool weighted = seeds_.rule == SeedRule::degree_biased &&
                          std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0; });
    if (weighted) {
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      return candidates[pick(rng_)];
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng_)];
  }

  /// Enrols the initial seeds at time 0. Returns false when fewer were available.
  bool enrol_initial_seeds() {
    const std::size_t count = std::min(seeds_.count, target_);
    for (std::size_t k = 0; k < count; ++k) {
      auto v = draw_seed();
      if (!v) return false;
      enrol(*v, kNoRecruiter, 0.0);
    }
    return true;
  }

  /// Uniform unrecruited neighbour of u.
  std::size_t pick_susceptible_neighbor(std::size_t u) {
    std::uniform_int_distribution<std::size_t> pick(0, susceptible_[u] - 1);
    std::size_t r = pick(rng_);
    for (std::size_t x : g_.neighbors[u]) {
      if (recruited_[x]) continue;
      if (r-- == 0) return x;
    }
    throw std::logic_error("susceptible neighbour count out of sync");
  }

  StallRule stall_rule() const { return seeds_.on_stall; }
  Rng& rng() { return rng_; }
  const PopulationGraph& graph() const { return g_; }
  std::size_t seed_count() const { return seeds_.count; }
  std::size_t target() const { return target_; }

  SimulationResult finish(double rate, bool truncated) const {
    const std::size_t n = order_.size();
    std::unordered_map<std::size_t, std::size_t> sample_index;
    for (std::size_t k = 0; k < n; ++k) sample_index.emplace(order_[k], k);
    std::vector<std::size_t> recruiter_of(n, kNoRecruiter);
    std::vector<int> degrees(n);
    std::vector<std::string> ids(n);
    std::vector<Edge> induced;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t v = order_[k];
      if (recruiter_[k] != kNoRecruiter) recruiter_of[k] = sample_index.at(recruiter_[k]);
      degrees[k] = static_cast<int>(g_.degree(v));
      ids[k] = g_.label(v);
      for (std::size_t y : g_.neighbors[v]) {
        auto it = sample_index.find(y);
        if (it != sample_index.end() && it->second > k) induced.emplace_back(k, it->second);
      }
    }
    std::vector<int> issued(n, coupons_per_subject_);
    SimulationResult result{
        make_observed(RecruitmentGraph(std::move(recruiter_of)), std::move(degrees), times_,
                      std::move(issued), std::move(ids)),
        Adjacency::from_edges(n, induced), rate, order_, events_, truncated};
    return result;
  }

 private:
  const PopulationGraph& g_;
  std::size_t target_;
  SeedSelection seeds_;
  int coupons_per_subject_;
  Rng& rng_;
  std::vector<bool> recruited_;
  std::vector<int> coupons_;
  std::vector<std::size_t> susceptible_;  // unrecruited neighbours
  std::vector<std::size_t> active_;       // enrolled vertices holding coupons
  std::vector<std::size_t> order_;
  std::vector<std::size_t> recruiter_;
  std::vector<double> times_;
  std::vector<RecruitmentEvent> events_;
  std::size_t next_explicit_ = 0;
};

SimulationResult run_gillespie(Process& p, double rate) {
  Rng& rng = p.rng();
  double now = 0.0;
  if (!p.enrol_initial_seeds()) return p.finish(rate, true);
  while (!p.done()) {
    std::size_t total = 0;
    for (std::size_t u : p.active()) total += p.susceptible(u);
    if (total == 0) {
      if (p.stall_rule() == StallRule::stop) return p.finish(rate, true);
      auto seed = p.draw_seed();
      if (!seed) return p.finish(rate, true);
      now += 1.0 / rate;
      p.enrol(*seed, kNoRecruiter, now);
      continue;
    }
    now += std::exponential_distribution<double>(rate * static_cast<double>(total))(rng);
    // A uniformly chosen susceptible edge: recruiter weighted by |S_u|, then a
    // uniform neighbour, so recruit v has probability |R_v| / sum_k |R_k|.
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    std::size_t r = pick(rng);
    std::size_t recruiter = kNoRecruiter;
    for (std::size_t u : p.active()) {
      if (r < p.susceptible(u)) {
        recruiter = u;
        break;
      }
      r -= p.susceptible(u);
    }
    const std::size_t recruit = p.pick_susceptible_neighbor(recruiter);
    p.enrol(recruit, recruiter, now);
  }
  return p.finish(rate, false);
}

struct Clock {
  double time;
  std::size_t recruiter;
  std::size_t recruit;
  bool operator>(const Clock& o) const { return time > o.time; }
};

// One clock per susceptible edge, started when the edge becomes susceptible.
// A clock is void once its recruit is enrolled or its recruiter runs out of
// coupons; both are permanent, so void clocks are discarded lazily.
SimulationResult run_edge_clocks(Process& p, const RecruitmentModel& model) {
  Rng& rng = p.rng();
  const PopulationGraph& pop = p.graph();
  std::exponential_distribution<double> exp_wait(model.rate);
  std::gamma_distribution<double> gamma_wait(model.shape, 1.0 / (model.shape * model.rate));
  auto draw = [&] { return model.variant == WaitingTime::gamma ? gamma_wait(rng) : exp_wait(rng); };

  std::priority_queue<Clock, std::vector<Clock>, std::greater<>> clocks;
  auto start_clocks = [&](std::size_t v, double now) {
    if (p.coupons(v) <= 0) return;
    for (std::size_t x : pop.neighbors[v]) {
      if (!p.is_recruited(x)) clocks.push({now + draw(), v, x});
    }
  };
  auto is_void = [&](const Clock& c) { return p.is_recruited(c.recruit) || p.coupons(c.recruiter) <= 0; };

  double now = 0.0;
  if (!p.enrol_initial_seeds()) return p.finish(model.rate, true);
  // Seeds enter together, so only edges to non-seeds start clocks.
  for (std::size_t u : std::vector<std::size_t>(p.active())) start_clocks(u, now);
  while (!p.done()) {
    while (!clocks.empty() && is_void(clocks.top())) clocks.pop();
    if (clocks.empty()) {
      if (p.stall_rule() == StallRule::stop) return p.finish(model.rate, true);
      auto seed = p.draw_seed();
      if (!seed) return p.finish(model.rate, true);
      now += 1.0 / model.rate;
      p.enrol(*seed, kNoRecruiter, now);
      start_clocks(*seed, now);
      continue;
    }
    const Clock c = clocks.top();
    clocks.pop();
    now = c.time;
    p.enrol(c.recruit, c.recruiter, now);
    start_clocks(c.recruit, now);
  }
  return p.finish(model.rate, false);
}

SimulationResult run_turn_taking(Process& p) {
  Rng& rng = p.rng();
  double now = 0.0;
  // Seeds get distinct unit-spaced times like every other event.
  const std::size_t count = std::min(p.seed_count(), p.target());
  for (std::size_t k = 0; k < count; ++k) {
    auto v = p.draw_seed();
    if (!v) return p.finish(1.0, true);
    p.enrol(*v, kNoRecruiter, now);
    now += 1.0;
  }
  if (p.sampled() < count) return p.finish(1.0, true);
  while (!p.done()) {
    std::vector<std::size_t> ready;
    for (std::size_t u : p.active()) {
      if (p.susceptible(u) > 0) ready.push_back(u);
    }
    if (ready.empty()) {
      if (p.stall_rule() == StallRule::stop) return p.finish(1.0, true);
      auto seed = p.draw_seed();
      if (!seed) return p.finish(1.0, true);
      p.enrol(*seed, kNoRecruiter, now);
      now += 1.0;
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
    const std::size_t recruiter = ready[pick(rng)];
    const std::size_t recruit = p.pick_susceptible_neighbor(recruiter);
    p.enrol(recruit, recruiter, now);
    now += 1.0;
  }
  return p.finish(1.0, false);
}

}  // namespace

SimulationResult simulate_rds(const PopulationGraph& g, std::size_t n, const SeedSelection& seeds,
                              int coupons_per_subject, const RecruitmentModel& model, Rng& rng,
                              RaceEngine engine) {
  model.validate();
  if (model.variant == WaitingTime::turn_taking) {
    return simulate_turn_taking(g, n, seeds, coupons_per_subject, rng);
  }
  Process p(g, n, seeds, coupons_per_subject, rng);
  if (model.variant == WaitingTime::gamma || engine == RaceEngine::edge_clocks) {
    return run_edge_clocks(p, model);
  }
  return run_gillespie(p, model.rate);
}

SimulationResult simulate_turn_taking(const PopulationGraph& g, std::size_t n, const SeedSelection& seeds,
                                      int coupons_per_subject, Rng& rng) {
  Process p(g, n, seeds, coupons_per_subject, rng);
  return run_turn_taking(p);
}

}  // namespace rdsgraph
