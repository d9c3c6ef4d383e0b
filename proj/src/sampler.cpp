#include "rdsgraph/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace rdsgraph {

namespace {

constexpr double kLambdaFloor = 1e-12;

double log_normal_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

bool accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < std::exp(log_ratio);
}

}  // namespace

PriorSpec PriorSpec::from_mean_sd(double mean, double sd) {
  if (!(mean > 0.0) || !(sd > 0.0)) throw std::invalid_argument("prior mean and SD must be positive");
  return {mean * mean / (sd * sd), mean / (sd * sd)};
}

double PriorSpec::sd() const { return std::sqrt(shape) / rate; }

double PriorSpec::log_density(double lambda) const {
  return (shape - 1.0) * std::log(lambda) - rate * lambda;
}

void PriorSpec::validate() const {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("prior shape and rate must be positive");
}

double AnnealingSchedule::at(std::size_t sweep) const {
  return std::max(floor, initial * std::pow(decay, static_cast<double>(sweep)));
}

void AnnealingSchedule::validate() const {
  if (!(initial > 0.0)) throw std::invalid_argument("initial temperature must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("annealing decay must lie in (0, 1]");
  if (!(floor > 0.0)) throw std::invalid_argument("temperature floor must be positive");
}

void ChainConfig::validate() const {
  if (thinning == 0) throw std::invalid_argument("thinning must be at least 1");
  if (initial_lambda && !(*initial_lambda > 0.0)) throw std::invalid_argument("initial lambda must be positive");
  annealing.validate();
}

std::size_t ChainConfig::sweep_attempts(std::size_t n) const {
  if (sweep_length > 0) return sweep_length;
  return std::max<std::size_t>(1, n * (n - (n > 0 ? 1 : 0)) / 2);
}

std::optional<Move> propose_move(const SubgraphState& state, Rng& rng) {
  const std::size_t n = state.adjacency().size();
  if (n < 2 || state.counts().total() == 0) return std::nullopt;
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::uniform_int_distribution<std::size_t> second(0, n - 2);
  const std::size_t cap = 100 * n * n;
  for (std::size_t attempt = 0; attempt < cap; ++attempt) {
    std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);
    if (state.can_add(i, j)) return Move{MoveKind::add, i, j};
    if (state.can_remove(i, j)) return Move{MoveKind::remove, i, j};
  }
  std::vector<Move> feasible;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (state.can_add(i, j)) feasible.push_back({MoveKind::add, i, j});
      if (state.can_remove(i, j)) feasible.push_back({MoveKind::remove, i, j});
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
  return feasible[pick(rng)];
}

FeasibleCounts count_feasible(const SubgraphState& state) { return state.counts(); }

double move_log_acceptance(const SubgraphState& state, const Move& m, double lambda,
                           const TimingCache& timing, double temperature) {
  const double log_lik = m.kind == MoveKind::add ? log_ratio_add(state, m.i, m.j, lambda, timing)
                                                 : log_ratio_remove(state, m.i, m.j, lambda, timing);
  const auto before = state.counts().total();
  const auto after = state.counts_after(m).total();
  return log_lik / temperature + std::log(static_cast<double>(before)) -
         std::log(static_cast<double>(after));
}

bool mh_step_graph(SubgraphState& state, double lambda, const TimingCache& timing, Rng& rng,
                   double temperature) {
  const auto move = propose_move(state, rng);
  if (!move) return false;
  if (!accept(move_log_acceptance(state, *move, lambda, timing, temperature), rng)) return false;
  state.apply(*move);
  return true;
}

double log_posterior(const SubgraphState& state, double lambda, const PriorSpec& prior) {
  const auto& obs = state.observed();
  return log_likelihood(obs.waits, state.susceptible(), lambda, obs.graph.seed_mask()) +
         prior.log_density(lambda);
}

double conditional_mode(const SubgraphState& state, const PriorSpec& prior) {
  const auto& obs = state.observed();
  const double numerator = static_cast<double>(obs.recruit_count()) + prior.shape - 1.0;
  const double denominator = exposure(obs.waits, state.susceptible()) + prior.rate;
  return std::max(kLambdaFloor, numerator / denominator);
}

LambdaStep mh_step_lambda(const SubgraphState& state, double lambda, const PriorSpec& prior, Rng& rng,
                          LambdaProposal proposal) {
  const auto& obs = state.observed();
  const double r = static_cast<double>(obs.recruit_count());
  const double sw = exposure(obs.waits, state.susceptible());
  double centre = 0.0;
  double effective = 0.0;  // events behind the normal approximation
  if (proposal == LambdaProposal::likelihood) {
    centre = r / sw;
    effective = r;
  } else {
    effective = r + prior.shape - 1.0;
    centre = effective / (sw + prior.rate);
  }
  if (!(effective > 0.0) || !(centre > 0.0) || !std::isfinite(centre)) {
    // No usable normal approximation; the conditional is Gamma(r + shape, sw + rate).
    std::gamma_distribution<double> exact(r + prior.shape, 1.0 / (sw + prior.rate));
    return {std::max(kLambdaFloor, exact(rng)), true};
  }
  const double sd = centre / std::sqrt(effective);
  const double proposed = std::normal_distribution<double>(centre, sd)(rng);
  if (!(proposed > 0.0)) return {lambda, false};
  const double log_lik = r * std::log(proposed / lambda) - (proposed - lambda) * sw;
  const double log_prior = prior.log_density(proposed) - prior.log_density(lambda);
  const double log_q = log_normal_density(lambda, centre, sd) - log_normal_density(proposed, centre, sd);
  if (accept(log_lik + log_prior + log_q, rng)) return {proposed, true};
  return {lambda, false};
}

namespace {

double initial_rate(const SubgraphState& state, const PriorSpec& prior, const ChainConfig& config) {
  if (config.initial_lambda) return *config.initial_lambda;
  const auto& obs = state.observed();
  try {
    return lambda_mle(state.susceptible(), obs.waits, obs.size(), obs.graph.seed_count()).lambda;
  } catch (const std::domain_error&) {
    return prior.mean();
  }
}

// Verifies the incremental state every `every` accepted moves.
class Checker {
 public:
  explicit Checker(std::size_t every) : every_(every) {}
  void accepted(const SubgraphState& state) {
    if (every_ == 0) return;
    if (++since_ >= every_) {
      state.verify();
      since_ = 0;
    }
  }

 private:
  std::size_t every_;
  std::size_t since_ = 0;
};

}  // namespace

PosteriorResult run_posterior(const ObservedData& obs, const PriorSpec& prior, const ChainConfig& config,
                              Rng& rng, const ChainObserver& observer) {
  prior.validate();
  config.validate();
  SubgraphState state(obs, recruitment_closure(obs.graph));
  const TimingCache timing(obs);
  const std::size_t n = obs.size();
  const std::size_t attempts = config.sweep_attempts(n);
  double lambda = initial_rate(state, prior, config);
  Checker checker(config.check_every);

  PosteriorResult out;
  out.edge_frequency.assign(n * n, 0.0);
  out.trace.rows.push_back({0, state.edge_count(), lambda, log_posterior(state, lambda, prior), 0.0});
  if (config.keep_snapshots) out.trace.snapshots.emplace_back(0, state.adjacency().edges());

  std::size_t lambda_steps = 0;
  std::size_t lambda_accepts = 0;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    std::size_t accepted = 0;
    for (std::size_t a = 0; a < attempts; ++a) {
      if (mh_step_graph(state, lambda, timing, rng)) {
        ++accepted;
        checker.accepted(state);
      }
    }
    if (config.lambda_every > 0 && it % config.lambda_every == 0) {
      const auto step = mh_step_lambda(state, lambda, prior, rng, config.lambda_proposal);
      lambda = step.lambda;
      ++lambda_steps;
      lambda_accepts += step.accepted;
    }
    if (it <= config.burn_in || (it - config.burn_in) % config.thinning != 0) continue;

    out.trace.rows.push_back({it, state.edge_count(), lambda, log_posterior(state, lambda, prior),
                              static_cast<double>(accepted) / static_cast<double>(attempts)});
    const auto edges = state.adjacency().edges();
    for (const auto& [i, j] : edges) {
      out.edge_frequency[i * n + j] += 1.0;
      out.edge_frequency[j * n + i] += 1.0;
    }
    if (config.keep_snapshots) out.trace.snapshots.emplace_back(it, edges);
    out.lambda_samples.push_back(lambda);
    ++out.samples;
    if (observer) observer(it, state, lambda);
  }
  if (out.samples > 0) {
    for (double& f : out.edge_frequency) f /= static_cast<double>(out.samples);
  }
  out.lambda_accept_rate =
      lambda_steps > 0 ? static_cast<double>(lambda_accepts) / static_cast<double>(lambda_steps) : 0.0;
  out.final_graph = state.adjacency();
  out.final_lambda = lambda;
  return out;
}

MapResult run_map(const ObservedData& obs, const PriorSpec& prior, const ChainConfig& config, Rng& rng,
                  const ChainObserver& observer) {
  prior.validate();
  config.validate();
  SubgraphState state(obs, recruitment_closure(obs.graph));
  const TimingCache timing(obs);
  const std::size_t attempts = config.sweep_attempts(obs.size());
  double lambda = config.initial_lambda ? *config.initial_lambda : conditional_mode(state, prior);
  Checker checker(config.check_every);

  MapResult out;
  out.graph = state.adjacency();
  out.lambda = conditional_mode(state, prior);
  out.log_posterior = log_posterior(state, out.lambda, prior);
  out.trace.rows.push_back({0, state.edge_count(), lambda, log_posterior(state, lambda, prior), 0.0});
  if (config.keep_snapshots) out.trace.snapshots.emplace_back(0, state.adjacency().edges());
  if (observer) observer(0, state, lambda);

  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const double temperature = config.annealing.at(it - 1);
    std::size_t accepted = 0;
    for (std::size_t a = 0; a < attempts; ++a) {
      if (mh_step_graph(state, lambda, timing, rng, temperature)) {
        ++accepted;
        checker.accepted(state);
      }
    }
    if (config.lambda_every > 0 && it % config.lambda_every == 0) lambda = conditional_mode(state, prior);

    // The best lambda for a fixed graph is its conditional mode, so graphs are
    // ranked by the profile log posterior.
    const double mode = conditional_mode(state, prior);
    const double profile = log_posterior(state, mode, prior);
    if (profile > out.log_posterior) {
      out.log_posterior = profile;
      out.graph = state.adjacency();
      out.lambda = mode;
      out.best_iteration = it;
    }
    if (it <= config.burn_in || (it - config.burn_in) % config.thinning != 0) continue;
    out.trace.rows.push_back({it, state.edge_count(), lambda, log_posterior(state, lambda, prior),
                              static_cast<double>(accepted) / static_cast<double>(attempts)});
    if (config.keep_snapshots) out.trace.snapshots.emplace_back(it, state.adjacency().edges());
    if (observer) observer(it, state, lambda);
  }

  const SubgraphState best(obs, out.graph);
  try {
    out.conditional_mle = lambda_mle(best.susceptible(), obs.waits, obs.size(), obs.graph.seed_count()).lambda;
  } catch (const std::domain_error&) {
    out.conditional_mle = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

PriorSpec PriorBounds::for_shape(double shape) const {
  if (!(shape > 0.0)) throw std::invalid_argument("prior shape must be positive");
  return {shape, shape / mean()};
}

PriorBounds empirical_prior_bounds(const ObservedData& obs) {
  const auto& g = obs.graph;
  const std::size_t n = obs.size();
  if (obs.recruit_count() == 0) throw std::domain_error("prior bounds need at least one recruit");
  // most[k]: sum_{i<k} (d_i - 1{i not seed}); fewest[k]: recruitment edges
  // from i < k to subjects recruited at or after k.
  double most_exposure = 0.0;
  double fewest_exposure = 0.0;
  long long most = 0;
  long long fewest = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      const std::size_t i = k - 1;
      const long long not_seed = g.is_seed(i) ? 0 : 1;
      most += obs.degrees[i] - not_seed;
      fewest += static_cast<long long>(g.out_degree(i)) - not_seed;
    }
    most_exposure += static_cast<double>(most) * obs.waits[k];
    fewest_exposure += static_cast<double>(fewest) * obs.waits[k];
  }
  if (!(most_exposure > 0.0) || !(fewest_exposure > 0.0)) {
    throw std::domain_error("prior bounds undefined: zero susceptible exposure time");
  }
  const double recruits = static_cast<double>(obs.recruit_count());
  return {recruits / most_exposure, recruits / fewest_exposure};
}

}  // namespace rdsgraph
