#include "rdsgraph/likelihood.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "rdsgraph/subgraph_state.hpp"

namespace rdsgraph {

TimingCache::TimingCache(const ObservedData& obs)
    : times_(obs.times), t_star_(obs.size()), last_(obs.size()) {
  for (std::size_t i = 0; i < obs.size(); ++i) {
    last_[i] = obs.coupons.last_held(i);
    t_star_[i] = times_[last_[i]];
  }
}

std::vector<std::int64_t> susceptible_counts(const Adjacency& a, const CouponMatrix& c,
                                             std::span<const int> u) {
  const std::size_t n = a.size();
  if (c.size() != n || u.size() != n) throw std::invalid_argument("dimension mismatch in susceptible_counts");
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] < 0) {
      throw std::invalid_argument(fmt::format("negative pendant count at vertex {}", i));
    }
  }
  std::vector<std::int64_t> s(n, 0);
  // Edge {x, y} with x < y: y is unrecruited at every event j <= y, so the edge
  // is susceptible at j when x holds a coupon there (x < j <= y).
  for (const auto& [x, y] : a.edges()) {
    const std::size_t hi = std::min(c.last_held(x), y);
    for (std::size_t j = x + 1; j <= hi; ++j) ++s[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= c.last_held(i); ++j) s[j] += u[i];
  }
  return s;
}

double exposure(std::span<const double> waits, std::span<const std::int64_t> s) {
  double sw = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) sw += static_cast<double>(s[k]) * waits[k];
  return sw;
}

double log_likelihood(std::span<const double> waits, std::span<const std::int64_t> s, double lambda,
                      const std::vector<bool>& seed_mask) {
  if (waits.size() != s.size() || seed_mask.size() != s.size()) {
    throw std::invalid_argument("dimension mismatch in log_likelihood");
  }
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
  double ll = 0.0;
  const double log_lambda = std::log(lambda);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (seed_mask[k]) continue;
    if (s[k] <= 0) return -std::numeric_limits<double>::infinity();
    ll += log_lambda + std::log(static_cast<double>(s[k]));
  }
  return ll - lambda * exposure(waits, s);
}

RateEstimate lambda_mle(std::span<const std::int64_t> s, std::span<const double> waits, std::size_t n,
                        std::size_t seed_count) {
  if (n <= seed_count) throw std::domain_error("lambda MLE undefined without recruits");
  const double sw = exposure(waits, s);
  if (!(sw > 0.0)) throw std::domain_error("lambda MLE undefined: no susceptible exposure time");
  const double recruits = static_cast<double>(n - seed_count);
  const double lambda = recruits / sw;
  return {lambda, lambda * lambda / recruits};
}

double delta_time(std::size_t i, std::size_t j, const TimingCache& timing) {
  if (i >= j) throw std::invalid_argument(fmt::format("delta_time requires i < j (got {}, {})", i, j));
  const double ti_star = timing.t_star(i);
  const double tj = timing.t(j);
  return ti_star - std::min(tj, ti_star) + timing.t_star(j) - tj;
}

namespace {

// Calls f(k, change) for each k whose entry changes when {i, j} is toggled,
// where change is the number of susceptible edges gained on removal.
template <typename F>
void for_changed(std::size_t i, std::size_t j, const CouponMatrix& c, F&& f) {
  const std::size_t last_i = c.last_held(i);
  const std::size_t last_j = c.last_held(j);
  const std::size_t end = std::max(last_i, last_j);
  for (std::size_t k = j + 1; k <= end; ++k) {
    f(k, static_cast<std::int64_t>(k <= last_i) + static_cast<std::int64_t>(k <= last_j));
  }
}

void check_order(std::size_t i, std::size_t j, std::size_t n) {
  if (i >= j || j >= n) throw std::invalid_argument(fmt::format("invalid pair ({}, {})", i, j));
}

}  // namespace

void apply_add(std::span<std::int64_t> s, std::size_t i, std::size_t j, const CouponMatrix& c) {
  check_order(i, j, s.size());
  for_changed(i, j, c, [&](std::size_t k, std::int64_t d) {
    s[k] -= d;
    if (s[k] < 0) throw std::logic_error(fmt::format("susceptible count went negative at event {}", k));
  });
}

void apply_remove(std::span<std::int64_t> s, std::size_t i, std::size_t j, const CouponMatrix& c) {
  check_order(i, j, s.size());
  for_changed(i, j, c, [&](std::size_t k, std::int64_t d) { s[k] += d; });
}

double log_ratio_add(const SubgraphState& state, std::size_t i, std::size_t j, double lambda,
                     const TimingCache& timing) {
  if (i > j) std::swap(i, j);
  if (!state.can_add(i, j)) throw std::invalid_argument(fmt::format("cannot add edge ({}, {})", i, j));
  const auto& obs = state.observed();
  const auto& seeds = obs.graph.seed_mask();
  const auto s = state.susceptible();
  const auto& logs = state.logs();
  double r = 0.0;
  for_changed(i, j, obs.coupons, [&](std::size_t k, std::int64_t d) {
    if (!seeds[k]) r += logs(s[k] - d) - logs(s[k]);
  });
  return r + lambda * delta_time(i, j, timing);
}

double log_ratio_remove(const SubgraphState& state, std::size_t i, std::size_t j, double lambda,
                        const TimingCache& timing) {
  if (i > j) std::swap(i, j);
  if (!state.can_remove(i, j)) throw std::invalid_argument(fmt::format("cannot remove edge ({}, {})", i, j));
  const auto& obs = state.observed();
  const auto& seeds = obs.graph.seed_mask();
  const auto s = state.susceptible();
  const auto& logs = state.logs();
  double r = 0.0;
  for_changed(i, j, obs.coupons, [&](std::size_t k, std::int64_t d) {
    if (!seeds[k]) r += logs(s[k] + d) - logs(s[k]);
  });
  return r - lambda * delta_time(i, j, timing);
}

LogTable::LogTable(std::size_t max_value) : table_(max_value + 1) {
  table_[0] = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 1; v <= max_value; ++v) table_[v] = std::log(static_cast<double>(v));
}

}  // namespace rdsgraph
