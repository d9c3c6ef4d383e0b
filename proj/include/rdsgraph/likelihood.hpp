#ifndef RDSGRAPH_LIKELIHOOD_HPP_
#define RDSGRAPH_LIKELIHOOD_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rdsgraph/graph_core.hpp"

namespace rdsgraph {

class SubgraphState;

/// Event times plus each subject's coupon-active window.
///
/// t_star(i) is the time of the last event at which i still held a coupon:
/// the event where it spent its final coupon, the end of the study if it never
/// ran out, or its own entry time if it never held any.
class TimingCache {
 public:
  explicit TimingCache(const ObservedData& obs);

  std::size_t size() const { return times_.size(); }
  double t(std::size_t i) const { return times_[i]; }
  double t_star(std::size_t i) const { return t_star_[i]; }
  std::size_t last_held(std::size_t i) const { return last_[i]; }

 private:
  std::vector<double> times_;
  std::vector<double> t_star_;
  std::vector<std::size_t> last_;
};

/// Susceptible-edge counts just before each event, computed directly:
///   s[j] = sum_{i>=j} (A C)[i][j] + sum_i C[i][j] u[i].
/// O(n^2) over the stored coupon windows; used for initialisation and checks.
std::vector<std::int64_t> susceptible_counts(const Adjacency& a, const CouponMatrix& c,
                                             std::span<const int> u);

/// Log of the recruitment time-series likelihood,
///   sum_{k not seed} log(lambda s[k]) - lambda s'w.
/// Returns -infinity when some non-seed has s[k] == 0 (incompatible state).
double log_likelihood(std::span<const double> waits, std::span<const std::int64_t> s, double lambda,
                      const std::vector<bool>& seed_mask);

/// s'w, the total susceptible-edge exposure time.
double exposure(std::span<const double> waits, std::span<const std::int64_t> s);

struct RateEstimate {
  double lambda;
  double variance;  // asymptotic, lambda^2 / (n - |M|)
};

/// MLE of the edge-wise recruitment rate. Throws std::domain_error when
/// s'w == 0 or every subject is a seed.
RateEstimate lambda_mle(std::span<const std::int64_t> s, std::span<const double> waits, std::size_t n,
                        std::size_t seed_count);

/// Change in susceptible-edge time from adding {i, j}, i < j.
double delta_time(std::size_t i, std::size_t j, const TimingCache& timing);

/// In-place change-statistic updates of s for adding / removing {i, j}, i < j.
/// Only entries in the coupon windows of i (beyond j) and j are touched.
void apply_add(std::span<std::int64_t> s, std::size_t i, std::size_t j, const CouponMatrix& c);
void apply_remove(std::span<std::int64_t> s, std::size_t i, std::size_t j, const CouponMatrix& c);

/// Log likelihood ratio of the state with {i, j} added (removed) to the
/// current state. Iterates only over the entries of s that change.
double log_ratio_add(const SubgraphState& state, std::size_t i, std::size_t j, double lambda,
                     const TimingCache& timing);
double log_ratio_remove(const SubgraphState& state, std::size_t i, std::size_t j, double lambda,
                        const TimingCache& timing);

/// Cached natural logs of small non-negative integers.
class LogTable {
 public:
  explicit LogTable(std::size_t max_value = 0);
  double operator()(std::int64_t v) const {
    return static_cast<std::size_t>(v) < table_.size() ? table_[static_cast<std::size_t>(v)]
                                                       : std::log(static_cast<double>(v));
  }

 private:
  std::vector<double> table_;
};

}  // namespace rdsgraph

#endif  // RDSGRAPH_LIKELIHOOD_HPP_
