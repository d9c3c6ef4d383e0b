#ifndef RDSGRAPH_TESTS_STATS_HPP_
#define RDSGRAPH_TESTS_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace stats {

// Upper 1% point of chi-square with `df` degrees of freedom (Wilson-Hilferty).
inline double chi2_critical_99(int df) {
  const double z = 2.326347874;
  const double k = static_cast<double>(df);
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

inline double chi2_statistic(const std::vector<double>& observed, const std::vector<double>& probs) {
  double total = 0.0;
  for (double o : observed) total += o;
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = total * probs[k];
    stat += (observed[k] - e) * (observed[k] - e) / e;
  }
  return stat;
}

// Two-sided Kolmogorov-Smirnov distance of a sample from a CDF.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double f = cdf(xs[k]);
    d = std::max({d, (static_cast<double>(k) + 1.0) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

// 1% critical value of the KS distance for large samples.
inline double ks_critical_99(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace stats

#endif  // RDSGRAPH_TESTS_STATS_HPP_
