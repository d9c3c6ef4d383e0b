#include "rdsgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace rdsgraph {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string cell(const ColumnSummary& c) {
  if (c.count == 0) return "NA,NA";
  return fmt::format("{:.6f},{:.6f}", c.mean, c.sd);
}

}  // namespace

ReconstructionScore score(const Adjacency& est, const Adjacency& truth) {
  if (est.size() != truth.size()) {
    throw std::invalid_argument(fmt::format("score: dimension {} vs {}", est.size(), truth.size()));
  }
  ReconstructionScore r;
  const std::size_t n = est.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool e = est.test(i, j);
      const bool t = truth.test(i, j);
      if (e && t) ++r.true_positive;
      else if (e) ++r.false_positive;
      else if (t) ++r.false_negative;
      else ++r.true_negative;
    }
  }
  r.pairs = n * (n - (n > 0 ? 1 : 0)) / 2;
  r.edge_count_est = r.true_positive + r.false_positive;
  r.edge_count_true = r.true_positive + r.false_negative;
  r.accuracy = ratio(r.true_positive + r.true_negative, r.pairs);
  r.tpr = ratio(r.true_positive, r.edge_count_est);
  r.tnr = ratio(r.true_negative, r.true_negative + r.false_negative);
  r.recall = ratio(r.true_positive, r.edge_count_true);
  return r;
}

ColumnSummary summarize(const std::vector<double>& values) {
  ColumnSummary c;
  c.count = values.size();
  if (values.empty()) return c;
  c.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    // Deviations are taken about the first value so identical columns give exactly 0.
    const double shift = values.front();
    double sum = 0.0, ss = 0.0;
    for (double v : values) {
      sum += v - shift;
      ss += (v - shift) * (v - shift);
    }
    const double k = static_cast<double>(values.size());
    c.sd = std::sqrt(std::max(0.0, (ss - sum * sum / k) / (k - 1.0)));
  }
  return c;
}

SummaryRow summarize_replications(const std::vector<Replication>& reps) {
  if (reps.size() < 2) throw std::invalid_argument("summary needs at least two replications");
  std::vector<double> acc, tpr, tnr, lambda;
  for (const auto& r : reps) {
    if (r.score.accuracy) acc.push_back(*r.score.accuracy);
    if (r.score.tpr) tpr.push_back(*r.score.tpr);
    if (r.score.tnr) tnr.push_back(*r.score.tnr);
    lambda.push_back(r.lambda);
  }
  return {summarize(acc), summarize(tpr), summarize(tnr), summarize(lambda), reps.size()};
}

std::string summary_csv_header() {
  return "accuracy_mean,accuracy_sd,tpr_mean,tpr_sd,tnr_mean,tnr_sd,lambda_mean,lambda_sd,replications";
}

std::string summary_csv_row(const SummaryRow& row) {
  return fmt::format("{},{},{},{},{}", cell(row.accuracy), cell(row.tpr), cell(row.tnr), cell(row.lambda),
                     row.replications);
}

bool trending_up(const std::vector<double>& values, std::size_t window) {
  if (window == 0 || values.size() < 2 * window) return false;
  const double head = std::accumulate(values.begin(), values.begin() + window, 0.0);
  const double tail = std::accumulate(values.end() - window, values.end(), 0.0);
  return tail > head;
}

}  // namespace rdsgraph
