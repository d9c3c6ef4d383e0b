#ifndef RDSGRAPH_METRICS_HPP_
#define RDSGRAPH_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rdsgraph/graph_core.hpp"

namespace rdsgraph {

/// Confusion counts over the upper triangle plus the derived rates.
/// `tpr` is TP / (estimated positives) and `tnr` is TN / (estimated
/// negatives), the column definitions used by the experiment tables;
/// conventional sensitivity is `recall` = TP / (true positives).
/// A rate is nullopt when its denominator is zero.
struct ReconstructionScore {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;
  std::size_t edge_count_true = 0;
  std::size_t edge_count_est = 0;
  std::size_t pairs = 0;

  std::optional<double> accuracy;
  std::optional<double> tpr;
  std::optional<double> tnr;
  std::optional<double> recall;
};

ReconstructionScore score(const Adjacency& est, const Adjacency& truth);

/// One replication's inputs to a summary row.
struct Replication {
  ReconstructionScore score;
  double lambda;
};

struct ColumnSummary {
  double mean = 0.0;
  double sd = 0.0;        // sample SD (n - 1 denominator)
  std::size_t count = 0;  // replications where the value was defined
};

struct SummaryRow {
  ColumnSummary accuracy;
  ColumnSummary tpr;
  ColumnSummary tnr;
  ColumnSummary lambda;
  std::size_t replications = 0;
};

/// Mean and SD per column; undefined rates are left out of their column.
/// Throws std::invalid_argument with fewer than two replications.
SummaryRow summarize_replications(const std::vector<Replication>& reps);

ColumnSummary summarize(const std::vector<double>& values);

/// Header and row in the Accuracy, TPR, TNR, lambda layout (mean and SD each).
std::string summary_csv_header();
std::string summary_csv_row(const SummaryRow& row);

/// Coarse trend check for noisy traces: the mean of the last `window` values
/// exceeds the mean of the first `window`.
bool trending_up(const std::vector<double>& values, std::size_t window);

}  // namespace rdsgraph

#endif  // RDSGRAPH_METRICS_HPP_
