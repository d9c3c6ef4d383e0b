#ifndef RDSGRAPH_SUBGRAPH_STATE_HPP_
#define RDSGRAPH_SUBGRAPH_STATE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rdsgraph/graph_core.hpp"
#include "rdsgraph/likelihood.hpp"

namespace rdsgraph {

enum class MoveKind { add, remove };

struct Move {
  MoveKind kind;
  std::size_t i;  // i < j
  std::size_t j;

  bool operator==(const Move&) const = default;
};

struct FeasibleCounts {
  std::size_t add = 0;
  std::size_t remove = 0;
  std::size_t total() const { return add + remove; }
  bool operator==(const FeasibleCounts&) const = default;
};

/// A compatible candidate G_S with its pendant counts u, susceptible counts s
/// and feasible-proposal counts, all kept consistent under add/remove moves.
///
/// Holds a pointer to the ObservedData it was built from; that object must
/// outlive the state. Single writer.
class SubgraphState {
 public:
  /// Throws CompatibilityError if `a` is not compatible with `obs`.
  SubgraphState(const ObservedData& obs, Adjacency a);

  const ObservedData& observed() const { return *obs_; }
  const Adjacency& adjacency() const { return adj_; }
  std::span<const int> pendant() const { return u_; }
  std::span<const std::int64_t> susceptible() const { return s_; }
  std::size_t edge_count() const { return adj_.edge_count(); }
  std::size_t positive_count() const { return positive_; }
  const LogTable& logs() const { return logs_; }

  /// Incrementally maintained Add / Remove counts.
  FeasibleCounts counts() const;

  /// Counts the state would have after `m`, without applying it.
  FeasibleCounts counts_after(const Move& m) const;

  bool can_add(std::size_t i, std::size_t j) const {
    return i != j && !adj_.test(i, j) && u_[i] >= 1 && u_[j] >= 1;
  }
  bool can_remove(std::size_t i, std::size_t j) const {
    return i != j && adj_.test(i, j) && !obs_->graph.is_recruitment_edge(i, j);
  }

  /// Apply a feasible move. Throws std::logic_error on an infeasible one.
  void apply(const Move& m);

  /// Recompute u, s and counts from scratch and throw std::logic_error on any
  /// disagreement with the incremental values.
  void verify() const;

 private:
  void set_positive(std::size_t v, bool on);

  const ObservedData* obs_;
  Adjacency adj_;
  std::vector<int> u_;
  std::vector<std::int64_t> s_;
  LogTable logs_;
  std::vector<std::uint64_t> positive_mask_;
  std::size_t positive_ = 0;        // vertices with u >= 1
  std::size_t positive_edges_ = 0;  // edges with both endpoints positive
};

/// Brute-force Add / Remove counts by double loop over pairs.
FeasibleCounts recount_feasible(const Adjacency& a, std::span<const int> u, const RecruitmentGraph& g);

}  // namespace rdsgraph

#endif  // RDSGRAPH_SUBGRAPH_STATE_HPP_
