#include "rdsgraph/subgraph_state.hpp"

#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace rdsgraph {

namespace {

std::size_t max_susceptible(std::span<const int> degrees) {
  long long total = 0;
  for (int d : degrees) total += d;
  return static_cast<std::size_t>(total) + 1;
}

std::size_t pairs(std::size_t p) { return p * (p - (p > 0 ? 1 : 0)) / 2; }

}  // namespace

SubgraphState::SubgraphState(const ObservedData& obs, Adjacency a)
    : obs_(&obs), adj_(std::move(a)), logs_(max_susceptible(obs.degrees)) {
  const auto violations = check_compatibility(adj_, obs.graph, obs.degrees);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw CompatibilityError(fmt::format("incompatible subgraph: condition {} fails at ({}, {})",
                                         static_cast<int>(v.condition), v.first, v.second));
  }
  u_ = pendant_counts(adj_, obs.degrees);
  s_ = susceptible_counts(adj_, obs.coupons, u_);
  positive_mask_.assign(adj_.words_per_row(), 0);
  for (std::size_t v = 0; v < u_.size(); ++v) {
    if (u_[v] >= 1) set_positive(v, true);
  }
}

void SubgraphState::set_positive(std::size_t v, bool on) {
  const std::uint64_t bit = std::uint64_t{1} << (v & 63);
  if (on) {
    positive_edges_ += adj_.count_in(v, positive_mask_);
    positive_mask_[v >> 6] |= bit;
    ++positive_;
  } else {
    positive_mask_[v >> 6] &= ~bit;
    positive_edges_ -= adj_.count_in(v, positive_mask_);
    --positive_;
  }
}

FeasibleCounts SubgraphState::counts() const {
  const std::size_t fixed = obs_->recruit_count();
  return {pairs(positive_) - positive_edges_, adj_.edge_count() - fixed};
}

FeasibleCounts SubgraphState::counts_after(const Move& m) const {
  const auto [i, j] = std::pair{m.i, m.j};
  std::size_t p = positive_;
  std::size_t pe = positive_edges_;
  std::size_t edges = adj_.edge_count();
  if (m.kind == MoveKind::add) {
    ++edges;
    ++pe;
    const bool i_stays = u_[i] >= 2;
    const bool j_stays = u_[j] >= 2;
    if (!i_stays) {
      --p;
      pe -= adj_.count_in(i, positive_mask_) + 1;
    }
    if (!j_stays) {
      --p;
      pe -= adj_.count_in(j, positive_mask_) + (i_stays ? 1 : 0);
    }
  } else {
    --edges;
    const bool i_pos = u_[i] >= 1;
    const bool j_pos = u_[j] >= 1;
    if (i_pos && j_pos) --pe;
    if (!i_pos) {
      ++p;
      pe += adj_.count_in(i, positive_mask_) - (j_pos ? 1 : 0);
    }
    if (!j_pos) {
      ++p;
      pe += adj_.count_in(j, positive_mask_) - (i_pos ? 1 : 0);
    }
  }
  return {pairs(p) - pe, edges - obs_->recruit_count()};
}

void SubgraphState::apply(const Move& m) {
  std::size_t i = std::min(m.i, m.j);
  std::size_t j = std::max(m.i, m.j);
  if (m.kind == MoveKind::add) {
    if (!can_add(i, j)) throw std::logic_error(fmt::format("infeasible add ({}, {})", i, j));
    apply_add(s_, i, j, obs_->coupons);
    adj_.set(i, j);
    ++positive_edges_;
    --u_[i];
    --u_[j];
    if (u_[i] == 0) set_positive(i, false);
    if (u_[j] == 0) set_positive(j, false);
  } else {
    if (!can_remove(i, j)) throw std::logic_error(fmt::format("infeasible remove ({}, {})", i, j));
    apply_remove(s_, i, j, obs_->coupons);
    if (u_[i] >= 1 && u_[j] >= 1) --positive_edges_;
    adj_.reset(i, j);
    ++u_[i];
    ++u_[j];
    if (u_[i] == 1) set_positive(i, true);
    if (u_[j] == 1) set_positive(j, true);
  }
}

void SubgraphState::verify() const {
  const auto u = pendant_counts(adj_, obs_->degrees);
  if (u != u_) throw std::logic_error("pendant counts diverged from recomputation");
  const auto s = susceptible_counts(adj_, obs_->coupons, u);
  if (s != s_) throw std::logic_error("susceptible counts diverged from recomputation");
  if (counts() != recount_feasible(adj_, u_, obs_->graph)) {
    throw std::logic_error("feasible-move counts diverged from recomputation");
  }
  std::size_t p = 0;
  for (std::size_t v = 0; v < u_.size(); ++v) {
    const bool bit = (positive_mask_[v >> 6] >> (v & 63)) & 1u;
    if (bit != (u_[v] >= 1)) throw std::logic_error("positive-pendant mask diverged");
    p += bit;
  }
  if (p != positive_) throw std::logic_error("positive-pendant count diverged");
}

FeasibleCounts recount_feasible(const Adjacency& a, std::span<const int> u, const RecruitmentGraph& g) {
  FeasibleCounts c;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool edge = a.test(i, j);
      if (!edge && u[i] >= 1 && u[j] >= 1) ++c.add;
      if (edge && !g.is_recruitment_edge(i, j)) ++c.remove;
    }
  }
  return c;
}

}  // namespace rdsgraph
