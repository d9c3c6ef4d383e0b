#include "rdsgraph/graph_core.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>

namespace rdsgraph {

RecruitmentGraph::RecruitmentGraph(std::vector<std::size_t> recruiter_of)
    : recruiter_(std::move(recruiter_of)),
      recruits_(recruiter_.size()),
      seed_mask_(recruiter_.size(), false) {
  for (std::size_t v = 0; v < recruiter_.size(); ++v) {
    const std::size_t r = recruiter_[v];
    if (r == kNoRecruiter) {
      seeds_.push_back(v);
      seed_mask_[v] = true;
      continue;
    }
    if (r >= v) {
      throw std::invalid_argument(
          fmt::format("recruiter {} of vertex {} does not precede it in recruitment order", r, v));
    }
    recruits_[r].push_back(v);
  }
}

std::vector<Edge> RecruitmentGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(size() - seed_count());
  for (std::size_t v = 0; v < size(); ++v) {
    if (!is_seed(v)) out.emplace_back(recruiter_[v], v);
  }
  return out;
}

CouponMatrix::CouponMatrix(std::vector<std::size_t> last_held) : last_(std::move(last_held)) {
  for (std::size_t i = 0; i < last_.size(); ++i) {
    if (last_[i] < i || last_[i] >= last_.size()) {
      throw std::invalid_argument(fmt::format("coupon window of row {} out of range", i));
    }
  }
}

std::vector<std::vector<std::uint8_t>> CouponMatrix::to_dense() const {
  const std::size_t n = size();
  std::vector<std::vector<std::uint8_t>> dense(n, std::vector<std::uint8_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= last_[i]; ++j) dense[i][j] = 1;
  }
  return dense;
}

InfeasibleCoupons::InfeasibleCoupons(std::size_t vertex, std::size_t issued, std::size_t recruits)
    : std::runtime_error(fmt::format("vertex {} was issued {} coupons but recruited {}", vertex,
                                     issued, recruits)),
      vertex_(vertex) {}

CouponMatrix build_coupon_matrix(const RecruitmentGraph& g, std::span<const int> coupons_issued) {
  const std::size_t n = g.size();
  if (coupons_issued.size() != n) {
    throw std::invalid_argument("coupons_issued length does not match the recruitment graph");
  }
  std::vector<std::size_t> last(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (coupons_issued[i] < 0) {
      throw std::invalid_argument(fmt::format("negative coupon count for vertex {}", i));
    }
    const auto issued = static_cast<std::size_t>(coupons_issued[i]);
    const auto& recruits = g.recruits(i);
    if (issued < recruits.size()) throw InfeasibleCoupons(i, issued, recruits.size());
    if (issued == 0) {
      last[i] = i;
    } else if (issued == recruits.size()) {
      last[i] = recruits.back();  // the final coupon is still held at that event's left limit
    } else {
      last[i] = n - 1;
    }
  }
  return CouponMatrix(std::move(last));
}

ObservedData make_observed(RecruitmentGraph g, std::vector<int> degrees, std::vector<double> times,
                           std::vector<int> coupons_issued, std::vector<std::string> ids) {
  const std::size_t n = g.size();
  if (degrees.size() != n || times.size() != n || coupons_issued.size() != n) {
    throw std::invalid_argument("observed-data sequences must all have length n");
  }
  if (ids.empty()) {
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  } else if (ids.size() != n) {
    throw std::invalid_argument("ids length does not match the recruitment graph");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(times[i])) {
      throw std::invalid_argument(fmt::format("non-finite time for subject {}", ids[i]));
    }
    if (degrees[i] < 0 || static_cast<std::size_t>(degrees[i]) < g.min_degree(i)) {
      throw std::invalid_argument(fmt::format("degree {} of subject {} is below its minimum degree {}",
                                              degrees[i], ids[i], g.min_degree(i)));
    }
    if (i == 0) continue;
    if (times[i] < times[i - 1] || (times[i] == times[i - 1] && !g.is_seed(i))) {
      throw std::invalid_argument(
          fmt::format("times must be strictly increasing at recruit {} (index {})", ids[i], i));
    }
  }
  std::vector<double> waits(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) waits[k] = times[k] - times[k - 1];

  CouponMatrix c = build_coupon_matrix(g, coupons_issued);
  return ObservedData{std::move(g),  std::move(degrees),        std::move(times), std::move(waits),
                      std::move(coupons_issued), std::move(c), std::move(ids)};
}

Adjacency::Adjacency(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

Adjacency Adjacency::from_edges(std::size_t n, std::span<const Edge> edges) {
  Adjacency a(n);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) throw std::out_of_range("edge endpoint out of range");
    a.set(i, j);
  }
  return a;
}

void Adjacency::set(std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("self-loops are not allowed");
  if (test(i, j)) return;
  bits_[i * words_ + (j >> 6)] |= std::uint64_t{1} << (j & 63);
  bits_[j * words_ + (i >> 6)] |= std::uint64_t{1} << (i & 63);
  ++edges_;
}

void Adjacency::reset(std::size_t i, std::size_t j) {
  if (!test(i, j)) return;
  bits_[i * words_ + (j >> 6)] &= ~(std::uint64_t{1} << (j & 63));
  bits_[j * words_ + (i >> 6)] &= ~(std::uint64_t{1} << (i & 63));
  --edges_;
}

std::size_t Adjacency::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::uint64_t w : row(i)) d += static_cast<std::size_t>(std::popcount(w));
  return d;
}

std::size_t Adjacency::count_in(std::size_t i, std::span<const std::uint64_t> mask) const {
  auto r = row(i);
  std::size_t d = 0;
  for (std::size_t w = 0; w < words_; ++w) d += static_cast<std::size_t>(std::popcount(r[w] & mask[w]));
  return d;
}

std::vector<Edge> Adjacency::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto r = row(i);
    for (std::size_t w = (i + 1) >> 6; w < words_; ++w) {
      std::uint64_t bits = r[w];
      while (bits != 0) {
        const std::size_t j = (w << 6) + static_cast<std::size_t>(std::countr_zero(bits));
        bits &= bits - 1;
        if (j > i) out.emplace_back(i, j);
      }
    }
  }
  return out;
}

Adjacency recruitment_closure(const RecruitmentGraph& g) {
  const auto edges = g.edges();
  return Adjacency::from_edges(g.size(), edges);
}

std::vector<Violation> check_compatibility(const Adjacency& a, const RecruitmentGraph& g,
                                           std::span<const int> degrees) {
  const std::size_t n = g.size();
  if (a.size() != n || degrees.size() != n) {
    throw std::invalid_argument(
        fmt::format("dimension mismatch: adjacency {}, recruitment graph {}, degrees {}", a.size(), n,
                    degrees.size()));
  }
  // Condition 1 (identical vertex sets) is the dimension check above.
  std::vector<Violation> out;
  for (const auto& [r, k] : g.edges()) {
    if (!a.test(r, k)) out.push_back({Condition::recruitment_edge, r, k});
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<long long>(a.degree(v)) > degrees[v]) {
      out.push_back({Condition::degree_bound, v, kNoRecruiter});
    }
  }
  return out;
}

std::vector<int> pendant_counts(const Adjacency& a, std::span<const int> degrees) {
  if (a.size() != degrees.size()) throw std::invalid_argument("dimension mismatch in pendant_counts");
  std::vector<int> u(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    u[i] = degrees[i] - static_cast<int>(a.degree(i));
    if (u[i] < 0) {
      throw CompatibilityError(
          fmt::format("vertex {} has {} sampled neighbours but degree {}", i, a.degree(i), degrees[i]));
    }
  }
  return u;
}

}  // namespace rdsgraph
