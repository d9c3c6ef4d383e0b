#ifndef RDSGRAPH_GRAPH_CORE_HPP_
#define RDSGRAPH_GRAPH_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rdsgraph {

inline constexpr std::size_t kNoRecruiter = std::numeric_limits<std::size_t>::max();

using Edge = std::pair<std::size_t, std::size_t>;

/// Directed who-recruited-whom forest over the n sampled subjects.
///
/// Vertices are dense indices in recruitment-time order. A vertex is a seed
/// iff it has no recruiter; every other vertex has exactly one recruiter with
/// a smaller index.
class RecruitmentGraph {
 public:
  RecruitmentGraph() = default;

  /// `recruiter_of[k]` is the recruiter of k, or kNoRecruiter for a seed.
  explicit RecruitmentGraph(std::vector<std::size_t> recruiter_of);

  std::size_t size() const { return recruiter_.size(); }
  bool is_seed(std::size_t v) const { return recruiter_[v] == kNoRecruiter; }
  std::size_t recruiter(std::size_t v) const { return recruiter_[v]; }

  /// Recruits of v in event order.
  const std::vector<std::size_t>& recruits(std::size_t v) const { return recruits_[v]; }
  std::size_t out_degree(std::size_t v) const { return recruits_[v].size(); }

  /// Number of recruitment edges incident to v.
  std::size_t min_degree(std::size_t v) const { return out_degree(v) + (is_seed(v) ? 0 : 1); }

  const std::vector<std::size_t>& seeds() const { return seeds_; }
  std::size_t seed_count() const { return seeds_.size(); }
  const std::vector<bool>& seed_mask() const { return seed_mask_; }

  /// True iff {a, b} is a recruitment edge in either direction.
  bool is_recruitment_edge(std::size_t a, std::size_t b) const {
    return recruiter_[b] == a || recruiter_[a] == b;
  }

  /// Directed edges (recruiter, recruit), ordered by recruit.
  std::vector<Edge> edges() const;

 private:
  std::vector<std::size_t> recruiter_;
  std::vector<std::vector<std::size_t>> recruits_;
  std::vector<std::size_t> seeds_;
  std::vector<bool> seed_mask_;
};

/// Which subjects hold at least one coupon just before each recruitment event.
///
/// Row i is zero up to and including column i, one on (i, last_held(i)], and
/// zero afterwards; only the window end is stored.
class CouponMatrix {
 public:
  CouponMatrix() = default;
  explicit CouponMatrix(std::vector<std::size_t> last_held);

  std::size_t size() const { return last_.size(); }
  bool operator()(std::size_t i, std::size_t j) const { return j > i && j <= last_[i]; }

  /// Last event index at which i held a coupon, or i when it never held one.
  std::size_t last_held(std::size_t i) const { return last_[i]; }

  std::vector<std::vector<std::uint8_t>> to_dense() const;

  bool operator==(const CouponMatrix&) const = default;

 private:
  std::vector<std::size_t> last_;
};

class InfeasibleCoupons : public std::runtime_error {
 public:
  InfeasibleCoupons(std::size_t vertex, std::size_t issued, std::size_t recruits);
  std::size_t vertex() const { return vertex_; }

 private:
  std::size_t vertex_;
};

/// Replays coupon spending: each subject starts with coupons_issued[i] at its
/// own recruitment and spends one per recruit. Left-limit semantics, so the
/// coupon spent on recruit j still counts at column j.
CouponMatrix build_coupon_matrix(const RecruitmentGraph& g, std::span<const int> coupons_issued);

/// The RDS observables: recruitment forest, degrees, event times, coupons.
struct ObservedData {
  RecruitmentGraph graph;
  std::vector<int> degrees;
  std::vector<double> times;
  std::vector<double> waits;
  std::vector<int> coupons_issued;
  CouponMatrix coupons;
  std::vector<std::string> ids;

  std::size_t size() const { return graph.size(); }
  std::size_t recruit_count() const { return graph.size() - graph.seed_count(); }
};

/// Validates and assembles ObservedData. Waits are derived from times and the
/// coupon matrix from the recruitment graph. Times must be non-decreasing;
/// a tie is accepted only when the later subject is a seed (its wait is then a
/// zero-length censoring term). Empty `ids` are replaced by "0".."n-1".
ObservedData make_observed(RecruitmentGraph g, std::vector<int> degrees, std::vector<double> times,
                           std::vector<int> coupons_issued, std::vector<std::string> ids = {});

/// Symmetric packed boolean adjacency matrix without self-loops.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(std::size_t n);

  static Adjacency from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edges_; }

  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + (j >> 6)] >> (j & 63)) & 1u;
  }
  void set(std::size_t i, std::size_t j);
  void reset(std::size_t i, std::size_t j);

  std::size_t degree(std::size_t i) const;

  /// Number of neighbours of i whose bit is set in `mask` (same word layout as a row).
  std::size_t count_in(std::size_t i, std::span<const std::uint64_t> mask) const;

  std::span<const std::uint64_t> row(std::size_t i) const {
    return {bits_.data() + i * words_, words_};
  }
  std::size_t words_per_row() const { return words_; }

  /// Undirected edges as (i, j) with i < j, lexicographic order.
  std::vector<Edge> edges() const;

  bool operator==(const Adjacency&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Undirected closure of the recruitment edges, the minimal compatible graph.
Adjacency recruitment_closure(const RecruitmentGraph& g);

enum class Condition { vertex_set = 1, recruitment_edge = 2, degree_bound = 3 };

struct Violation {
  Condition condition;
  std::size_t first;
  std::size_t second;  // kNoRecruiter for vertex-level violations
};

/// Compatibility of a candidate subgraph with G_R and the reported degrees.
/// Throws std::invalid_argument on dimension mismatch or a malformed matrix.
std::vector<Violation> check_compatibility(const Adjacency& a, const RecruitmentGraph& g,
                                           std::span<const int> degrees);

class CompatibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// u[i] = d[i] - row sum of A. Throws CompatibilityError on a negative entry.
std::vector<int> pendant_counts(const Adjacency& a, std::span<const int> degrees);

}  // namespace rdsgraph

#endif  // RDSGRAPH_GRAPH_CORE_HPP_
