#include "divest/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "divest/error.hpp"

namespace divest {

double unit_ball_volume(std::size_t d) {
  if (d == 0) throw Error("unit_ball_volume: dimension must be at least 1");
  double half = 0.5 * static_cast<double>(d);
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

namespace {

// Bounded max-heap holding the k smallest squared distances seen so far.
class KSmallest {
 public:
  explicit KSmallest(std::size_t k) : k_(k) { heap_.reserve(k); }

  void offer(double d2) {
    if (heap_.size() < k_) {
      heap_.push_back(d2);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (d2 < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = d2;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }
  bool full() const { return heap_.size() == k_; }
  double worst() const { return heap_.front(); }

  std::vector<double> sorted_distances() && {
    std::sort_heap(heap_.begin(), heap_.end());
    for (double& v : heap_) v = std::sqrt(v);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<double> heap_;
};

}  // namespace

NeighborIndex::NeighborIndex(const SampleSet& points, Method method, std::size_t leaf_size)
    : dim_(points.dim()), count_(points.rows()), method_(method), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (count_ == 0) throw Error("NeighborIndex: cannot index an empty point set");
  if (count_ > std::numeric_limits<std::uint32_t>::max())
    throw Error("NeighborIndex: too many points");
  if (method_ == Method::brute_force) {
    points_ = points.values();
    return;
  }
  std::vector<std::uint32_t> order(count_);
  std::iota(order.begin(), order.end(), 0u);
  nodes_.reserve(2 * count_ / leaf_size_ + 1);
  build(0, static_cast<std::uint32_t>(count_), order, points);
  points_.resize(count_ * dim_);
  for (std::size_t i = 0; i < count_; ++i) {
    auto r = points.row(order[i]);
    std::copy(r.begin(), r.end(), points_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
  }
}

std::int32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end,
                                  std::vector<std::uint32_t>& order, const SampleSet& src) {
  auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{-1, -1, begin, end, 0, 0.0});
  if (end - begin <= leaf_size_) return id;

  std::size_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    double lo = src.row(order[begin])[j];
    double hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      double v = src.row(order[i])[j];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = j;
    }
  }
  if (best_spread <= 0.0) return id;  // all points identical: keep as one leaf

  std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return src.row(a)[best_dim] < src.row(b)[best_dim];
                   });
  double split = src.row(order[mid])[best_dim];
  std::int32_t left = build(begin, mid, order, src);
  std::int32_t right = build(mid, end, order, src);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.left = left;
  n.right = right;
  n.split_dim = static_cast<std::uint32_t>(best_dim);
  n.split_value = split;
  return id;
}

void NeighborIndex::check_query(std::span<const double> query) const {
  if (query.size() != dim_)
    throw Error("NeighborIndex: query has dimension " + std::to_string(query.size()) +
                ", index has " + std::to_string(dim_));
}

// Left subtree coordinates are <= split_value and right subtree coordinates are
// >= split_value, so |q - split| lower-bounds the distance to the far side.
// Floating-point rounding is monotone, so the computed bound never exceeds a
// computed squared distance and the pruning stays exact.
template <class Heap>
void NeighborIndex::search(std::int32_t node, std::span<const double> q, Heap& heap) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) heap.offer(squared_distance(q, point(i)));
    return;
  }
  double diff = q[n.split_dim] - n.split_value;
  std::int32_t near = diff <= 0.0 ? n.left : n.right;
  std::int32_t far = diff <= 0.0 ? n.right : n.left;
  search(near, q, heap);
  if (!heap.full() || diff * diff < heap.worst()) search(far, q, heap);
}

std::vector<double> NeighborIndex::nearest_distances(std::span<const double> query,
                                                     std::size_t k) const {
  check_query(query);
  if (k == 0 || k > count_)
    throw Error("kth_distance: need 1 <= k <= M (k=" + std::to_string(k) +
                ", M=" + std::to_string(count_) + ")");
  KSmallest heap(k);
  if (method_ == Method::brute_force) {
    for (std::size_t i = 0; i < count_; ++i) heap.offer(squared_distance(query, point(i)));
  } else {
    search(0, query, heap);
  }
  return std::move(heap).sorted_distances();
}

double NeighborIndex::kth_distance(std::span<const double> query, std::size_t k) const {
  return nearest_distances(query, k).back();
}

std::size_t NeighborIndex::count_node(std::int32_t node, std::span<const double> q,
                                      double radius) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    std::size_t c = 0;
    for (std::uint32_t i = n.begin; i < n.end; ++i)
      if (std::sqrt(squared_distance(q, point(i))) <= radius) ++c;
    return c;
  }
  double diff = q[n.split_dim] - n.split_value;
  std::int32_t near = diff <= 0.0 ? n.left : n.right;
  std::int32_t far = diff <= 0.0 ? n.right : n.left;
  std::size_t c = count_node(near, q, radius);
  if (std::abs(diff) <= radius * (1.0 + 1e-12)) c += count_node(far, q, radius);
  return c;
}

// Compares sqrt of the squared distance so the count agrees with kth_distance.
std::size_t NeighborIndex::count_within(std::span<const double> query, double radius) const {
  check_query(query);
  if (!(radius >= 0.0)) throw Error("count_within: radius must be nonnegative");
  if (method_ == Method::brute_force) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < count_; ++i)
      if (std::sqrt(squared_distance(query, point(i))) <= radius) ++c;
    return c;
  }
  return count_node(0, query, radius);
}

double brute_force_kth_distance(const SampleSet& points, std::span<const double> query,
                                std::size_t k) {
  if (k == 0 || k > points.rows()) throw Error("brute_force_kth_distance: need 1 <= k <= M");
  std::vector<double> d2(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) d2[i] = squared_distance(query, points.row(i));
  std::sort(d2.begin(), d2.end());
  return std::sqrt(d2[k - 1]);
}

}  // namespace divest
