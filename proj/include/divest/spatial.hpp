#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "divest/sample_set.hpp"

namespace divest {

/// Volume of the d-dimensional Euclidean unit ball, pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(std::size_t d);

/// Squared Euclidean distance. Every distance in the library goes through this
/// function so that tree and brute-force searches agree bit for bit.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

/// Exact k-nearest-neighbour distance queries over a fixed reference set.
/// Immutable after construction; queries may run concurrently.
class NeighborIndex {
 public:
  enum class Method { kd_tree, brute_force };

  explicit NeighborIndex(const SampleSet& points, Method method = Method::kd_tree,
                         std::size_t leaf_size = 12);

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  Method method() const { return method_; }

  /// Distance to the k-th closest stored point (1-based k), i.e. the k-th
  /// order statistic of the distance multiset.
  double kth_distance(std::span<const double> query, std::size_t k) const;

  /// The k smallest distances in ascending order.
  std::vector<double> nearest_distances(std::span<const double> query, std::size_t k) const;

  /// Number of stored points with distance <= radius.
  std::size_t count_within(std::span<const double> query, double radius) const;

 private:
  struct Node {
    // Leaf when left < 0; then [begin, end) indexes points_.
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t split_dim = 0;
    double split_value = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::vector<std::uint32_t>& order,
                     const SampleSet& src);
  void check_query(std::span<const double> query) const;
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }

  template <class Heap>
  void search(std::int32_t node, std::span<const double> q, Heap& heap) const;
  std::size_t count_node(std::int32_t node, std::span<const double> q, double radius) const;

  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  Method method_;
  std::size_t leaf_size_;
  std::vector<double> points_;  // reordered so each leaf is contiguous
  std::vector<Node> nodes_;
};

/// Reference implementation: sort all distances and pick the k-th.
double brute_force_kth_distance(const SampleSet& points, std::span<const double> query,
                                std::size_t k);

}  // namespace divest
