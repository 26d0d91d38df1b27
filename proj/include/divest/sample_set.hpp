#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divest/rng.hpp"

namespace divest {

/// An N x d matrix of points stored row-major, with optional provenance.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(std::size_t dim, std::vector<double> values, std::string source = {},
            std::optional<Seed> seed = std::nullopt);

  std::size_t rows() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<double>& values() const { return values_; }

  const std::string& source() const { return source_; }
  const std::optional<Seed>& seed() const { return seed_; }

  /// Rows at the given indices, in that order.
  SampleSet select(std::span<const std::size_t> indices) const;

  /// Copy with all coordinates multiplied by s.
  SampleSet scaled(double s) const;

  friend bool operator==(const SampleSet& a, const SampleSet& b) {
    return a.dim_ == b.dim_ && a.values_ == b.values_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::string source_;
  std::optional<Seed> seed_;
};

}  // namespace divest
