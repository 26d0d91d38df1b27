#include "divest/sample_set.hpp"

#include "divest/error.hpp"

namespace divest {

SampleSet::SampleSet(std::size_t dim, std::vector<double> values, std::string source,
                     std::optional<Seed> seed)
    : dim_(dim), values_(std::move(values)), source_(std::move(source)), seed_(seed) {
  if (dim_ == 0) throw Error("SampleSet: dimension must be at least 1");
  if (values_.size() % dim_ != 0)
    throw Error("SampleSet: value count " + std::to_string(values_.size()) +
                " is not a multiple of dimension " + std::to_string(dim_));
}

SampleSet SampleSet::select(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    if (i >= rows()) throw Error("SampleSet::select: row index out of range");
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return SampleSet(dim_, std::move(out), source_, seed_);
}

SampleSet SampleSet::scaled(double s) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= s;
  return SampleSet(dim_, std::move(out), source_, seed_);
}

}  // namespace divest
