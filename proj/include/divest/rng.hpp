#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace divest {

/// Stream ids separating the independent draws that make up one trial.
enum class Stream : std::uint64_t {
  none = 0,
  f1 = 1,
  f2 = 2,
  split = 3,
  kernel_ball = 4,
  oracle = 5,
  box_mass = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

/// A (value, stream) pair. Identical pairs reproduce identical draws.
struct Seed {
  std::uint64_t value = 0;
  std::uint64_t stream = 0;

  Seed with_stream(Stream s) const { return {value, static_cast<std::uint64_t>(s)}; }

  /// Child seed obtained by hashing a path of tags into the value.
  Seed derive(std::initializer_list<std::uint64_t> path) const;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Deterministic generator. The engine is mt19937_64 (output fully specified
/// by the standard); uniform and normal variates are produced here rather than
/// through <random> distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(Seed seed);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal();

  /// Uniform integer in [0, n), n >= 1, without modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace divest
