#pragma once

#include <functional>
#include <string>

namespace divest {

/// The convex function g of an f-divergence G(f1,f2) = E_{f2}[g(f1/f2)],
/// together with the map from the functional value G to the reported divergence.
class GFunctional {
 public:
  enum class Kind { renyi, kl, custom };

  /// g(x) = x^alpha; divergence = ln(G) / (alpha - 1).
  static GFunctional renyi(double alpha);
  /// g(x) = -ln x; divergence = G.
  static GFunctional kl();
  /// Arbitrary g; divergence = G.
  static GFunctional custom(std::string name, std::function<double(double)> g);
  /// g(x) = 1, the identity sanity check.
  static GFunctional one();

  /// Parses "renyi:<alpha>", "kl" or "custom:one".
  static GFunctional parse(const std::string& text);

  double operator()(double x) const { return g_(x); }

  /// Throws when the functional value cannot be mapped (Renyi with G <= 0).
  double to_divergence(double functional) const;

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const std::string& name() const { return name_; }
  /// Canonical text form accepted by parse() (custom functions other than "one"
  /// round-trip by name only).
  std::string spec_string() const;

 private:
  GFunctional(Kind kind, double alpha, std::string name, std::function<double(double)> g)
      : kind_(kind), alpha_(alpha), name_(std::move(name)), g_(std::move(g)) {}

  Kind kind_;
  double alpha_;
  std::string name_;
  std::function<double(double)> g_;
};

}  // namespace divest
