#include "divest/functional.hpp"

#include <cmath>
#include <sstream>

#include "divest/error.hpp"

namespace divest {

GFunctional GFunctional::renyi(double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha == 1.0)
    throw Error("Renyi functional needs alpha in (0,1) or (1,inf), got " + std::to_string(alpha));
  return GFunctional(Kind::renyi, alpha, "renyi", [alpha](double x) { return std::pow(x, alpha); });
}

GFunctional GFunctional::kl() {
  return GFunctional(Kind::kl, 0.0, "kl", [](double x) { return -std::log(x); });
}

GFunctional GFunctional::custom(std::string name, std::function<double(double)> g) {
  if (!g) throw Error("custom functional needs a callable");
  return GFunctional(Kind::custom, 0.0, std::move(name), std::move(g));
}

GFunctional GFunctional::one() {
  return custom("one", [](double) { return 1.0; });
}

GFunctional GFunctional::parse(const std::string& text) {
  if (text == "kl") return kl();
  if (text == "custom:one" || text == "one") return one();
  if (text.rfind("renyi:", 0) == 0) {
    std::string rest = text.substr(6);
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) throw Error("bad Renyi alpha in g-spec '" + text + "'");
    return renyi(alpha);
  }
  throw Error("unknown g-spec '" + text + "' (expected renyi:<alpha>, kl or custom:one)");
}

double GFunctional::to_divergence(double functional) const {
  switch (kind_) {
    case Kind::renyi:
      if (!(functional > 0.0))
        throw Error("Renyi post-transform needs a positive functional value, got " +
                    std::to_string(functional));
      return std::log(functional) / (alpha_ - 1.0);
    case Kind::kl:
    case Kind::custom:
      return functional;
  }
  return functional;
}

std::string GFunctional::spec_string() const {
  switch (kind_) {
    case Kind::renyi: {
      std::ostringstream os;
      os.precision(17);
      os << "renyi:" << alpha_;
      return os.str();
    }
    case Kind::kl:
      return "kl";
    case Kind::custom:
      return "custom:" + name_;
  }
  return name_;
}

}  // namespace divest
