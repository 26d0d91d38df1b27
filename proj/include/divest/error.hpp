#pragma once

#include <stdexcept>
#include <string>

namespace divest {

/// Raised for every contract violation or numerical failure in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace divest
