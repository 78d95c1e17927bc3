#pragma once

#include <stdexcept>

namespace pkmc {

/// Malformed or schema-violating text file (scenario, run config, path file).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pkmc
