#pragma once

#include <stdexcept>
#include <string>

namespace thciz {

// Malformed input: bad strings, shape mismatches, violated preconditions.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Well-formed request whose size exceeds a hard enumeration or memory cap.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace thciz
