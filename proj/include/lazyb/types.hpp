#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lazyb {

/// Simulated time and durations, in integer microseconds.
using Micros = std::int64_t;

/// Dense index of a request inside one simulation run.
using RequestId = std::uint32_t;

/// Bad input: malformed files, out-of-range parameters, unknown names.
/// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal consistency check failed. The CLI maps this to exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

inline void ensure(bool cond, const std::string& what) {
  if (!cond) throw InvariantError(what);
}

}  // namespace lazyb
