#pragma once

#include <stdexcept>
#include <string>

namespace bayesoed {

/// Input violates a declared invariant (shape, symmetry, ranges, file contents).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization or eigensolver could not complete (e.g. matrix not SPD).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace detail
}  // namespace bayesoed
