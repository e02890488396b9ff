#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qmbs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Raised when a graph has no two-coloring. Carries the odd cycle that was found
/// (0-based site indices, first vertex not repeated at the end).
class BipartitionError : public Error {
 public:
  BipartitionError(const std::string& what, std::vector<int> cycle)
      : Error(what), odd_cycle(std::move(cycle)) {}
  std::vector<int> odd_cycle;
};

class SectorMismatch : public Error {
 public:
  using Error::Error;
};

/// A requested dense or sparse object would exceed the configured size cap.
class CapacityExceeded : public Error {
 public:
  CapacityExceeded(const std::string& what, double bytes)
      : Error(what), estimated_bytes(bytes) {}
  double estimated_bytes;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmbs
