#pragma once

#include <stdexcept>
#include <string>

namespace cutofflab {

/// Invalid argument for a library operation (bad generator index,
/// unnormalized coefficients, mismatched factor lists, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// An enumeration would exceed the caller-supplied element cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or schema-violating experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Default cap on the number of elements any single enumeration may emit.
inline constexpr std::size_t kDefaultCap = 1'000'000;

}  // namespace cutofflab
