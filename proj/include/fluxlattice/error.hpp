#pragma once

#include <stdexcept>
#include <string>

namespace fluxlattice {

/// Invalid or physically inconsistent configuration. `field` names the
/// offending config key (dotted path) when one is known.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A numerical procedure left its trusted regime (norm drift, divergence,
/// non-finite prediction).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fluxlattice
