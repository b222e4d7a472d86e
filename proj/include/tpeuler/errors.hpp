#pragma once

#include <stdexcept>
#include <string>

namespace tpeuler {

/// A state or argument outside the domain of a gas-law map.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Invalid parameters (grid, fan exponents, band collapse).
class ConfigurationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The time stepper produced a non-finite or unphysical state.
class InstabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Wave curves meet at or below vacuum; the caller floors the cell.
class NearVacuumError : public DomainError {
public:
  using DomainError::DomainError;
};

class DecodeError : public std::runtime_error {
public:
  DecodeError(const std::string& what, double defect)
      : std::runtime_error(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

private:
  double defect_;
};

} // namespace tpeuler
