#pragma once

#include <stdexcept>
#include <string>

namespace clockforge {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input violates a precondition (zero period, empty set, bad tag, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Checked arithmetic left the representable range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// A period cannot be produced by a hardware tick of the requested frequency.
class ResolutionError : public Error {
public:
  using Error::Error;
};

/// More clusters than hardware sinks to receive them.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// An exponential search was refused because of its size guard.
class RefusalError : public Error {
public:
  using Error::Error;
};

/// Raised by build_stage_graph when |reduced| <= n_hw: one timer per hardware
/// timer, no clustering needed.
class TrivialAllocation : public Error {
public:
  using Error::Error;
};

}  // namespace clockforge
