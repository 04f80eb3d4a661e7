#pragma once

#include <stdexcept>
#include <string>

namespace caex {

// Malformed file header or unsupported magic value.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Payload shorter than its header promises.
struct LengthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Out-of-contract argument (size, range, parity).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Data cannot support the requested model order.
struct DegenerateDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A CNN trajectory left the stable envelope.
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chance agreement saturated; kappa undefined.
struct UndefinedKappaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace caex
