#pragma once

#include <stdexcept>
#include <string>

namespace sacfgm {

// Precondition or argument contract broken by the caller.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computed mini-batch size exceeded the configured cap.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration failed validation; message carries the offending path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation needs data the problem does not carry (e.g. a known optimum).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An iterate became NaN/Inf.
class NonFiniteIterate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace sacfgm
