#pragma once

#include <stdexcept>
#include <string>

namespace bats {

/// Input file could not be parsed; carries the 1-based line number.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// A numerical procedure failed to converge or bracket; message carries
/// diagnostics of the failing state.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough observations (or overlap) to run the requested procedure.
class insufficient_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input that must satisfy a structural property (monotone cdf,
/// full-rank design, ...) was found to violate it.
class integrity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration value (counts, tolerances, file references).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bats
