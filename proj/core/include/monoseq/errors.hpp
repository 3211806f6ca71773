#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace monoseq {

/// Bad caller-supplied argument (sizes, ranges, mismatched inputs).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed UTF-8 in an input stream.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally invalid input line or file.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training could not proceed (no usable data, non-finite objective, ...).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training data violates a model contract (e.g. label outside the alphabet).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A lattice or model violated an internal precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Persisted model with an unknown or mismatched format version.
class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace monoseq
